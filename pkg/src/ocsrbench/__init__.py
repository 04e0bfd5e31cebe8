"""
ocsrbench: CARBON molecular representation, MOSAIC difficulty metric, and a
three-protocol benchmark harness for optical chemical structure recognition.
"""

from .carbon import (
    CarbonDocument,
    CarbonForm,
    CarbonParseError,
    CarbonSchemaError,
    convert_form,
    emit_carbon,
    load_document,
    parse_carbon,
)
from .graphops import (
    AttributeComparison,
    ConfigurationError,
    SizeGuardExceeded,
    brute_force_isomorphic,
    canonical_ranking,
    default_simplification,
    fold_deuterium,
    normalize_placeholder_labels,
    project_simplified,
    relabel_atoms,
    simplify_bonds,
)
from .matching import (
    MatchConfig,
    MatchOutcome,
    aromatic_normalize,
    graph_exact_match,
    simplified_graph_match,
    smiles_match,
    stereo_agreement,
    stereo_parity_signature,
)
from .molfile import MolfileParseError, parse_molfile_v2000
from .molgraph import (
    Atom,
    AtomLabel,
    AtomParity,
    BASIC_BOND_TYPES,
    Bond,
    BondDir,
    BondType,
    Bracket,
    ContractViolation,
    LabelKind,
    MolGraph,
    ParitySign,
    Radical,
    UnknownBondTypeError,
    ValidationReport,
    validate_graph,
)
from .mosaic import (
    ChemicalLabel,
    CoverageStats,
    DistributionMatrix,
    LabelSet,
    MosaicScore,
    UnknownLabelError,
    VisualLabel,
    accuracy_by_difficulty,
    cooccurrence_matrix,
    coverage_stats,
    difficulty_grid,
    distribution_matrix,
    mosaic_score,
)
from .predictions import (
    PROTOCOLS,
    Prediction,
    parse_prediction_document,
    repair_model_text,
)
from .smiles import (
    NotSmilesExpressibleError,
    SmilesParseError,
    emit_canonical_smiles,
    parse_smiles,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "AtomLabel",
    "AtomParity",
    "AttributeComparison",
    "BASIC_BOND_TYPES",
    "Bond",
    "BondDir",
    "BondType",
    "Bracket",
    "CarbonDocument",
    "CarbonForm",
    "CarbonParseError",
    "CarbonSchemaError",
    "ChemicalLabel",
    "ConfigurationError",
    "ContractViolation",
    "CoverageStats",
    "DistributionMatrix",
    "LabelKind",
    "LabelSet",
    "MatchConfig",
    "MatchOutcome",
    "MolGraph",
    "MolfileParseError",
    "MosaicScore",
    "NotSmilesExpressibleError",
    "PROTOCOLS",
    "ParitySign",
    "Prediction",
    "Radical",
    "SizeGuardExceeded",
    "SmilesParseError",
    "UnknownBondTypeError",
    "UnknownLabelError",
    "ValidationReport",
    "VisualLabel",
    "accuracy_by_difficulty",
    "aromatic_normalize",
    "brute_force_isomorphic",
    "canonical_ranking",
    "convert_form",
    "cooccurrence_matrix",
    "coverage_stats",
    "default_simplification",
    "difficulty_grid",
    "distribution_matrix",
    "emit_canonical_smiles",
    "emit_carbon",
    "fold_deuterium",
    "graph_exact_match",
    "load_document",
    "mosaic_score",
    "normalize_placeholder_labels",
    "parse_carbon",
    "parse_molfile_v2000",
    "parse_prediction_document",
    "parse_smiles",
    "project_simplified",
    "relabel_atoms",
    "repair_model_text",
    "simplified_graph_match",
    "simplify_bonds",
    "smiles_match",
    "stereo_agreement",
    "stereo_parity_signature",
    "validate_graph",
]
