"""
Graph algorithms over :class:`~ocsrbench.molgraph.MolGraph`.

Canonical ranking (iterative neighborhood refinement), placeholder-label
normalization, bond simplification / projection, atom relabeling, and the
exhaustive isomorphism oracle used to cross-check the production matcher.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from typing import Callable, Optional

from .molgraph import (
    BASIC_BOND_TYPES,
    Atom,
    AtomLabel,
    AtomParity,
    Bond,
    BondType,
    Bracket,
    IMPLICIT_H,
    LabelKind,
    MolGraph,
    greek_suffix,
    require_valid,
)


class ConfigurationError(ValueError):
    """A caller-supplied configuration violates an operation's contract."""


class SizeGuardExceeded(ValueError):
    """The exhaustive oracle refused an input above its size bound."""


# ---------------------------------------------------------------------------
# Canonical ranking
# ---------------------------------------------------------------------------


def _charge_key(charge: Optional[Fraction]) -> str:
    if charge is None or charge == 0:
        return ""
    return str(charge)


def _seed_label_text(atom: Atom) -> str:
    # Greek placeholder suffixes are mutable (the normalization pass rewrites
    # them), so they must not influence structural ranking; only the family
    # prefix does. Full text re-enters as a tie-break key afterwards.
    family = atom.label.greek_placeholder_family
    return family if family is not None else atom.label.text


def _mark_seen_from(bond: Bond, atom_id: int) -> str:
    # UP written a1->a2 is the same geometry as DOWN written a2->a1, so the
    # mark must be normalized to the viewing atom before entering any
    # orientation-independent signature.
    if bond.direction is None:
        return ""
    mark = bond.direction if bond.atom1 == atom_id else bond.direction.flipped()
    return mark.value


def _atom_seed(g: MolGraph, atom: Atom) -> tuple:
    """Id-independent seed invariant."""
    incident = []
    for b in g.incident_bonds(atom.id):
        role = ""
        if b.bond_type.is_directional:
            role = "s" if b.atom1 == atom.id else "t"
        incident.append((b.bond_type.value, _mark_seen_from(b, atom.id), role))
    return (
        atom.label.kind.value,
        _seed_label_text(atom),
        _charge_key(atom.charge),
        atom.isotope or 0,
        atom.valence or 0,
        int(atom.radical) if atom.radical else 0,
        -1 if atom.hydrogens is None else atom.hydrogens,
        int(atom.aromatic),
        g.degree(atom.id),
        tuple(sorted(incident)),
    )


def _edge_key(bond: Bond, from_atom: int) -> tuple:
    role = ""
    if bond.bond_type.is_directional:
        role = "s" if bond.atom1 == from_atom else "t"
    return (bond.bond_type.value, _mark_seen_from(bond, from_atom), role)


def _dense_ranks(sigs: dict[int, tuple]) -> dict[int, int]:
    ordered = sorted(set(sigs.values()))
    index = {sig: i for i, sig in enumerate(ordered)}
    return {atom_id: index[sig] for atom_id, sig in sigs.items()}


def canonical_ranking(g: MolGraph) -> dict[int, int]:
    """Deterministic atom ranking, invariant under id relabeling.

    Morgan-style refinement seeded by the attribute tuple (greek placeholder
    suffixes masked, since the normalization pass rewrites them), followed by
    tie-breaking that isolates one representative of the first tied class
    (smallest label text, then earliest input position) and re-refines until
    the partition is discrete. Returns ``{atom_id: rank}`` with ranks a
    permutation of ``0..n-1``.
    """
    require_valid(g, "canonical_ranking")
    n = len(g.atoms)
    if n == 0:
        return {}

    input_pos = {a.id: i for i, a in enumerate(g.atoms)}
    bonds_at: dict[int, list[Bond]] = {a.id: [] for a in g.atoms}
    for b in g.bonds:
        bonds_at[b.atom1].append(b)
        bonds_at[b.atom2].append(b)

    rank = _dense_ranks({a.id: _atom_seed(g, a) for a in g.atoms})

    def refine(current: dict[int, int]) -> dict[int, int]:
        while True:
            sigs = {}
            for a in g.atoms:
                nbr_sig = sorted(
                    (_edge_key(b, a.id), current[b.other(a.id)]) for b in bonds_at[a.id]
                )
                sigs[a.id] = (current[a.id], tuple(nbr_sig))
            refined = _dense_ranks(sigs)
            if len(set(refined.values())) == len(set(current.values())):
                return refined
            current = refined

    rank = refine(rank)

    while len(set(rank.values())) < n:
        counts: dict[int, int] = {}
        for r in rank.values():
            counts[r] = counts.get(r, 0) + 1
        tied_rank = min(r for r, c in counts.items() if c > 1)
        chosen = min(
            (a.id for a in g.atoms if rank[a.id] == tied_rank),
            key=lambda atom_id: (g.atom(atom_id).label.text, input_pos[atom_id]),
        )
        bumped = {atom_id: (r, 0 if atom_id == chosen else 1) for atom_id, r in rank.items()}
        rank = refine(_dense_ranks(bumped))

    return rank


def relabel_atoms(g: MolGraph, mapping: dict[int, int]) -> MolGraph:
    """Rewrite atom ids through ``mapping`` (must be injective and total).

    Atom list order is preserved; bonds, brackets, and recorded parity
    neighbor orders are rewritten consistently.
    """
    if set(mapping.keys()) != set(g.atom_ids):
        raise ConfigurationError("relabel mapping must cover exactly the graph's atom ids")
    if len(set(mapping.values())) != len(mapping):
        raise ConfigurationError("relabel mapping must be injective")

    def map_parity(p: Optional[AtomParity]) -> Optional[AtomParity]:
        if p is None:
            return None
        nbrs = tuple(IMPLICIT_H if x == IMPLICIT_H else mapping[x] for x in p.neighbors)
        return AtomParity(p.sign, nbrs)

    atoms = tuple(
        replace(a, id=mapping[a.id], parity=map_parity(a.parity)) for a in g.atoms
    )
    bonds = tuple(
        replace(b, atom1=mapping[b.atom1], atom2=mapping[b.atom2]) for b in g.bonds
    )
    brackets = tuple(Bracket({mapping[x] for x in br.atoms}, br.mark) for br in g.brackets)
    return MolGraph(atoms, bonds, brackets)


def sort_atoms_canonically(g: MolGraph) -> MolGraph:
    """Renumber atoms to 0..n-1 in canonical-rank order (list order follows)."""
    ranking = canonical_ranking(g)
    relabeled = relabel_atoms(g, ranking)
    atoms = tuple(sorted(relabeled.atoms, key=lambda a: a.id))
    return MolGraph(atoms, relabeled.bonds, relabeled.brackets)


# ---------------------------------------------------------------------------
# Placeholder-label normalization
# ---------------------------------------------------------------------------


def normalize_placeholder_labels(g: MolGraph) -> MolGraph:
    """Rename greek-suffixed placeholders to α, β, γ, ... in rank order.

    Applies independently to the R family and the GROUP family; atoms
    sharing a label text keep sharing one. Numbered R-groups carry meaning
    and are never touched. Idempotent.
    """
    require_valid(g, "normalize_placeholder_labels")
    families = {"R", "GROUP"}
    if not any(a.label.greek_placeholder_family in families for a in g.atoms):
        return g

    ranking = canonical_ranking(g)
    assignment: dict[tuple[str, str], str] = {}
    next_index = {"R": 0, "GROUP": 0}
    for atom in sorted(g.atoms, key=lambda a: ranking[a.id]):
        family = atom.label.greek_placeholder_family
        if family is None:
            continue
        key = (family, atom.label.text)
        if key not in assignment:
            assignment[key] = greek_suffix(next_index[family])
            next_index[family] += 1

    def renamed(label: AtomLabel) -> AtomLabel:
        family = label.greek_placeholder_family
        if family is None:
            return label
        suffix = assignment[(family, label.text)]
        if family == "R":
            return AtomLabel.rgroup_greek(suffix)
        return AtomLabel.group_placeholder(suffix)

    atoms = tuple(replace(a, label=renamed(a.label)) for a in g.atoms)
    return MolGraph(atoms, g.bonds, g.brackets)


# ---------------------------------------------------------------------------
# Bond simplification
# ---------------------------------------------------------------------------

_DEFAULT_MAPPING: Optional[dict[BondType, BondType]] = None


def default_simplification() -> dict[BondType, BondType]:
    """The shipped complex-to-basic bond mapping (see data/bond_simplification.json)."""
    global _DEFAULT_MAPPING
    if _DEFAULT_MAPPING is None:
        raw = json.loads(
            resources.files("ocsrbench").joinpath("data/bond_simplification.json").read_text()
        )
        _DEFAULT_MAPPING = {BondType.parse(k): BondType.parse(v) for k, v in raw.items()}
    return dict(_DEFAULT_MAPPING)


def _check_mapping(mapping: dict[BondType, BondType]) -> None:
    missing = [bt.value for bt in BondType if bt not in mapping]
    if missing:
        raise ConfigurationError(f"simplification mapping not total; missing {missing}")
    bad_image = [bt.value for bt, target in mapping.items() if target not in BASIC_BOND_TYPES]
    if bad_image:
        raise ConfigurationError(f"simplification image outside basic set for {bad_image}")
    moved = [bt.value for bt in BASIC_BOND_TYPES if mapping[bt] is not bt]
    if moved:
        raise ConfigurationError(f"simplification mapping must fix basic types, moves {moved}")


def simplify_bonds(g: MolGraph, mapping: Optional[dict[BondType, BondType]] = None) -> MolGraph:
    """Replace every bond's type through ``mapping`` (defaults to the shipped table)."""
    if mapping is None:
        mapping = default_simplification()
    _check_mapping(mapping)
    bonds = tuple(replace(b, bond_type=mapping[b.bond_type]) for b in g.bonds)
    return MolGraph(g.atoms, bonds, g.brackets)


def project_simplified(g: MolGraph) -> MolGraph:
    """Project onto the simplified-graph vocabulary.

    Bond types collapse through the default mapping; charge, isotope,
    valence, radical, hydrogen counts, aromatic flags, parities, and
    direction marks are cleared; brackets are dropped. Labels, ids, and
    coordinates survive.
    """
    require_valid(g, "project_simplified")
    simplified = simplify_bonds(g, default_simplification())
    atoms = tuple(
        replace(
            a,
            charge=None,
            isotope=None,
            valence=None,
            radical=None,
            hydrogens=None,
            aromatic=False,
            parity=None,
        )
        for a in simplified.atoms
    )
    bonds = tuple(replace(b, direction=None) for b in simplified.bonds)
    return MolGraph(atoms, bonds, ())


def fold_deuterium(g: MolGraph) -> MolGraph:
    """Optional normalization: rewrite drawn-D labels as hydrogen-2 atoms."""
    atoms = []
    for a in g.atoms:
        if a.label.kind is LabelKind.DEUTERIUM:
            atoms.append(replace(a, label=AtomLabel.element("H"), isotope=2))
        else:
            atoms.append(a)
    return MolGraph(tuple(atoms), g.bonds, g.brackets)


# ---------------------------------------------------------------------------
# Exhaustive isomorphism oracle
# ---------------------------------------------------------------------------

BRUTE_FORCE_MAX_ATOMS = 10


@dataclass(frozen=True)
class AttributeComparison:
    """Which attributes an isomorphism must preserve.

    ``valence`` follows the one-sided-absence rule: compared only when both
    atoms carry it. ``hydrogens`` treats an absent count as compatible with
    anything.
    """

    charge: bool = True
    isotope: bool = True
    valence: bool = True
    radical: bool = True
    hydrogens: bool = False
    aromatic_flag: bool = False
    bond_types: bool = True
    bond_orientation: bool = True
    brackets: bool = True


def _oracle_atoms_equal(x: Atom, y: Atom, cmp: AttributeComparison) -> bool:
    if x.label != y.label:
        return False
    if cmp.charge and _charge_key(x.charge) != _charge_key(y.charge):
        return False
    if cmp.isotope and x.isotope != y.isotope:
        return False
    if cmp.radical and x.radical != y.radical:
        return False
    if cmp.valence and x.valence is not None and y.valence is not None and x.valence != y.valence:
        return False
    if cmp.hydrogens and x.hydrogens is not None and y.hydrogens is not None:
        if x.hydrogens != y.hydrogens:
            return False
    if cmp.aromatic_flag and x.aromatic != y.aromatic:
        return False
    return True


def collapse_mark(mark: str) -> str:
    """Bracket-mark comparison key: all whitespace removed, case preserved."""
    return "".join(mark.split())


def _oracle_brackets_match(a: MolGraph, b: MolGraph, mapping: dict[int, int]) -> bool:
    mapped = sorted(
        (tuple(sorted(mapping[x] for x in br.atoms)), collapse_mark(br.mark))
        for br in a.brackets
    )
    target = sorted(
        (tuple(sorted(br.atoms)), collapse_mark(br.mark)) for br in b.brackets
    )
    return mapped == target


def brute_force_isomorphic(
    a: MolGraph,
    b: MolGraph,
    compare: AttributeComparison = AttributeComparison(),
) -> Optional[dict[int, int]]:
    """Exhaustively search for an attributed isomorphism from ``a`` onto ``b``.

    Complete: enumerates every atom bijection (with early rejection of
    assignments that already violate an atom or bond constraint), so a
    ``None`` result proves no witness exists. Guarded at
    :data:`BRUTE_FORCE_MAX_ATOMS` atoms; larger inputs are refused.
    """
    if len(a.atoms) > BRUTE_FORCE_MAX_ATOMS or len(b.atoms) > BRUTE_FORCE_MAX_ATOMS:
        raise SizeGuardExceeded(
            f"brute-force oracle refuses graphs above {BRUTE_FORCE_MAX_ATOMS} atoms"
        )
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return None
    if compare.brackets and len(a.brackets) != len(b.brackets):
        return None

    a_atoms = list(a.atoms)
    b_atoms = list(b.atoms)
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def bonds_agree(ai: Atom, bj: Atom) -> bool:
        for prev_a, prev_b in mapping.items():
            bond_a = a.bond_between(ai.id, prev_a)
            bond_b = b.bond_between(bj.id, prev_b)
            if (bond_a is None) != (bond_b is None):
                return False
            if bond_a is None or bond_b is None:
                continue
            if compare.bond_types and bond_a.bond_type is not bond_b.bond_type:
                return False
            if (
                compare.bond_orientation
                and bond_a.bond_type.is_directional
                and (bond_a.atom1 == ai.id) != (bond_b.atom1 == bj.id)
            ):
                return False
        return True

    def assign(pos: int) -> Optional[dict[int, int]]:
        if pos == len(a_atoms):
            if compare.brackets and not _oracle_brackets_match(a, b, mapping):
                return None
            return dict(mapping)
        ai = a_atoms[pos]
        for bj in b_atoms:
            if bj.id in used:
                continue
            if not _oracle_atoms_equal(ai, bj, compare):
                continue
            if not bonds_agree(ai, bj):
                continue
            mapping[ai.id] = bj.id
            used.add(bj.id)
            found = assign(pos + 1)
            if found is not None:
                return found
            del mapping[ai.id]
            used.discard(bj.id)
        return None

    return assign(0)


AtomPredicate = Callable[[Atom], bool]
