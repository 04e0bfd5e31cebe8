"""
The three evaluation verdicts: Graph exact match, Simplified Graph match,
and SMILES semantic equivalence.

Graph equality is attributed isomorphism (never coordinate alignment);
coordinates only feed a closest-atom diagnostic on mismatches. The search
is refinement-pruned backtracking seeded by canonical ranking, and its
verdicts are cross-checked in the test suite against the exhaustive oracle
in :mod:`ocsrbench.graphops`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .graphops import canonical_ranking, normalize_placeholder_labels, project_simplified
from .molgraph import (
    Atom,
    AtomParity,
    Bond,
    BondDir,
    BondType,
    ContractViolation,
    IMPLICIT_H,
    LabelKind,
    MolGraph,
    ParitySign,
    require_valid,
)
from .rings import smallest_rings
from .smiles import SmilesParseError, parse_smiles, permutation_parity

# Mismatch reason vocabulary (appears verbatim in report rows).
REASON_PARSE_FAILED = "parse-failed"
REASON_ATOM_SET = "atom-set-mismatch"
REASON_BOND = "bond-mismatch"
REASON_ATTRIBUTE = "attribute-mismatch"
REASON_BRACKET = "bracket-mismatch"
REASON_STEREO = "stereo-mismatch"
REASON_NO_ISOMORPHISM = "no-isomorphism"

MISMATCH_REASONS = (
    REASON_PARSE_FAILED,
    REASON_ATOM_SET,
    REASON_BOND,
    REASON_ATTRIBUTE,
    REASON_BRACKET,
    REASON_STEREO,
    REASON_NO_ISOMORPHISM,
)


@dataclass(frozen=True)
class MatchConfig:
    """Knobs for the three protocols; defaults match the benchmark's intent."""

    compare_stereo: bool = True
    aromatic_normalize_smiles: bool = True
    placeholder_alpha_equivalence: bool = True
    simplification: Optional[dict[BondType, BondType]] = field(default=None)

    @staticmethod
    def from_json(data: dict) -> "MatchConfig":
        mapping = None
        if data.get("simplification"):
            mapping = {
                BondType.parse(k): BondType.parse(v)
                for k, v in data["simplification"].items()
            }
        return MatchConfig(
            compare_stereo=bool(data.get("compare_stereo", True)),
            aromatic_normalize_smiles=bool(data.get("aromatic_normalize_smiles", True)),
            placeholder_alpha_equivalence=bool(
                data.get("placeholder_alpha_equivalence", True)
            ),
            simplification=mapping,
        )

    def to_json(self) -> dict:
        return {
            "compare_stereo": self.compare_stereo,
            "aromatic_normalize_smiles": self.aromatic_normalize_smiles,
            "placeholder_alpha_equivalence": self.placeholder_alpha_equivalence,
            "simplification": (
                {k.value: v.value for k, v in self.simplification.items()}
                if self.simplification
                else None
            ),
        }


@dataclass(frozen=True)
class MatchOutcome:
    matched: bool
    reason: Optional[str] = None
    witness: Optional[dict[int, int]] = None
    diagnostic: Optional[str] = None

    def to_json(self) -> dict:
        out: dict = {"matched": self.matched}
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = {str(k): v for k, v in sorted(self.witness.items())}
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


# ---------------------------------------------------------------------------
# Comparison keys
# ---------------------------------------------------------------------------


def _charge_key(charge: Optional[Fraction]) -> str:
    return "" if charge is None or charge == 0 else str(charge)


def _graph_atom_key(a: Atom) -> tuple:
    return (
        a.label.kind.value,
        a.label.text,
        _charge_key(a.charge),
        a.isotope or 0,
        int(a.radical) if a.radical else 0,
    )


def _smiles_atom_key(a: Atom) -> tuple:
    return (
        a.label.kind.value,
        a.label.text.strip() if a.label.kind is LabelKind.SUPERATOM else a.label.text,
        _charge_key(a.charge),
        a.isotope or 0,
        -1 if a.hydrogens is None else a.hydrogens,
        int(a.aromatic),
    )


def _valence_compatible(a: Atom, b: Atom) -> bool:
    # Rarely drawn: compared only when present on both sides.
    if a.valence is None or b.valence is None:
        return True
    return a.valence == b.valence


def _graph_bond_key(b: Bond, from_atom: int) -> tuple:
    role = ""
    if b.bond_type.is_directional:
        role = "s" if b.atom1 == from_atom else "t"
    return (b.bond_type.value, role)


def _smiles_bond_key(b: Bond, from_atom: int) -> tuple:
    return (b.bond_type.value,)


def _collapse(mark: str) -> str:
    return "".join(mark.split())


# ---------------------------------------------------------------------------
# Refinement-pruned backtracking search
# ---------------------------------------------------------------------------


class _SharedIntern:
    """A signature interner shared by two graphs so values are comparable."""

    def __init__(self):
        self.table: dict[tuple, int] = {}

    def refine(
        self,
        g: MolGraph,
        atom_key: Callable[[Atom], tuple],
        bond_key: Callable[[Bond, int], tuple],
        rounds: int,
    ) -> dict[int, int]:
        def intern(sig: tuple) -> int:
            if sig not in self.table:
                self.table[sig] = len(self.table)
            return self.table[sig]

        bonds_at: dict[int, list[Bond]] = {a.id: [] for a in g.atoms}
        for b in g.bonds:
            bonds_at[b.atom1].append(b)
            bonds_at[b.atom2].append(b)
        sig = {a.id: intern(("seed", atom_key(a), len(bonds_at[a.id]))) for a in g.atoms}
        for _ in range(rounds):
            sig = {
                a.id: intern(
                    (
                        "refine",
                        sig[a.id],
                        tuple(
                            sorted(
                                (bond_key(b, a.id), sig[b.other(a.id)])
                                for b in bonds_at[a.id]
                            )
                        ),
                    )
                )
                for a in g.atoms
            }
        return sig


def _search_order(g: MolGraph) -> list[int]:
    """Atom visit order: canonical-rank seeds, then grow along adjacency."""
    if not g.atoms:
        return []
    ranking = canonical_ranking(g)
    remaining = set(g.atom_ids)
    order: list[int] = []
    frontier: set[int] = set()
    while remaining:
        if frontier:
            pick = min(frontier, key=lambda x: ranking[x])
        else:
            pick = min(remaining, key=lambda x: ranking[x])
        order.append(pick)
        remaining.discard(pick)
        frontier.discard(pick)
        frontier.update(n for n in g.neighbors(pick) if n in remaining)
    return order


def _find_isomorphism(
    a: MolGraph,
    b: MolGraph,
    atom_key: Callable[[Atom], tuple],
    bond_key: Callable[[Bond, int], tuple],
    atom_extra: Callable[[Atom, Atom], bool],
    leaf_check: Callable[[dict[int, int]], bool],
) -> tuple[bool, Optional[dict[int, int]]]:
    """Search for a bijection preserving atom keys and bond keys.

    Returns ``(structural_witness_exists, witness_passing_leaf_check)``.
    The search enumerates structural witnesses until one satisfies
    ``leaf_check`` (brackets or stereo), so a shared-skeleton pair with an
    alternate automorphism still matches.
    """
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False, None

    rounds = max(4, len(a.atoms))
    intern = _SharedIntern()
    sig_a = intern.refine(a, atom_key, bond_key, rounds)
    sig_b = intern.refine(b, atom_key, bond_key, rounds)

    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False, None

    candidates: dict[int, list[int]] = {}
    by_sig: dict[int, list[int]] = {}
    for atom_id, s in sig_b.items():
        by_sig.setdefault(s, []).append(atom_id)
    for atom_id, s in sig_a.items():
        candidates[atom_id] = sorted(by_sig.get(s, []))
        if not candidates[atom_id]:
            return False, None

    order = _search_order(a)
    mapping: dict[int, int] = {}
    used: set[int] = set()
    structural_found = [False]
    b_adj = {atom_id: set(b.neighbors(atom_id)) for atom_id in b.atom_ids}

    def consistent(p: int, q: int) -> bool:
        pa, qa = a.atom(p), b.atom(q)
        if not atom_extra(pa, qa):
            return False
        mapped_nbrs = 0
        for nbr in a.neighbors(p):
            if nbr not in mapping:
                continue
            mapped_nbrs += 1
            bond_a = a.bond_between(p, nbr)
            bond_b = b.bond_between(q, mapping[nbr])
            if bond_b is None:
                return False
            if bond_key(bond_a, p) != bond_key(bond_b, q):
                return False
        # No extra bonds from q into the mapped image.
        image = used
        q_mapped_degree = sum(1 for n in b_adj[q] if n in image)
        return q_mapped_degree == mapped_nbrs

    result: list[Optional[dict[int, int]]] = [None]

    def assign(depth: int) -> bool:
        if depth == len(order):
            structural_found[0] = True
            if leaf_check(mapping):
                result[0] = dict(mapping)
                return True
            return False
        p = order[depth]
        for q in candidates[p]:
            if q in used:
                continue
            if not consistent(p, q):
                continue
            mapping[p] = q
            used.add(q)
            if assign(depth + 1):
                return True
            del mapping[p]
            used.discard(q)
        return False

    assign(0)
    return structural_found[0], result[0]


# ---------------------------------------------------------------------------
# Bracket and stereo leaf checks
# ---------------------------------------------------------------------------


def _brackets_correspond(a: MolGraph, b: MolGraph, mapping: dict[int, int]) -> bool:
    mapped = sorted(
        (tuple(sorted(mapping[x] for x in br.atoms)), _collapse(br.mark))
        for br in a.brackets
    )
    target = sorted((tuple(sorted(br.atoms)), _collapse(br.mark)) for br in b.brackets)
    return mapped == target


class StereoValidationError(ValueError):
    pass


def _effective_parity(atom: Atom) -> Optional[AtomParity]:
    """Parity usable for comparison; degenerate markers behave as absent."""
    p = atom.parity
    if p is None:
        return None
    slots = list(p.neighbors)
    if len(slots) < 3 or len(set(slots)) != len(slots):
        return None
    return p


def stereo_parity_signature(
    g: MolGraph, reference: MolGraph, mapping: dict[int, int]
) -> dict[int, ParitySign]:
    """Express each marked atom's parity in the reference's neighbor frame.

    For atom ``p`` the signature is ``p``'s sign composed with the parity of
    the permutation taking ``p``'s recorded neighbor order (mapped through
    ``mapping``) to the reference atom's recorded order. Two molecules
    stereo-agree when every signature equals the reference atom's own sign
    and directional double-bond configurations also agree
    (see :func:`stereo_agreement`).

    Raises :class:`StereoValidationError` for a marker on an atom with fewer
    than three distinct neighbor slots.
    """
    out: dict[int, ParitySign] = {}
    for atom in g.atoms:
        if atom.parity is None:
            continue
        slots = list(atom.parity.neighbors)
        if len(slots) < 3 or len(set(slots)) != len(slots):
            raise StereoValidationError(
                f"stereo marker on atom {atom.id} with fewer than 3 distinct neighbors"
            )
        ref_atom = reference.atom(mapping[atom.id])
        if ref_atom.parity is None:
            continue
        mapped = [IMPLICIT_H if s == IMPLICIT_H else mapping[s] for s in slots]
        parity = permutation_parity(mapped, list(ref_atom.parity.neighbors))
        if parity is None:
            continue
        out[atom.id] = atom.parity.sign if parity == 1 else atom.parity.sign.flipped()
    return out


def _double_bond_sides(g: MolGraph, u: int, v: int) -> Optional[dict[int, int]]:
    """Side assignment (+1/-1) of u's non-v neighbors, from / and \\ marks."""
    sides: dict[int, int] = {}
    others = [n for n in g.neighbors(u) if n != v]
    for n in others:
        bond = g.bond_between(u, n)
        if bond.direction is None:
            continue
        up = bond.direction is BondDir.UP
        sides[n] = 1 if (bond.atom1 == u) == up else -1
    if not sides:
        return None
    if len(sides) == 2:
        a, b = sides.values()
        if a == b:  # contradictory marks
            return None
    if len(sides) == 1 and len(others) == 2:
        marked = next(iter(sides))
        other = next(n for n in others if n != marked)
        sides[other] = -sides[marked]
    return sides


def _geometry_pairs(g: MolGraph) -> dict[frozenset[int], tuple[int, int, dict, dict]]:
    """Double bonds with defined cis/trans geometry: endpoints plus side maps."""
    out = {}
    for bond in g.bonds:
        if bond.bond_type is not BondType.DOUBLE:
            continue
        u, v = bond.atom1, bond.atom2
        su = _double_bond_sides(g, u, v)
        sv = _double_bond_sides(g, v, u)
        if su and sv:
            out[frozenset((u, v))] = (u, v, su, sv)
    return out


def _geometry_agrees(pred: MolGraph, gt: MolGraph, mapping: dict[int, int]) -> bool:
    pred_geo = _geometry_pairs(pred)
    gt_geo = _geometry_pairs(gt)
    mapped_keys = {frozenset(mapping[x] for x in key) for key in pred_geo}
    if mapped_keys != set(gt_geo.keys()):
        return False
    for key, (u, v, su, sv) in pred_geo.items():
        gu = mapping[u]
        tu, tv, tsu, tsv = gt_geo[frozenset(mapping[x] for x in key)]
        if tu != gu:
            tsu, tsv = tsv, tsu
        w = min(su)
        x = min(sv)
        mw, mx = mapping[w], mapping[x]
        if mw not in tsu or mx not in tsv:
            return False
        if su[w] * sv[x] != tsu[mw] * tsv[mx]:
            return False
    return True


def stereo_agreement(pred: MolGraph, gt: MolGraph, mapping: dict[int, int]) -> bool:
    """Atom parities and double-bond configurations agree under ``mapping``."""
    pred_centers = {a.id for a in pred.atoms if _effective_parity(a) is not None}
    gt_centers = {a.id for a in gt.atoms if _effective_parity(a) is not None}
    if {mapping[p] for p in pred_centers} != gt_centers:
        return False
    for p in pred_centers:
        atom = pred.atom(p)
        ref = gt.atom(mapping[p])
        parity = permutation_parity(
            [IMPLICIT_H if s == IMPLICIT_H else mapping[s] for s in atom.parity.neighbors],
            list(ref.parity.neighbors),
        )
        if parity is None:
            return False
        composed = atom.parity.sign if parity == 1 else atom.parity.sign.flipped()
        if composed is not ref.parity.sign:
            return False
    return _geometry_agrees(pred, gt, mapping)


# ---------------------------------------------------------------------------
# Mismatch prescreens and diagnostics
# ---------------------------------------------------------------------------


def _multiset(values) -> dict:
    out: dict = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return out


def _closest_atom_report(pred: MolGraph, gt: MolGraph) -> Optional[str]:
    """Coordinate-based hint for mismatches; never part of the verdict."""
    if not pred.atoms or not gt.atoms:
        return None
    if any(a.point_2d is None for a in pred.atoms) or any(
        a.point_2d is None for a in gt.atoms
    ):
        return None
    notes = []
    for atom in pred.atoms:
        px, py = atom.point_2d
        nearest = min(
            gt.atoms, key=lambda g_atom: (g_atom.point_2d[0] - px) ** 2 + (g_atom.point_2d[1] - py) ** 2
        )
        if nearest.label != atom.label:
            notes.append(
                f"atom {atom.id} ({atom.label}) nearest ground-truth atom "
                f"{nearest.id} ({nearest.label})"
            )
        if len(notes) >= 3:
            break
    if not notes:
        return None
    return "closest-atom report: " + "; ".join(notes)


# ---------------------------------------------------------------------------
# Protocol verdicts
# ---------------------------------------------------------------------------


def graph_exact_match(pred: MolGraph, gt: MolGraph, cfg: MatchConfig = MatchConfig()) -> MatchOutcome:
    """Exact structural equality: labels, atom attributes, typed bonds with
    direction, and brackets, under some atom bijection. Coordinates are never
    compared."""
    require_valid(pred, "graph_exact_match(pred)")
    require_valid(gt, "graph_exact_match(gt)")
    if cfg.placeholder_alpha_equivalence:
        pred = normalize_placeholder_labels(pred)
        gt = normalize_placeholder_labels(gt)

    diagnostic = None

    if len(pred.atoms) != len(gt.atoms) or _multiset(
        (a.label.kind, a.label.text) for a in pred.atoms
    ) != _multiset((a.label.kind, a.label.text) for a in gt.atoms):
        diagnostic = _closest_atom_report(pred, gt)
        return MatchOutcome(False, REASON_ATOM_SET, diagnostic=diagnostic)

    if _multiset(map(_graph_atom_key, pred.atoms)) != _multiset(
        map(_graph_atom_key, gt.atoms)
    ):
        return MatchOutcome(False, REASON_ATTRIBUTE)

    def bond_multiset(g: MolGraph) -> dict:
        return _multiset(b.bond_type for b in g.bonds)

    if len(pred.bonds) != len(gt.bonds) or bond_multiset(pred) != bond_multiset(gt):
        return MatchOutcome(False, REASON_BOND)

    def bracket_multiset(g: MolGraph) -> dict:
        return _multiset((_collapse(br.mark), len(br.atoms)) for br in g.brackets)

    if bracket_multiset(pred) != bracket_multiset(gt):
        return MatchOutcome(False, REASON_BRACKET)

    structural, witness = _find_isomorphism(
        pred,
        gt,
        atom_key=_graph_atom_key,
        bond_key=_graph_bond_key,
        atom_extra=_valence_compatible,
        leaf_check=lambda m: _brackets_correspond(pred, gt, m),
    )
    if witness is not None:
        return MatchOutcome(True, witness=witness)
    if structural:
        return MatchOutcome(False, REASON_BRACKET)
    return MatchOutcome(False, REASON_NO_ISOMORPHISM, diagnostic=_closest_atom_report(pred, gt))


def simplified_graph_match(
    pred: MolGraph, gt: MolGraph, cfg: MatchConfig = MatchConfig()
) -> MatchOutcome:
    """Graph match after projecting both sides onto the simplified vocabulary."""
    require_valid(pred, "simplified_graph_match(pred)")
    require_valid(gt, "simplified_graph_match(gt)")
    from .graphops import simplify_bonds

    def project(g: MolGraph) -> MolGraph:
        if cfg.simplification is not None:
            g = simplify_bonds(g, cfg.simplification)
        return project_simplified(g)

    return graph_exact_match(project(pred), project(gt), cfg)


_AROMATIC_CAPABLE_ELEMENTS = frozenset({"C", "N", "O", "S", "B", "P"})


def _ring_alternates(orders: list[BondType]) -> bool:
    """Single/double alternation around the full cycle.

    Bonds already rewritten to aromatic (by an earlier pass over a fused
    neighbor ring) act as wildcards, but at least one concrete bond must
    anchor the phase.
    """
    if not orders or any(
        o not in (BondType.SINGLE, BondType.DOUBLE, BondType.AROMATIC) for o in orders
    ):
        return False
    if all(o is BondType.AROMATIC for o in orders):
        return False
    if len(orders) % 2 != 0:
        return False
    for phase in (0, 1):
        expected = (BondType.DOUBLE, BondType.SINGLE)
        if all(
            o is BondType.AROMATIC or o is expected[(i + phase) % 2]
            for i, o in enumerate(orders)
        ):
            return True
    return False


def aromatic_normalize(g: MolGraph) -> MolGraph:
    """Rewrite alternating single/double rings (size <= 7, aromatic-capable
    atoms) to aromatic bonds with aromatic-flagged atoms.

    Runs to a fixpoint so that in fused systems a ring whose fusion bond was
    aromatized via its neighbor still normalizes. Idempotent; non-ring bonds
    untouched.
    """
    for b in g.bonds:
        if b.bond_type not in (
            BondType.SINGLE,
            BondType.DOUBLE,
            BondType.TRIPLE,
            BondType.AROMATIC,
        ):
            raise ContractViolation(
                f"aromatic_normalize: unexpected bond type {b.bond_type.value}"
            )

    from dataclasses import replace as _replace

    current = g
    for _ in range(len(g.bonds) + 1):
        to_aromatic: set[frozenset[int]] = set()
        flagged: set[int] = set()
        for ring in smallest_rings(current, max_size=7):
            labels_ok = all(
                current.atom(a).label.kind is LabelKind.ELEMENT
                and current.atom(a).label.text in _AROMATIC_CAPABLE_ELEMENTS
                for a in ring
            )
            if not labels_ok:
                continue
            cycle_bonds = [
                current.bond_between(ring[i], ring[(i + 1) % len(ring)])
                for i in range(len(ring))
            ]
            if any(b is None for b in cycle_bonds):
                continue
            if not _ring_alternates([b.bond_type for b in cycle_bonds]):
                continue
            for bond in cycle_bonds:
                if bond.bond_type is not BondType.AROMATIC:
                    to_aromatic.add(bond.pair)
            flagged.update(ring)
        if not to_aromatic and not (flagged - {a.id for a in current.atoms if a.aromatic}):
            break
        bonds = tuple(
            _replace(b, bond_type=BondType.AROMATIC, direction=None)
            if b.pair in to_aromatic
            else b
            for b in current.bonds
        )
        atoms = tuple(
            _replace(a, aromatic=True) if a.id in flagged and not a.aromatic else a
            for a in current.atoms
        )
        current = MolGraph(atoms, bonds, current.brackets)
    return current


def smiles_match(pred: str, gt: str, cfg: MatchConfig = MatchConfig()) -> MatchOutcome:
    """Semantic SMILES equality: attributed isomorphism over heavy atoms.

    Compares hydrogen totals, bond orders, charges, isotopes, and superatom
    texts; with ``compare_stereo`` also tetrahedral parity classes and
    directional double-bond configurations. String differences that describe
    the same molecule match.
    """
    try:
        pred_graph = parse_smiles(pred)
    except SmilesParseError:
        return MatchOutcome(False, REASON_PARSE_FAILED)
    try:
        gt_graph = parse_smiles(gt)
    except SmilesParseError:
        return MatchOutcome(False, REASON_PARSE_FAILED)

    if cfg.aromatic_normalize_smiles:
        pred_graph = aromatic_normalize(pred_graph)
        gt_graph = aromatic_normalize(gt_graph)

    return match_parsed_smiles(pred_graph, gt_graph, cfg)


def match_parsed_smiles(
    pred_graph: MolGraph, gt_graph: MolGraph, cfg: MatchConfig = MatchConfig()
) -> MatchOutcome:
    """SMILES-protocol comparison over already-parsed graphs."""
    if len(pred_graph.atoms) != len(gt_graph.atoms) or _multiset(
        (a.label.kind, a.label.text) for a in pred_graph.atoms
    ) != _multiset((a.label.kind, a.label.text) for a in gt_graph.atoms):
        return MatchOutcome(False, REASON_ATOM_SET)

    if _multiset(map(_smiles_atom_key, pred_graph.atoms)) != _multiset(
        map(_smiles_atom_key, gt_graph.atoms)
    ):
        return MatchOutcome(False, REASON_ATTRIBUTE)

    if len(pred_graph.bonds) != len(gt_graph.bonds) or _multiset(
        b.bond_type for b in pred_graph.bonds
    ) != _multiset(b.bond_type for b in gt_graph.bonds):
        return MatchOutcome(False, REASON_BOND)

    leaf = (
        (lambda m: stereo_agreement(pred_graph, gt_graph, m))
        if cfg.compare_stereo
        else (lambda m: True)
    )
    structural, witness = _find_isomorphism(
        pred_graph,
        gt_graph,
        atom_key=_smiles_atom_key,
        bond_key=_smiles_bond_key,
        atom_extra=lambda a, b: True,
        leaf_check=leaf,
    )
    if witness is not None:
        return MatchOutcome(True, witness=witness)
    if structural:
        return MatchOutcome(False, REASON_STEREO)
    return MatchOutcome(False, REASON_NO_ISOMORPHISM)
