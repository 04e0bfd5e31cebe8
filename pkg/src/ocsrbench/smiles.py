"""
SMILES subset parser and canonical emitter.

The subset covers organic-subset atoms with standard-valence implicit
hydrogens, bracket atoms (isotope, tetrahedral parity, hydrogen count,
charge), abbreviation tokens treated as single units (``[MeO]``, ``[Ph]``),
aromatic lowercase atoms, ring closures (including ``%nn``), branches,
directional ``/`` ``\\`` bond marks, and fragment dots.

Implicit hydrogens live on atoms as counts, never as explicit atoms;
explicit ``[H]`` leaf atoms are folded into their neighbor's count at parse
time so hydrogen totals compare uniformly.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graphops import canonical_ranking
from .molgraph import (
    Atom,
    AtomLabel,
    AtomParity,
    Bond,
    BondDir,
    BondType,
    IMPLICIT_H,
    LabelKind,
    MolGraph,
    PERIODIC_SYMBOLS,
    ParitySign,
    require_valid,
)


class SmilesParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class NotSmilesExpressibleError(ValueError):
    """The graph carries content the SMILES subset cannot encode."""

    def __init__(self, feature: str):
        super().__init__(f"not SMILES-expressible: {feature}")
        self.feature = feature


ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
AROMATIC_CAPABLE = frozenset({"B", "C", "N", "O", "P", "S"})

#: Standard valences used for implicit hydrogen counts.
STANDARD_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

_BOND_SYMBOLS: dict[str, tuple[BondType, Optional[BondDir]]] = {
    "-": (BondType.SINGLE, None),
    "=": (BondType.DOUBLE, None),
    "#": (BondType.TRIPLE, None),
    ":": (BondType.AROMATIC, None),
    "/": (BondType.SINGLE, BondDir.UP),
    "\\": (BondType.SINGLE, BondDir.DOWN),
}

_SYMBOL_FOR_ORDER = {
    BondType.DOUBLE: "=",
    BondType.TRIPLE: "#",
}

_BRACKET_ATOM_RE = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<symbol>[A-Z][a-z]?|[bcnops])"
    r"(?P<stereo>@@|@)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\d+|-\d+|\++|-+)?$"
)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@dataclass
class _PendingAtom:
    """Mutable atom state while parsing; frozen into Atom afterwards."""

    id: int
    label: AtomLabel
    aromatic: bool = False
    isotope: Optional[int] = None
    charge: Optional[Fraction] = None
    hcount: Optional[int] = None  # None = compute implicit (bare organic atom)
    stereo: Optional[ParitySign] = None

    def __post_init__(self):
        self.order: list = []  # neighbor encounter order (ids / sentinels)


@dataclass
class _RingSlot:
    atom: int
    symbol: Optional[tuple[BondType, Optional[BondDir]]]
    placeholder: object
    position: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list[_PendingAtom] = []
        self.bonds: list[Bond] = []
        self.prev: Optional[int] = None
        self.pending: Optional[tuple[BondType, Optional[BondDir]]] = None
        self.stack: list[int] = []
        self.rings: dict[str, _RingSlot] = {}

    def error(self, message: str) -> SmilesParseError:
        return SmilesParseError(message, self.pos)

    # -- atom handling -------------------------------------------------------

    def add_atom(self, atom: _PendingAtom) -> None:
        self.atoms.append(atom)
        if self.prev is not None:
            self.make_bond(self.prev, atom.id, self.pending)
            self.pending = None
        elif self.pending is not None:
            raise self.error("bond symbol with no preceding atom")
        # The implicit-H slot for a parity marker sits right after the
        # incoming atom (or first, at the start of a fragment).
        if atom.stereo is not None and (atom.hcount or 0) >= 1:
            atom.order.append(IMPLICIT_H)
        self.prev = atom.id

    def make_bond(
        self,
        a: int,
        b: int,
        symbol: Optional[tuple[BondType, Optional[BondDir]]],
        *,
        ring_placeholder: object = None,
    ) -> None:
        if symbol is None:
            if self.atoms[a].aromatic and self.atoms[b].aromatic:
                bond_type, direction = BondType.AROMATIC, None
            else:
                bond_type, direction = BondType.SINGLE, None
        else:
            bond_type, direction = symbol
        self.bonds.append(Bond(a, b, bond_type, direction))
        if ring_placeholder is not None:
            slot_order = self.atoms[a].order
            slot_order[slot_order.index(ring_placeholder)] = b
        else:
            self.atoms[a].order.append(b)
        self.atoms[b].order.append(a)

    # -- token scanning ------------------------------------------------------

    def parse(self) -> None:
        text = self.text
        if not text:
            raise self.error("empty SMILES")
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                raise self.error("unexpected whitespace")
            if ch == "(":
                if self.prev is None:
                    raise self.error("branch with no preceding atom")
                if self.pending is not None:
                    raise self.error("bond symbol before branch open")
                self.stack.append(self.prev)
                self.pos += 1
            elif ch == ")":
                if not self.stack:
                    raise self.error("unbalanced branch close")
                if self.pending is not None:
                    raise self.error("dangling bond symbol before branch close")
                self.prev = self.stack.pop()
                self.pos += 1
            elif ch == ".":
                if self.pending is not None:
                    raise self.error("bond symbol before fragment dot")
                if self.stack:
                    raise self.error("fragment dot inside branch")
                self.prev = None
                self.pos += 1
            elif ch in _BOND_SYMBOLS:
                if self.pending is not None:
                    raise self.error("two bond symbols in a row")
                if self.prev is None:
                    raise self.error("bond symbol with no preceding atom")
                self.pending = _BOND_SYMBOLS[ch]
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                self.ring_closure()
            elif ch == "[":
                self.bracket_atom()
            else:
                self.bare_atom()
        if self.pending is not None:
            raise self.error("dangling bond symbol at end of input")
        if self.stack:
            raise self.error("unclosed branch")
        if self.rings:
            digits = ", ".join(sorted(self.rings))
            raise self.error(f"unclosed ring bond {digits}")

    def ring_closure(self) -> None:
        text = self.text
        if self.prev is None:
            raise self.error("ring closure with no preceding atom")
        if text[self.pos] == "%":
            if self.pos + 2 >= len(text) or not text[self.pos + 1 : self.pos + 3].isdigit():
                raise self.error("'%' ring closure needs two digits")
            digit = text[self.pos + 1 : self.pos + 3]
            self.pos += 3
        else:
            digit = text[self.pos]
            self.pos += 1
        symbol = self.pending
        self.pending = None
        slot = self.rings.pop(digit, None)
        if slot is None:
            placeholder = object()
            self.atoms[self.prev].order.append(placeholder)
            self.rings[digit] = _RingSlot(self.prev, symbol, placeholder, self.pos)
            return
        if slot.atom == self.prev:
            raise self.error(f"ring bond {digit} closes on its own atom")
        resolved = self.resolve_ring_symbol(slot.symbol, symbol, digit)
        self.make_bond(slot.atom, self.prev, resolved, ring_placeholder=slot.placeholder)

    def resolve_ring_symbol(
        self,
        open_symbol: Optional[tuple[BondType, Optional[BondDir]]],
        close_symbol: Optional[tuple[BondType, Optional[BondDir]]],
        digit: str,
    ) -> Optional[tuple[BondType, Optional[BondDir]]]:
        # Close-side symbols are written from the closing atom's viewpoint:
        # flip directional marks into the opening atom's orientation.
        if close_symbol is not None and close_symbol[1] is not None:
            close_symbol = (close_symbol[0], close_symbol[1].flipped())
        if open_symbol is None:
            return close_symbol
        if close_symbol is None:
            return open_symbol
        if open_symbol != close_symbol:
            raise self.error(f"conflicting bond symbols on ring bond {digit}")
        return open_symbol

    def bare_atom(self) -> None:
        text = self.text
        for sym in ORGANIC_SUBSET:
            if text.startswith(sym, self.pos):
                atom = _PendingAtom(id=len(self.atoms), label=AtomLabel.element(sym))
                self.pos += len(sym)
                self.add_atom(atom)
                return
        ch = text[self.pos]
        if ch in AROMATIC_ORGANIC:
            atom = _PendingAtom(
                id=len(self.atoms), label=AtomLabel.element(ch.upper()), aromatic=True
            )
            self.pos += 1
            self.add_atom(atom)
            return
        if ch == "*":
            atom = _PendingAtom(id=len(self.atoms), label=AtomLabel.wildcard(), hcount=0)
            self.pos += 1
            self.add_atom(atom)
            return
        raise self.error(f"unexpected character {ch!r}")

    def bracket_atom(self) -> None:
        end = self.text.find("]", self.pos)
        if end == -1:
            raise self.error("unterminated bracket atom")
        content = self.text[self.pos + 1 : end]
        if not content:
            raise self.error("empty bracket atom")
        atom = self.decode_bracket(content)
        self.pos = end + 1
        self.add_atom(atom)

    def decode_bracket(self, content: str) -> _PendingAtom:
        new_id = len(self.atoms)
        if content == "D":
            return _PendingAtom(id=new_id, label=AtomLabel.deuterium(), hcount=0)
        if content == "*":
            return _PendingAtom(id=new_id, label=AtomLabel.wildcard(), hcount=0)
        match = _BRACKET_ATOM_RE.match(content)
        if match:
            symbol = match.group("symbol")
            aromatic = symbol.islower()
            element = symbol.capitalize() if aromatic else symbol
            if element in PERIODIC_SYMBOLS and (not aromatic or element in AROMATIC_CAPABLE):
                isotope = int(match.group("isotope")) if match.group("isotope") else None
                stereo = None
                if match.group("stereo"):
                    stereo = ParitySign.CW if match.group("stereo") == "@@" else ParitySign.CCW
                hcount = 0
                if match.group("hcount"):
                    digits = match.group("hcount")[1:]
                    hcount = int(digits) if digits else 1
                charge = self.decode_charge(match.group("charge"))
                return _PendingAtom(
                    id=new_id,
                    label=AtomLabel.element(element),
                    aromatic=aromatic,
                    isotope=isotope,
                    charge=charge,
                    hcount=hcount,
                    stereo=stereo,
                )
        # Anything that is not element-plus-modifiers is an abbreviation
        # drawn as a single unit; its text is semantic.
        stripped = content.strip()
        if not stripped or any(c.isspace() for c in stripped) or "[" in stripped:
            raise self.error(f"malformed bracket atom [{content}]")
        return _PendingAtom(id=new_id, label=AtomLabel.superatom(stripped), hcount=None)

    @staticmethod
    def decode_charge(raw: Optional[str]) -> Optional[Fraction]:
        if not raw:
            return None
        if raw[1:].isdigit():
            magnitude = int(raw[1:])
        else:
            magnitude = len(raw)
        charge = Fraction(magnitude if raw[0] == "+" else -magnitude)
        return charge if charge != 0 else None


def _bond_order_sum(g_bonds, atom_id: int, aromatic_atom: bool) -> float:
    total = 0.0
    for b in g_bonds:
        if atom_id not in (b.atom1, b.atom2):
            continue
        if b.bond_type is BondType.SINGLE:
            total += 1
        elif b.bond_type is BondType.DOUBLE:
            total += 2
        elif b.bond_type is BondType.TRIPLE:
            total += 3
        elif b.bond_type is BondType.AROMATIC:
            total += 1 if aromatic_atom else 1.5
    return total


def implicit_hydrogens(symbol: str, bond_order_sum: float, aromatic: bool) -> int:
    """Hydrogen count a bare organic-subset atom gets from standard valence."""
    valences = STANDARD_VALENCES.get(symbol)
    if valences is None:
        return 0
    needed = math.ceil(bond_order_sum) + (1 if aromatic else 0)
    for v in valences:
        if v >= needed:
            return v - needed
    return 0


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a :class:`MolGraph`.

    Raises :class:`SmilesParseError` with the offending position for
    malformed input (including unclosed rings and unbalanced branches).
    """
    parser = _Parser(text.strip() if text else "")
    parser.parse()

    atoms = parser.atoms
    bonds = parser.bonds

    # Implicit hydrogens for bare organic-subset atoms.
    for atom in atoms:
        if atom.hcount is None and atom.label.kind is LabelKind.ELEMENT:
            total = _bond_order_sum(bonds, atom.id, atom.aromatic)
            atom.hcount = implicit_hydrogens(atom.label.text, total, atom.aromatic)

    # Fold explicit [H] leaf atoms into the neighbor's hydrogen count.
    folded: set[int] = set()
    for atom in atoms:
        if (
            atom.label.kind is LabelKind.ELEMENT
            and atom.label.text == "H"
            and atom.isotope is None
            and atom.charge is None
            and atom.stereo is None
        ):
            incident = [b for b in bonds if atom.id in (b.atom1, b.atom2)]
            if len(incident) != 1:
                continue
            bond = incident[0]
            if bond.bond_type is not BondType.SINGLE or bond.direction is not None:
                continue
            partner = atoms[bond.other(atom.id)]
            if partner.label.kind is LabelKind.ELEMENT and partner.label.text == "H":
                continue
            folded.add(atom.id)
            partner.hcount = (partner.hcount or 0) + 1
            for other in atoms:
                other.order = [
                    IMPLICIT_H if entry == atom.id else entry for entry in other.order
                ]

    surviving = [a for a in atoms if a.id not in folded]
    new_ids = {a.id: i for i, a in enumerate(surviving)}

    def map_entry(entry):
        return IMPLICIT_H if entry == IMPLICIT_H else new_ids[entry]

    final_atoms = []
    for atom in surviving:
        parity = None
        if atom.stereo is not None:
            parity = AtomParity(atom.stereo, tuple(map_entry(e) for e in atom.order))
        final_atoms.append(
            Atom(
                id=new_ids[atom.id],
                label=atom.label,
                charge=atom.charge,
                isotope=atom.isotope,
                hydrogens=atom.hcount,
                aromatic=atom.aromatic,
                parity=parity,
            )
        )
    final_bonds = [
        Bond(new_ids[b.atom1], new_ids[b.atom2], b.bond_type, b.direction)
        for b in bonds
        if b.atom1 not in folded and b.atom2 not in folded
    ]
    return MolGraph(final_atoms, final_bonds)


# ---------------------------------------------------------------------------
# Canonical emission
# ---------------------------------------------------------------------------

_SMILES_BOND_TYPES = frozenset(
    {BondType.SINGLE, BondType.DOUBLE, BondType.TRIPLE, BondType.AROMATIC}
)
_SMILES_LABEL_KINDS = frozenset(
    {LabelKind.ELEMENT, LabelKind.SUPERATOM, LabelKind.DEUTERIUM}
)


def _check_expressible(g: MolGraph) -> None:
    for b in g.bonds:
        if b.bond_type not in _SMILES_BOND_TYPES:
            raise NotSmilesExpressibleError(b.bond_type.value)
    if g.brackets:
        raise NotSmilesExpressibleError("bracket")
    for a in g.atoms:
        if a.label.kind not in _SMILES_LABEL_KINDS:
            raise NotSmilesExpressibleError(f"{a.label.kind.value} label")
        if a.radical is not None:
            raise NotSmilesExpressibleError("radical")
        if a.valence is not None:
            raise NotSmilesExpressibleError("explicit valence")
        if a.charge is not None and a.charge.denominator != 1:
            raise NotSmilesExpressibleError("non-integer charge")
        if a.label.kind is not LabelKind.ELEMENT:
            # Abbreviation and deuterium tokens have no room for modifiers.
            what = a.label.kind.value
            if a.isotope is not None:
                raise NotSmilesExpressibleError(f"isotope on {what} label")
            if a.charge is not None and a.charge != 0:
                raise NotSmilesExpressibleError(f"charge on {what} label")
            if a.parity is not None:
                raise NotSmilesExpressibleError(f"parity on {what} label")
            if a.hydrogens:
                raise NotSmilesExpressibleError(f"hydrogen count on {what} label")
        if a.aromatic and (
            a.label.kind is not LabelKind.ELEMENT or a.label.text not in AROMATIC_CAPABLE
        ):
            raise NotSmilesExpressibleError("aromatic flag outside B/C/N/O/P/S")


def _needs_bracket(atom: Atom, default_h: int) -> bool:
    if atom.label.kind is not LabelKind.ELEMENT:
        return True
    if atom.label.text not in STANDARD_VALENCES:
        return True
    if atom.isotope is not None or atom.parity is not None:
        return True
    if atom.charge is not None and atom.charge != 0:
        return True
    if atom.hydrogens is not None and atom.hydrogens != default_h:
        return True
    return False


def _atom_token(atom: Atom, default_h: int, out_sign: Optional[ParitySign]) -> str:
    if atom.label.kind is LabelKind.SUPERATOM:
        return f"[{atom.label.text}]"
    if atom.label.kind is LabelKind.DEUTERIUM:
        return "[D]"
    symbol = atom.label.text
    shown = symbol.lower() if atom.aromatic else symbol
    if not _needs_bracket(atom, default_h):
        return shown
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(shown)
    if out_sign is not None:
        parts.append(out_sign.value)
    hydrogens = atom.hydrogens or 0
    if hydrogens == 1:
        parts.append("H")
    elif hydrogens > 1:
        parts.append(f"H{hydrogens}")
    if atom.charge is not None and atom.charge != 0:
        value = int(atom.charge)
        if value == 1:
            parts.append("+")
        elif value == -1:
            parts.append("-")
        elif value > 0:
            parts.append(f"+{value}")
        else:
            parts.append(str(value))
    parts.append("]")
    return "".join(parts)


def permutation_parity(source: list[int], target: list[int]) -> Optional[int]:
    """+1 for an even permutation source->target, -1 for odd, None when the
    sequences are not rearrangements of each other or contain duplicates."""
    if len(source) != len(target) or sorted(source) != sorted(target):
        return None
    if len(set(source)) != len(source):
        return None
    index = {v: i for i, v in enumerate(target)}
    perm = [index[v] for v in source]
    parity = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        cycle = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            parity = -parity
    return parity


def _with_reparse_hydrogens(g: MolGraph) -> MolGraph:
    """Fill absent hydrogen counts with the values a re-parse would assign.

    Ranking must not distinguish a graph from its own emit/parse image, so
    the ranking runs on this filled graph while emission walks the original.
    """
    from dataclasses import replace

    atoms = []
    for a in g.atoms:
        h = a.hydrogens
        if h is None:
            if a.label.kind is LabelKind.ELEMENT and a.label.text in STANDARD_VALENCES:
                h = implicit_hydrogens(
                    a.label.text, _bond_order_sum(g.bonds, a.id, a.aromatic), a.aromatic
                )
            elif a.label.kind is LabelKind.SUPERATOM:
                h = None  # superatoms re-parse without a count
            else:
                h = 0  # bracket tokens re-parse with an explicit 0
        atoms.append(replace(a, hydrogens=h))
    return MolGraph(atoms, g.bonds, g.brackets)


def emit_canonical_smiles(g: MolGraph) -> str:
    """Emit a deterministic SMILES string that re-parses isomorphic to ``g``.

    Refuses (:class:`NotSmilesExpressibleError`) graphs with bond types
    outside single/double/triple/aromatic, brackets, placeholder or wildcard
    labels, radicals, explicit valences, or non-integer charges. The empty
    graph emits the empty string.
    """
    require_valid(g, "emit_canonical_smiles")
    if not g.atoms:
        return ""
    _check_expressible(g)

    ranking = canonical_ranking(_with_reparse_hydrogens(g))
    visited: set[int] = set()
    fragments: list[str] = []
    for atom in sorted(g.atoms, key=lambda a: ranking[a.id]):
        if atom.id in visited:
            continue
        fragments.append(_emit_fragment(g, atom.id, ranking, visited))
    return ".".join(fragments)


def _emit_fragment(
    g: MolGraph, root: int, ranking: dict[int, int], visited: set[int]
) -> str:
    # Pass 1: DFS tree and ring (back) edges, neighbors in rank order.
    tree: dict[int, list[int]] = {}
    rings_at: dict[int, list[tuple[int, frozenset[int]]]] = {}
    ring_edges: set[frozenset[int]] = set()

    def explore(atom_id: int, from_id: Optional[int]) -> None:
        visited.add(atom_id)
        tree[atom_id] = []
        rings_at.setdefault(atom_id, [])
        for nbr in sorted(g.neighbors(atom_id), key=lambda n: ranking[n]):
            if nbr == from_id:
                continue
            edge = frozenset((atom_id, nbr))
            if nbr in visited:
                if edge not in ring_edges:
                    ring_edges.add(edge)
                    rings_at.setdefault(nbr, []).append((atom_id, edge))
                    rings_at[atom_id].append((nbr, edge))
                continue
            tree[atom_id].append(nbr)
            explore(nbr, atom_id)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(g.atoms) * 8 + 200))
    try:
        explore(root, None)

        # Pass 2: emit; ring digits assigned at first print, freed on close.
        digit_for_edge: dict[frozenset[int], str] = {}
        open_edges: set[frozenset[int]] = set()
        in_use: set[str] = set()

        def next_digit() -> str:
            for d in range(1, 100):
                token = str(d) if d < 10 else f"%{d}"
                if token not in in_use:
                    in_use.add(token)
                    return token
            raise NotSmilesExpressibleError("more than 99 simultaneous ring bonds")

        def bond_token(a: int, b: int) -> str:
            bond = g.bond_between(a, b)
            atom_a, atom_b = g.atom(a), g.atom(b)
            if bond.direction is not None:
                mark = bond.direction if bond.atom1 == a else bond.direction.flipped()
                return mark.value
            both_aromatic = atom_a.aromatic and atom_b.aromatic
            if bond.bond_type is BondType.SINGLE:
                return "-" if both_aromatic else ""
            if bond.bond_type is BondType.AROMATIC:
                return "" if both_aromatic else ":"
            return _SYMBOL_FOR_ORDER[bond.bond_type]

        def emit_atom(atom_id: int, from_id: Optional[int]) -> str:
            atom = g.atom(atom_id)
            ring_list = rings_at.get(atom_id, [])
            children = tree.get(atom_id, [])

            out_order: list[int] = []
            if from_id is not None:
                out_order.append(from_id)
            if atom.parity is not None and (atom.hydrogens or 0) >= 1:
                out_order.append(IMPLICIT_H)
            out_order.extend(partner for partner, _ in ring_list)
            out_order.extend(children)

            out_sign: Optional[ParitySign] = None
            if atom.parity is not None:
                parity = permutation_parity(list(atom.parity.neighbors), out_order)
                if parity is not None:
                    out_sign = atom.parity.sign if parity == 1 else atom.parity.sign.flipped()

            order_sum = _bond_order_sum(g.bonds, atom_id, atom.aromatic)
            default_h = (
                implicit_hydrogens(atom.label.text, order_sum, atom.aromatic)
                if atom.label.kind is LabelKind.ELEMENT
                else 0
            )
            pieces = [_atom_token(atom, default_h, out_sign)]
            for partner, edge in ring_list:
                if edge in open_edges:
                    open_edges.discard(edge)
                    digit = digit_for_edge[edge]
                    in_use.discard(digit)
                    pieces.append(digit)
                else:
                    digit = next_digit()
                    digit_for_edge[edge] = digit
                    open_edges.add(edge)
                    pieces.append(bond_token(atom_id, partner) + digit)
            for i, child in enumerate(children):
                sub = bond_token(atom_id, child) + emit_atom(child, atom_id)
                pieces.append(f"({sub})" if i < len(children) - 1 else sub)
            return "".join(pieces)

        return emit_atom(root, None)
    finally:
        sys.setrecursionlimit(limit)
