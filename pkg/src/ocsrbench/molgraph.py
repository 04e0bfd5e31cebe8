"""
Attributed molecular graph data model.

The types in this module form the universal in-memory representation that
every other part of the toolkit builds on: atoms with optional attributes
(charge, isotope, valence, radical, 2D position), typed bonds drawn from a
closed 23-value vocabulary, and repeat-group brackets.

All types are immutable after construction and safe to share across threads.
Structural problems are *reported* by :func:`validate_graph`, not raised, so
that noisy model output can be inspected rather than rejected outright.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterable, Optional, Union

# ---------------------------------------------------------------------------
# Label vocabulary
# ---------------------------------------------------------------------------

#: Valid periodic-table symbols (elements 1..118).
PERIODIC_SYMBOLS: frozenset[str] = frozenset(
    """
    H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I
    Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt
    Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr
    Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og
    """.split()
)

#: Ordered lowercase greek alphabet used for placeholder suffixes.
GREEK_LETTERS: tuple[str, ...] = tuple("αβγδεζηθικλμνξοπρστυφχψω")

_GREEK_SET = frozenset(GREEK_LETTERS)


def greek_suffix(index: int) -> str:
    """Return the greek suffix for a 0-based index (α, β, ..., ω, αα, αβ, ...)."""
    if index < 0:
        raise ValueError("greek suffix index must be non-negative")
    n = len(GREEK_LETTERS)
    if index < n:
        return GREEK_LETTERS[index]
    # Overflow past ω: two-letter suffixes in lexicographic order.
    hi, lo = divmod(index - n, n)
    if hi >= n:
        raise ValueError("placeholder suffix overflow")
    return GREEK_LETTERS[hi] + GREEK_LETTERS[lo]


def is_greek_suffix(text: str) -> bool:
    return bool(text) and all(ch in _GREEK_SET for ch in text)


class LabelKind(Enum):
    """Discriminator for the atom label variants."""

    ELEMENT = "element"
    SUPERATOM = "superatom"
    RGROUP = "rgroup"
    GROUP_PLACEHOLDER = "group"
    WILDCARD = "wildcard"
    DEUTERIUM = "deuterium"


_WILDCARD_TEXT = "?"
_DEUTERIUM_TEXT = "D"
_GROUP_PREFIX = "GROUP"


@dataclass(frozen=True, order=True)
class AtomLabel:
    """What an atom *is*: an element symbol, an abbreviation drawn as a single
    unit (Ph, Boc, MeO), a Markush placeholder (R1, Rα, GROUPα), a wildcard
    attachment, or an explicitly drawn deuterium.

    ``text`` is the canonical rendering used on the wire and in comparisons;
    placeholder suffix kind is recoverable from it.
    """

    kind: LabelKind
    text: str

    # -- constructors -------------------------------------------------------

    @staticmethod
    def element(symbol: str) -> "AtomLabel":
        if symbol not in PERIODIC_SYMBOLS:
            raise ValueError(f"not a periodic-table symbol: {symbol!r}")
        return AtomLabel(LabelKind.ELEMENT, symbol)

    @staticmethod
    def superatom(text: str) -> "AtomLabel":
        if not text or any(ch.isspace() for ch in text):
            raise ValueError(f"superatom text must be non-empty without whitespace: {text!r}")
        return AtomLabel(LabelKind.SUPERATOM, text)

    @staticmethod
    def rgroup_numbered(number: int) -> "AtomLabel":
        if number < 1:
            raise ValueError("R-group numbers start at 1")
        return AtomLabel(LabelKind.RGROUP, f"R{number}")

    @staticmethod
    def rgroup_greek(suffix: str) -> "AtomLabel":
        if not is_greek_suffix(suffix):
            raise ValueError(f"not a greek suffix: {suffix!r}")
        return AtomLabel(LabelKind.RGROUP, f"R{suffix}")

    @staticmethod
    def group_placeholder(suffix: str) -> "AtomLabel":
        if not is_greek_suffix(suffix):
            raise ValueError(f"not a greek suffix: {suffix!r}")
        return AtomLabel(LabelKind.GROUP_PLACEHOLDER, f"{_GROUP_PREFIX}{suffix}")

    @staticmethod
    def wildcard() -> "AtomLabel":
        return AtomLabel(LabelKind.WILDCARD, _WILDCARD_TEXT)

    @staticmethod
    def deuterium() -> "AtomLabel":
        return AtomLabel(LabelKind.DEUTERIUM, _DEUTERIUM_TEXT)

    # -- wire codec ----------------------------------------------------------

    @staticmethod
    def from_wire(raw: str) -> "AtomLabel":
        """Decode an ``atom`` string as written in graph documents.

        Bracketed tokens (``[Ph]``) and any token that is not an element
        symbol, placeholder, wildcard, or deuterium fall back to superatoms;
        model output is messy and label text is semantic, so nothing is
        silently dropped.
        """
        text = raw.strip()
        if not text:
            raise ValueError("empty atom label")
        if text.startswith("[") and text.endswith("]") and len(text) > 2:
            inner = text[1:-1].strip()
            return AtomLabel._from_bare(inner, bracketed=True)
        return AtomLabel._from_bare(text, bracketed=False)

    @staticmethod
    def _from_bare(text: str, bracketed: bool) -> "AtomLabel":
        if text in ("?", "*"):
            return AtomLabel.wildcard()
        if text == _DEUTERIUM_TEXT:
            return AtomLabel.deuterium()
        if text.startswith(_GROUP_PREFIX) and is_greek_suffix(text[len(_GROUP_PREFIX):]):
            return AtomLabel.group_placeholder(text[len(_GROUP_PREFIX):])
        if len(text) > 1 and text[0] == "R":
            suffix = text[1:]
            if suffix.isdigit() and int(suffix) >= 1:
                return AtomLabel.rgroup_numbered(int(suffix))
            if is_greek_suffix(suffix):
                return AtomLabel.rgroup_greek(suffix)
        if not bracketed and text in PERIODIC_SYMBOLS:
            return AtomLabel(LabelKind.ELEMENT, text)
        if bracketed and text in PERIODIC_SYMBOLS:
            # Bracketed element token in a graph document; treat as the element.
            return AtomLabel(LabelKind.ELEMENT, text)
        return AtomLabel.superatom(text)

    def to_wire(self) -> str:
        """Encode for graph documents (superatoms regain their brackets)."""
        if self.kind is LabelKind.SUPERATOM:
            return f"[{self.text}]"
        return self.text

    # -- predicates ----------------------------------------------------------

    @property
    def greek_placeholder_family(self) -> Optional[str]:
        """``"R"`` or ``"GROUP"`` when this is a greek-suffixed placeholder."""
        if self.kind is LabelKind.RGROUP and is_greek_suffix(self.text[1:]):
            return "R"
        if self.kind is LabelKind.GROUP_PLACEHOLDER:
            return _GROUP_PREFIX
        return None

    def is_well_formed(self) -> bool:
        """Re-check the construction invariants (labels may be built directly)."""
        try:
            if self.kind is LabelKind.ELEMENT:
                return self.text in PERIODIC_SYMBOLS
            if self.kind is LabelKind.SUPERATOM:
                return bool(self.text) and not any(ch.isspace() for ch in self.text)
            if self.kind is LabelKind.RGROUP:
                suffix = self.text[1:] if self.text.startswith("R") else ""
                return (suffix.isdigit() and int(suffix) >= 1) or is_greek_suffix(suffix)
            if self.kind is LabelKind.GROUP_PLACEHOLDER:
                return self.text.startswith(_GROUP_PREFIX) and is_greek_suffix(
                    self.text[len(_GROUP_PREFIX):]
                )
            if self.kind is LabelKind.WILDCARD:
                return self.text == _WILDCARD_TEXT
            if self.kind is LabelKind.DEUTERIUM:
                return self.text == _DEUTERIUM_TEXT
        except (ValueError, IndexError):
            return False
        return False

    def __str__(self) -> str:
        return self.to_wire()


class Radical(IntEnum):
    """Radical electron state; wire values follow the graph document schema."""

    DOUBLET = 1
    SINGLET = 2
    TRIPLET = 3


# ---------------------------------------------------------------------------
# Bonds
# ---------------------------------------------------------------------------


class BondType(Enum):
    """Closed 23-value bond vocabulary; values are the canonical wire names."""

    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"
    SOLID_WEDGE = "solid wedge"
    DASHED_WEDGE = "dashed wedge"
    HOLLOW_WEDGE = "hollow wedge"
    WAVY = "wavy"
    ANY = "any"
    BOLD = "bold"
    DASHED_BOLD = "dashed bold"
    DASHED_DOUBLE = "dashed double"
    DASHED_TRIPLE = "dashed triple"
    SINGLE_OR_DOUBLE = "single or double"
    BOLD_DOUBLE = "bold double"
    DOUBLE_EITHER = "double either"
    SINGLE_OR_AROMATIC = "single or aromatic"
    DOUBLE_OR_AROMATIC = "double or aromatic"
    DATIVE = "dative"
    DASHED_DATIVE = "dashed dative"
    HYDROGEN = "hydrogen"
    ATTACHMENT_POINT = "attachment point"
    TRIPLE_WITH_SINGLE_DASH = "triple with single dash"

    @staticmethod
    def parse(raw: str) -> "BondType":
        """Parse a wire name; spaces and underscores are interchangeable."""
        name = " ".join(raw.strip().lower().replace("_", " ").split())
        try:
            return _BOND_TYPE_BY_NAME[name]
        except KeyError:
            raise UnknownBondTypeError(raw) from None

    @property
    def is_basic(self) -> bool:
        return self in BASIC_BOND_TYPES

    @property
    def is_directional(self) -> bool:
        return self in DIRECTIONAL_BOND_TYPES

    def __str__(self) -> str:
        return self.value


_BOND_TYPE_BY_NAME: dict[str, BondType] = {bt.value: bt for bt in BondType}

#: Bond types every protocol understands; the simplification target set.
BASIC_BOND_TYPES: frozenset[BondType] = frozenset(
    {
        BondType.SINGLE,
        BondType.DOUBLE,
        BondType.TRIPLE,
        BondType.AROMATIC,
        BondType.SOLID_WEDGE,
        BondType.DASHED_WEDGE,
    }
)

#: Types for which (atom1, atom2) order is meaningful.
DIRECTIONAL_BOND_TYPES: frozenset[BondType] = frozenset(
    {
        BondType.SOLID_WEDGE,
        BondType.DASHED_WEDGE,
        BondType.HOLLOW_WEDGE,
        BondType.DATIVE,
        BondType.DASHED_DATIVE,
        BondType.ATTACHMENT_POINT,
    }
)


class UnknownBondTypeError(ValueError):
    """Raised when a bond-type string is outside the closed vocabulary."""

    def __init__(self, raw: str):
        super().__init__(f"unknown bond type: {raw!r}")
        self.raw = raw


class BondDir(Enum):
    """SMILES ``/`` and ``\\`` markers, oriented from atom1 to atom2."""

    UP = "/"
    DOWN = "\\"

    def flipped(self) -> "BondDir":
        return BondDir.DOWN if self is BondDir.UP else BondDir.UP


# ---------------------------------------------------------------------------
# Stereo parity
# ---------------------------------------------------------------------------

#: Sentinel id standing for an implicit hydrogen in a parity neighbor order.
IMPLICIT_H = -1


class ParitySign(Enum):
    CCW = "@"
    CW = "@@"

    def flipped(self) -> "ParitySign":
        return ParitySign.CW if self is ParitySign.CCW else ParitySign.CCW

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AtomParity:
    """Tetrahedral parity marker with the neighbor order it was written in.

    ``neighbors`` holds atom ids in encounter order; :data:`IMPLICIT_H`
    stands in for an implicit hydrogen.
    """

    sign: ParitySign
    neighbors: tuple[int, ...]


# ---------------------------------------------------------------------------
# Graph parts
# ---------------------------------------------------------------------------


ChargeLike = Union[int, Fraction]


def as_charge(value: ChargeLike) -> Fraction:
    """Normalize a charge to a :class:`Fraction` (integers stay exact)."""
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class Atom:
    """One atom. Optional attributes default to "not drawn".

    ``hydrogens``, ``aromatic``, and ``parity`` only arise from SMILES input;
    graph documents never carry them and the graph protocols never compare
    them.
    """

    id: int
    label: AtomLabel
    point_2d: Optional[tuple[float, float]] = None
    charge: Optional[Fraction] = None
    isotope: Optional[int] = None
    valence: Optional[int] = None
    radical: Optional[Radical] = None
    hydrogens: Optional[int] = None
    aromatic: bool = False
    parity: Optional[AtomParity] = None

    def with_id(self, new_id: int) -> "Atom":
        return replace(self, id=new_id)


@dataclass(frozen=True)
class Bond:
    """A typed bond. ``direction`` is the SMILES ``/`` ``\\`` marker, if any."""

    atom1: int
    atom2: int
    bond_type: BondType
    direction: Optional[BondDir] = None

    @property
    def pair(self) -> frozenset[int]:
        return frozenset((self.atom1, self.atom2))

    def other(self, atom_id: int) -> int:
        if atom_id == self.atom1:
            return self.atom2
        if atom_id == self.atom2:
            return self.atom1
        raise KeyError(f"atom {atom_id} not on bond {self.atom1}-{self.atom2}")


@dataclass(frozen=True)
class Bracket:
    """A repeat-group annotation over a set of atoms with a free-text mark."""

    atoms: frozenset[int]
    mark: str

    def __init__(self, atoms: Iterable[int], mark: str):
        object.__setattr__(self, "atoms", frozenset(atoms))
        object.__setattr__(self, "mark", mark)


@dataclass(frozen=True)
class MolGraph:
    """An attributed molecular graph. The empty graph means "no structure"."""

    atoms: tuple[Atom, ...] = ()
    bonds: tuple[Bond, ...] = ()
    brackets: tuple[Bracket, ...] = ()

    def __init__(
        self,
        atoms: Iterable[Atom] = (),
        bonds: Iterable[Bond] = (),
        brackets: Iterable[Bracket] = (),
    ):
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "bonds", tuple(bonds))
        object.__setattr__(self, "brackets", tuple(brackets))

    # -- accessors -----------------------------------------------------------

    @property
    def atom_ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.atoms)

    def atom(self, atom_id: int) -> Atom:
        atom = self._atom_index().get(atom_id)
        if atom is None:
            raise KeyError(f"no atom with id {atom_id}")
        return atom

    def has_atom(self, atom_id: int) -> bool:
        return atom_id in self._atom_index()

    def neighbors(self, atom_id: int) -> tuple[int, ...]:
        return self._adjacency().get(atom_id, ())

    def degree(self, atom_id: int) -> int:
        return len(self.neighbors(atom_id))

    def bond_between(self, a: int, b: int) -> Optional[Bond]:
        return self._bond_index().get(frozenset((a, b)))

    def incident_bonds(self, atom_id: int) -> tuple[Bond, ...]:
        return tuple(b for b in self.bonds if atom_id in (b.atom1, b.atom2))

    # Caches are per-instance lazy dicts; the dataclass itself stays frozen.

    def _atom_index(self) -> dict[int, Atom]:
        cache = self.__dict__.get("_atom_index_cache")
        if cache is None:
            cache = {a.id: a for a in self.atoms}
            self.__dict__["_atom_index_cache"] = cache
        return cache

    def _bond_index(self) -> dict[frozenset[int], Bond]:
        cache = self.__dict__.get("_bond_index_cache")
        if cache is None:
            cache = {b.pair: b for b in self.bonds}
            self.__dict__["_bond_index_cache"] = cache
        return cache

    def _adjacency(self) -> dict[int, tuple[int, ...]]:
        cache = self.__dict__.get("_adjacency_cache")
        if cache is None:
            adj: dict[int, list[int]] = {a.id: [] for a in self.atoms}
            for b in self.bonds:
                if b.atom1 in adj and b.atom2 in adj and b.atom1 != b.atom2:
                    adj[b.atom1].append(b.atom2)
                    adj[b.atom2].append(b.atom1)
            cache = {k: tuple(sorted(v)) for k, v in adj.items()}
            self.__dict__["_adjacency_cache"] = cache
        return cache

    def __len__(self) -> int:
        return len(self.atoms)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    severity: Severity
    code: str
    message: str
    location: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not any(i.severity is Severity.ERROR for i in self.issues)

    @property
    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity is Severity.ERROR)

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {
                    "severity": i.severity.value,
                    "code": i.code,
                    "message": i.message,
                    "location": i.location,
                }
                for i in self.issues
            ],
        }


def validate_graph(g: MolGraph) -> ValidationReport:
    """Check every structural invariant and report violations.

    Pure; never raises on bad content. ``ok`` is true exactly when no
    error-severity issue was found. An empty graph is valid.
    """
    issues: list[Issue] = []

    def err(code: str, message: str, location: str) -> None:
        issues.append(Issue(Severity.ERROR, code, message, location))

    def warn(code: str, message: str, location: str) -> None:
        issues.append(Issue(Severity.WARNING, code, message, location))

    seen_ids: set[int] = set()
    for pos, atom in enumerate(g.atoms):
        loc = f"atoms[{pos}]"
        if atom.id < 0:
            err("atom-id-negative", f"atom id {atom.id} is negative", loc)
        if atom.id in seen_ids:
            err("atom-id-duplicate", f"duplicate atom id {atom.id}", loc)
        seen_ids.add(atom.id)
        if not atom.label.is_well_formed():
            err(
                "atom-label-malformed",
                f"malformed {atom.label.kind.value} label {atom.label.text!r}",
                loc,
            )
        if atom.isotope is not None and atom.isotope < 1:
            err("atom-isotope-range", f"isotope {atom.isotope} must be >= 1", loc)
        if atom.valence is not None and atom.valence < 1:
            err("atom-valence-range", f"valence {atom.valence} must be >= 1", loc)
        if atom.hydrogens is not None and atom.hydrogens < 0:
            err("atom-hydrogens-range", f"hydrogen count {atom.hydrogens} is negative", loc)

    seen_pairs: set[frozenset[int]] = set()
    for pos, bond in enumerate(g.bonds):
        loc = f"bonds[{pos}]"
        if bond.atom1 == bond.atom2:
            err("bond-self-loop", f"bond joins atom {bond.atom1} to itself", loc)
            continue
        missing = [a for a in (bond.atom1, bond.atom2) if a not in seen_ids]
        for a in missing:
            err("bond-unknown-atom", f"bond references unknown atom id {a}", loc)
        pair = bond.pair
        if pair in seen_pairs:
            err(
                "bond-duplicate",
                f"duplicate bond for atom pair {bond.atom1}-{bond.atom2}",
                loc,
            )
        seen_pairs.add(pair)

    for pos, bracket in enumerate(g.brackets):
        loc = f"brackets[{pos}]"
        if not bracket.atoms:
            err("bracket-empty", "bracket contains no atoms", loc)
            continue
        unknown = sorted(a for a in bracket.atoms if a not in seen_ids)
        for a in unknown:
            err("bracket-unknown-atom", f"bracket references unknown atom id {a}", loc)
        if bracket.mark == "":
            warn("bracket-mark-empty", "bracket mark is empty", loc)

    for i in range(len(g.brackets)):
        for j in range(i + 1, len(g.brackets)):
            a, b = g.brackets[i].atoms, g.brackets[j].atoms
            if a & b and not (a <= b or b <= a):
                err(
                    "bracket-partial-overlap",
                    f"brackets {i} and {j} overlap without containment",
                    f"brackets[{i}]",
                )

    return ValidationReport(tuple(issues))


class ContractViolation(ValueError):
    """An operation was handed input that violates its precondition."""


def require_valid(g: MolGraph, op: str) -> None:
    """Raise :class:`ContractViolation` when ``g`` fails validation."""
    report = validate_graph(g)
    if not report.ok:
        first = report.errors[0]
        raise ContractViolation(f"{op}: invalid graph ({first.code}: {first.message})")
