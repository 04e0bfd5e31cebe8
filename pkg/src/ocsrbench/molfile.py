"""
MolFile V2000 import.

Covers the standard counts/atom/bond blocks plus the property lines that
matter here: ``M  CHG``, ``M  ISO``, ``M  RAD``, and S-group lines
(``M  STY`` / ``M  SAL`` / ``M  SMT``) which become brackets. Z coordinates
are discarded (the coordinate channel is image-2D); V3000 is out of scope.
"""

from __future__ import annotations

from fractions import Fraction

from .molgraph import Atom, AtomLabel, Bond, BondType, Bracket, MolGraph, Radical


class MolfileParseError(ValueError):
    pass


_BOND_CODES = {
    1: BondType.SINGLE,
    2: BondType.DOUBLE,
    3: BondType.TRIPLE,
    4: BondType.AROMATIC,
}

# Old-style atom-block charge column (superseded by M CHG / M RAD lines).
_CHARGE_COLUMN = {1: 3, 2: 2, 3: 1, 5: -1, 6: -2, 7: -3}


def _int_field(line: str, start: int, end: int, what: str) -> int:
    token = line[start:end].strip()
    if not token:
        return 0
    try:
        return int(token)
    except ValueError:
        raise MolfileParseError(f"bad {what} field {token!r}") from None


def parse_molfile_v2000(text: str) -> MolGraph:
    """Parse V2000 MolFile text into a :class:`MolGraph`."""
    lines = text.splitlines()
    if len(lines) < 4:
        raise MolfileParseError("file too short for a V2000 header")
    counts = lines[3]
    if len(counts) < 6:
        raise MolfileParseError("malformed counts line")
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except ValueError:
        raise MolfileParseError("malformed counts line") from None
    if n_atoms < 0 or len(lines) < 4 + n_atoms + n_bonds:
        raise MolfileParseError("atom/bond blocks truncated")

    atoms: list[Atom] = []
    column_charges: dict[int, int] = {}
    for i in range(n_atoms):
        line = lines[4 + i]
        if len(line) < 34:
            raise MolfileParseError(f"atom line {i + 1} too short")
        try:
            x = float(line[0:10])
            y = float(line[10:20])
        except ValueError:
            raise MolfileParseError(f"bad coordinates on atom line {i + 1}") from None
        symbol = line[31:34].strip()
        if not symbol:
            raise MolfileParseError(f"missing symbol on atom line {i + 1}")
        label = AtomLabel.from_wire(symbol)
        if len(line) >= 39:
            code = _int_field(line, 36, 39, "charge")
            if code:
                column_charges[i] = code
        atoms.append(Atom(id=i, label=label, point_2d=(x, y)))

    bonds: list[Bond] = []
    for i in range(n_bonds):
        line = lines[4 + n_atoms + i]
        a1 = _int_field(line, 0, 3, "bond atom1") - 1
        a2 = _int_field(line, 3, 6, "bond atom2") - 1
        code = _int_field(line, 6, 9, "bond type")
        stereo = _int_field(line, 9, 12, "bond stereo")
        if code not in _BOND_CODES:
            raise MolfileParseError(f"unsupported bond code {code}")
        bond_type = _BOND_CODES[code]
        if bond_type is BondType.SINGLE:
            if stereo == 1:
                bond_type = BondType.SOLID_WEDGE
            elif stereo == 6:
                bond_type = BondType.DASHED_WEDGE
            elif stereo == 4:
                bond_type = BondType.WAVY
        elif bond_type is BondType.DOUBLE and stereo == 3:
            bond_type = BondType.DOUBLE_EITHER
        bonds.append(Bond(a1, a2, bond_type))

    charges: dict[int, Fraction] = {}
    isotopes: dict[int, int] = {}
    radicals: dict[int, Radical] = {}
    sgroup_atoms: dict[int, list[int]] = {}
    sgroup_marks: dict[int, str] = {}
    property_charges_seen = False

    def parse_pairs(line: str, what: str) -> list[tuple[int, int]]:
        tokens = line.split()
        if len(tokens) < 3:
            raise MolfileParseError(f"malformed {what} line")
        try:
            count = int(tokens[2])
            values = [int(t) for t in tokens[3 : 3 + 2 * count]]
        except ValueError:
            raise MolfileParseError(f"malformed {what} line") from None
        if len(values) != 2 * count:
            raise MolfileParseError(f"malformed {what} line")
        return [(values[k] - 1, values[k + 1]) for k in range(0, len(values), 2)]

    for line in lines[4 + n_atoms + n_bonds :]:
        if line.startswith("M  END"):
            break
        if line.startswith("M  CHG"):
            property_charges_seen = True
            for atom_idx, value in parse_pairs(line, "M CHG"):
                charges[atom_idx] = Fraction(value)
        elif line.startswith("M  ISO"):
            for atom_idx, value in parse_pairs(line, "M ISO"):
                isotopes[atom_idx] = value
        elif line.startswith("M  RAD"):
            property_charges_seen = True
            for atom_idx, value in parse_pairs(line, "M RAD"):
                if value in (1, 2, 3):
                    radicals[atom_idx] = Radical(value)
        elif line.startswith("M  STY"):
            tokens = line.split()
            try:
                count = int(tokens[2])
                for k in range(count):
                    sgroup_atoms.setdefault(int(tokens[3 + 2 * k]), [])
            except (ValueError, IndexError):
                raise MolfileParseError("malformed M STY line") from None
        elif line.startswith("M  SAL"):
            tokens = line.split()
            try:
                idx = int(tokens[2])
                count = int(tokens[3])
                members = [int(t) - 1 for t in tokens[4 : 4 + count]]
            except (ValueError, IndexError):
                raise MolfileParseError("malformed M SAL line") from None
            sgroup_atoms.setdefault(idx, []).extend(members)
        elif line.startswith("M  SMT"):
            tokens = line.split(None, 3)
            if len(tokens) < 4:
                raise MolfileParseError("malformed M SMT line")
            try:
                idx = int(tokens[2])
            except ValueError:
                raise MolfileParseError("malformed M SMT line") from None
            sgroup_marks[idx] = tokens[3].strip()

    if not property_charges_seen:
        for atom_idx, code in column_charges.items():
            if code == 4:
                radicals[atom_idx] = Radical.DOUBLET
            elif code in _CHARGE_COLUMN:
                charges[atom_idx] = Fraction(_CHARGE_COLUMN[code])

    final_atoms = []
    for atom in atoms:
        final_atoms.append(
            Atom(
                id=atom.id,
                label=atom.label,
                point_2d=atom.point_2d,
                charge=charges.get(atom.id),
                isotope=isotopes.get(atom.id),
                radical=radicals.get(atom.id),
            )
        )

    brackets = [
        Bracket(members, sgroup_marks.get(idx, ""))
        for idx, members in sorted(sgroup_atoms.items())
        if members
    ]
    return MolGraph(final_atoms, bonds, brackets)
