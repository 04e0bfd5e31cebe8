"""
CARBON document serialization.

CARBON is this toolkit's molecular interchange format. One molecule per
UTF-8 JSON document, in either of two complementary forms:

* ``atom_centric`` — one record per atom embedding its attributes and the
  bonds that originate at it; convenient for model training and inference.
* ``attribute_centric`` — a bare atom/bond skeleton plus top-level attribute
  maps keyed by atom id (or ``"a1-a2"`` ordered-pair strings for bonds);
  convenient for statistics.

Both forms are lossless against :class:`~ocsrbench.molgraph.MolGraph` and
convert into each other. Emission is canonical: atoms are renumbered 0..n-1
in canonical-rank order, so equal graphs produce identical bytes. The full
field reference lives in ``docs/carbon-format.md``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from .graphops import sort_atoms_canonically
from .molgraph import (
    Atom,
    AtomLabel,
    AtomParity,
    Bond,
    BondDir,
    BondType,
    Bracket,
    MolGraph,
    ParitySign,
    Radical,
    UnknownBondTypeError,
    require_valid,
    validate_graph,
)

logger = logging.getLogger(__name__)

FORMAT_NAME = "CARBON"
FORMAT_VERSION = "1.0"
FILE_EXTENSION = ".carbon.json"


class CarbonForm(Enum):
    ATOM_CENTRIC = "atom_centric"
    ATTRIBUTE_CENTRIC = "attribute_centric"


class CarbonParseError(ValueError):
    """Malformed document text (not JSON, or missing/bad header)."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class CarbonSchemaError(ValueError):
    """Well-formed JSON that violates the CARBON schema; carries the path."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} (at {path})")
        self.path = path


@dataclass(frozen=True)
class CarbonDocument:
    """A parsed CARBON document: header fields plus the raw body tree."""

    form: CarbonForm
    version: str
    body: dict

    def to_text(self) -> str:
        return _dumps(self.body)

    def to_graph(self, strict: bool = True) -> MolGraph:
        graph, _, _ = _graph_from_body(self.body, strict=strict)
        return graph


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _charge_to_json(charge: Fraction) -> Any:
    if charge.denominator == 1:
        return int(charge)
    return f"{charge.numerator}/{charge.denominator}"


def _coord_to_json(value: float) -> Any:
    return int(value) if float(value).is_integer() else value


def _parity_to_json(parity: AtomParity) -> dict:
    return {"sign": parity.sign.value, "neighbors": list(parity.neighbors)}


def _atom_common_fields(atom: Atom) -> dict:
    rec: dict[str, Any] = {}
    if atom.point_2d is not None:
        rec["point_2d"] = [_coord_to_json(atom.point_2d[0]), _coord_to_json(atom.point_2d[1])]
    if atom.charge is not None:
        rec["charge"] = _charge_to_json(atom.charge)
    if atom.isotope is not None:
        rec["isotope"] = atom.isotope
    if atom.valence is not None:
        rec["valence"] = atom.valence
    if atom.radical is not None:
        rec["radical"] = int(atom.radical)
    if atom.hydrogens is not None:
        rec["hydrogens"] = atom.hydrogens
    if atom.aromatic:
        rec["aromatic"] = True
    if atom.parity is not None:
        rec["parity"] = _parity_to_json(atom.parity)
    return rec


def _dumps(body: dict) -> str:
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def emit_carbon(g: MolGraph, form: CarbonForm) -> str:
    """Serialize ``g`` deterministically in the requested form."""
    require_valid(g, "emit_carbon")
    canon = sort_atoms_canonically(g)

    body: dict[str, Any] = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "form": form.value,
    }

    brackets = [
        {"atoms": key[0], "mark": key[1]}
        for key in sorted((sorted(br.atoms), br.mark) for br in canon.brackets)
    ]

    if form is CarbonForm.ATOM_CENTRIC:
        out_bonds: dict[int, list[Bond]] = {a.id: [] for a in canon.atoms}
        for b in canon.bonds:
            out_bonds[b.atom1].append(b)
        atom_records = []
        for atom in canon.atoms:
            rec: dict[str, Any] = {"id": atom.id, "atom": atom.label.to_wire()}
            rec.update(_atom_common_fields(atom))
            bonds = []
            for b in sorted(out_bonds[atom.id], key=lambda b: (b.atom2, b.bond_type.value)):
                bond_rec: dict[str, Any] = {"to": b.atom2, "bond_type": b.bond_type.value}
                if b.direction is not None:
                    bond_rec["direction"] = b.direction.value
                bonds.append(bond_rec)
            if bonds:
                rec["bonds"] = bonds
            atom_records.append(rec)
        body["atoms"] = atom_records
        if brackets:
            body["brackets"] = brackets
        return _dumps(body)

    # attribute-centric
    body["atoms"] = [{"id": a.id, "atom": a.label.to_wire()} for a in canon.atoms]
    bond_map: dict[str, str] = {}
    direction_map: dict[str, str] = {}
    for b in sorted(canon.bonds, key=lambda b: (b.atom1, b.atom2)):
        key = f"{b.atom1}-{b.atom2}"
        bond_map[key] = b.bond_type.value
        if b.direction is not None:
            direction_map[key] = b.direction.value
    body["bonds"] = bond_map
    if direction_map:
        body["bond_directions"] = direction_map

    def attr_map(getter, encode=lambda v: v) -> dict[str, Any]:
        out = {}
        for atom in canon.atoms:
            value = getter(atom)
            if value is not None:
                out[str(atom.id)] = encode(value)
        return out

    sections: dict[str, Any] = {
        "coordinates": attr_map(
            lambda a: a.point_2d,
            lambda p: [_coord_to_json(p[0]), _coord_to_json(p[1])],
        ),
        "charges": attr_map(lambda a: a.charge, _charge_to_json),
        "isotopes": attr_map(lambda a: a.isotope),
        "valences": attr_map(lambda a: a.valence),
        "radicals": attr_map(lambda a: a.radical, int),
        "hydrogens": attr_map(lambda a: a.hydrogens),
        "parities": attr_map(lambda a: a.parity, _parity_to_json),
    }
    for key, section in sections.items():
        if section:
            body[key] = section
    aromatic_ids = [a.id for a in canon.atoms if a.aromatic]
    if aromatic_ids:
        body["aromatic"] = aromatic_ids
    if brackets:
        body["brackets"] = brackets
    return _dumps(body)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOP_LEVEL_KEYS = {
    CarbonForm.ATOM_CENTRIC: {"format", "version", "form", "atoms", "brackets", "groups"},
    CarbonForm.ATTRIBUTE_CENTRIC: {
        "format",
        "version",
        "form",
        "atoms",
        "bonds",
        "bond_directions",
        "coordinates",
        "charges",
        "isotopes",
        "valences",
        "radicals",
        "hydrogens",
        "aromatic",
        "parities",
        "brackets",
        "groups",
    },
}

_ATOM_KEYS_ATOM_CENTRIC = {
    "id",
    "atom",
    "point_2d",
    "charge",
    "isotope",
    "valence",
    "radical",
    "hydrogens",
    "aromatic",
    "parity",
    "bonds",
}
_ATOM_KEYS_SKELETON = {"id", "atom"}
_BOND_KEYS_ATOM_CENTRIC = {"to", "bond_type", "direction"}


class _Reader:
    """Shared decoding helpers with strict/lenient unknown-field policy."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.warnings: list[str] = []

    def fail(self, message: str, path: str) -> None:
        raise CarbonSchemaError(message, path)

    def unknown_fields(self, present: set[str], allowed: set[str], path: str) -> None:
        extras = sorted(present - allowed)
        if not extras:
            return
        message = f"unknown field(s) {extras}"
        if self.strict:
            self.fail(message, path)
        self.warnings.append(f"{message} at {path}")
        logger.warning("CARBON: %s at %s", message, path)

    def expect(self, value: Any, kind: type, what: str, path: str) -> Any:
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
            self.fail(f"{what} must be {kind.__name__}, got {type(value).__name__}", path)
        return value

    def parse_charge(self, value: Any, path: str) -> Fraction:
        if isinstance(value, bool):
            self.fail("charge must be a number or 'p/q' string", path)
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(str(value))
        if isinstance(value, str):
            try:
                return Fraction(value)
            except (ValueError, ZeroDivisionError):
                self.fail(f"bad rational charge {value!r}", path)
        self.fail("charge must be a number or 'p/q' string", path)
        raise AssertionError("unreachable")

    def parse_point(self, value: Any, path: str) -> tuple[float, float]:
        if (
            not isinstance(value, list)
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            self.fail("point_2d must be a [x, y] number pair", path)
        return (float(value[0]), float(value[1]))

    def parse_radical(self, value: Any, path: str) -> Radical:
        if value not in (1, 2, 3):
            self.fail(f"radical must be 1, 2, or 3, got {value!r}", path)
        return Radical(value)

    def parse_parity(self, value: Any, path: str) -> AtomParity:
        if not isinstance(value, dict):
            self.fail("parity must be an object", path)
        self.unknown_fields(set(value), {"sign", "neighbors"}, path)
        sign = value.get("sign")
        if sign not in ("@", "@@"):
            self.fail("parity sign must be '@' or '@@'", f"{path}.sign")
        nbrs = value.get("neighbors")
        if not isinstance(nbrs, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in nbrs
        ):
            self.fail("parity neighbors must be a list of atom ids", f"{path}.neighbors")
        return AtomParity(ParitySign(sign), tuple(nbrs))

    def parse_bond_type(self, value: Any, path: str) -> BondType:
        if not isinstance(value, str):
            self.fail("bond_type must be a string", path)
        try:
            return BondType.parse(value)
        except UnknownBondTypeError as exc:
            self.fail(str(exc), path)
            raise AssertionError("unreachable")

    def parse_label(self, value: Any, path: str) -> AtomLabel:
        if not isinstance(value, str):
            self.fail("atom label must be a string", path)
        try:
            return AtomLabel.from_wire(value)
        except ValueError as exc:
            self.fail(str(exc), path)
            raise AssertionError("unreachable")


def _atom_from_record(reader: _Reader, rec: Any, path: str, allowed: set[str]) -> Atom:
    if not isinstance(rec, dict):
        reader.fail("atom record must be an object", path)
    reader.unknown_fields(set(rec), allowed, path)
    if "id" not in rec or "atom" not in rec:
        reader.fail("atom record needs 'id' and 'atom'", path)
    atom_id = reader.expect(rec["id"], int, "atom id", f"{path}.id")
    label = reader.parse_label(rec["atom"], f"{path}.atom")
    kwargs: dict[str, Any] = {}
    if "point_2d" in rec:
        kwargs["point_2d"] = reader.parse_point(rec["point_2d"], f"{path}.point_2d")
    if "charge" in rec:
        kwargs["charge"] = reader.parse_charge(rec["charge"], f"{path}.charge")
    if "isotope" in rec:
        kwargs["isotope"] = reader.expect(rec["isotope"], int, "isotope", f"{path}.isotope")
    if "valence" in rec:
        kwargs["valence"] = reader.expect(rec["valence"], int, "valence", f"{path}.valence")
    if "radical" in rec:
        kwargs["radical"] = reader.parse_radical(rec["radical"], f"{path}.radical")
    if "hydrogens" in rec:
        kwargs["hydrogens"] = reader.expect(rec["hydrogens"], int, "hydrogens", f"{path}.hydrogens")
    if "aromatic" in rec:
        kwargs["aromatic"] = reader.expect(rec["aromatic"], bool, "aromatic", f"{path}.aromatic")
    if "parity" in rec:
        kwargs["parity"] = reader.parse_parity(rec["parity"], f"{path}.parity")
    return Atom(id=atom_id, label=label, **kwargs)


def _brackets_from_body(reader: _Reader, body: dict) -> list[Bracket]:
    brackets = []
    for i, rec in enumerate(body.get("brackets", [])):
        path = f"brackets[{i}]"
        if not isinstance(rec, dict):
            reader.fail("bracket must be an object", path)
        reader.unknown_fields(set(rec), {"atoms", "mark"}, path)
        atoms = rec.get("atoms")
        if not isinstance(atoms, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in atoms
        ):
            reader.fail("bracket atoms must be a list of atom ids", f"{path}.atoms")
        mark = rec.get("mark")
        if isinstance(mark, (int, float)) and not isinstance(mark, bool):
            mark = str(mark)
        if not isinstance(mark, str):
            reader.fail("bracket mark must be a string or number", f"{path}.mark")
        brackets.append(Bracket(atoms, mark))
    return brackets


def _validate_groups(reader: _Reader, body: dict, atom_ids: set[int]) -> None:
    for i, rec in enumerate(body.get("groups", [])):
        path = f"groups[{i}]"
        if not isinstance(rec, dict):
            reader.fail("group must be an object", path)
        reader.unknown_fields(set(rec), {"atoms", "charge"}, path)
        atoms = rec.get("atoms", [])
        if not isinstance(atoms, list):
            reader.fail("group atoms must be a list", f"{path}.atoms")
        for a in atoms:
            if a not in atom_ids:
                reader.fail(f"group references unknown atom id {a}", f"{path}.atoms")


def _graph_from_body(body: dict, strict: bool) -> tuple[MolGraph, CarbonForm, list[str]]:
    reader = _Reader(strict)
    if body.get("format") != FORMAT_NAME:
        raise CarbonParseError(f"not a {FORMAT_NAME} document (missing format header)")
    version = body.get("version")
    if not isinstance(version, str):
        raise CarbonParseError("missing version header")
    try:
        form = CarbonForm(body.get("form"))
    except ValueError:
        raise CarbonParseError(f"unknown form {body.get('form')!r}") from None

    reader.unknown_fields(set(body), _TOP_LEVEL_KEYS[form], "$")
    raw_atoms = body.get("atoms")
    if not isinstance(raw_atoms, list):
        reader.fail("atoms must be a list", "atoms")

    atoms: list[Atom] = []
    bonds: list[Bond] = []

    if form is CarbonForm.ATOM_CENTRIC:
        for i, rec in enumerate(raw_atoms):
            path = f"atoms[{i}]"
            atom = _atom_from_record(reader, rec, path, _ATOM_KEYS_ATOM_CENTRIC)
            atoms.append(atom)
            for j, bond_rec in enumerate(rec.get("bonds", []) if isinstance(rec, dict) else []):
                bpath = f"{path}.bonds[{j}]"
                if not isinstance(bond_rec, dict):
                    reader.fail("bond record must be an object", bpath)
                reader.unknown_fields(set(bond_rec), _BOND_KEYS_ATOM_CENTRIC, bpath)
                if "to" not in bond_rec or "bond_type" not in bond_rec:
                    reader.fail("bond record needs 'to' and 'bond_type'", bpath)
                to = reader.expect(bond_rec["to"], int, "bond target", f"{bpath}.to")
                bond_type = reader.parse_bond_type(bond_rec["bond_type"], f"{bpath}.bond_type")
                direction = None
                if "direction" in bond_rec:
                    if bond_rec["direction"] not in ("/", "\\"):
                        reader.fail("direction must be '/' or '\\'", f"{bpath}.direction")
                    direction = BondDir(bond_rec["direction"])
                bonds.append(Bond(atom.id, to, bond_type, direction))
    else:
        for i, rec in enumerate(raw_atoms):
            atoms.append(_atom_from_record(reader, rec, f"atoms[{i}]", _ATOM_KEYS_SKELETON))
        raw_bonds = body.get("bonds", {})
        if not isinstance(raw_bonds, dict):
            reader.fail("bonds must be an object keyed by 'a1-a2'", "bonds")
        raw_directions = body.get("bond_directions", {})
        if not isinstance(raw_directions, dict):
            reader.fail("bond_directions must be an object", "bond_directions")
        for key in raw_directions:
            if key not in raw_bonds:
                reader.fail(f"direction for unknown bond {key!r}", f"bond_directions.{key}")
        for key, type_name in raw_bonds.items():
            path = f"bonds.{key}"
            parts = key.split("-")
            if len(parts) != 2 or not all(p.lstrip("-").isdigit() or p.isdigit() for p in parts):
                reader.fail(f"bond key must be 'a1-a2', got {key!r}", path)
            try:
                a1, a2 = int(parts[0]), int(parts[1])
            except ValueError:
                reader.fail(f"bond key must be 'a1-a2', got {key!r}", path)
                raise AssertionError("unreachable")
            bond_type = reader.parse_bond_type(type_name, path)
            direction = None
            if key in raw_directions:
                if raw_directions[key] not in ("/", "\\"):
                    reader.fail("direction must be '/' or '\\'", f"bond_directions.{key}")
                direction = BondDir(raw_directions[key])
            bonds.append(Bond(a1, a2, bond_type, direction))

        atom_by_id = {a.id: a for a in atoms}

        def apply_map(section: str, setter) -> None:
            raw = body.get(section, {})
            if not isinstance(raw, dict):
                reader.fail(f"{section} must be an object keyed by atom id", section)
            for key, value in raw.items():
                path = f"{section}.{key}"
                if not key.lstrip("-").isdigit():
                    reader.fail(f"atom key must be an integer string, got {key!r}", path)
                atom_id = int(key)
                if atom_id not in atom_by_id:
                    reader.fail(f"{section} references unknown atom id {atom_id}", path)
                atom_by_id[atom_id] = setter(atom_by_id[atom_id], value, path)

        from dataclasses import replace as _replace

        apply_map(
            "coordinates",
            lambda a, v, p: _replace(a, point_2d=reader.parse_point(v, p)),
        )
        apply_map("charges", lambda a, v, p: _replace(a, charge=reader.parse_charge(v, p)))
        apply_map(
            "isotopes",
            lambda a, v, p: _replace(a, isotope=reader.expect(v, int, "isotope", p)),
        )
        apply_map(
            "valences",
            lambda a, v, p: _replace(a, valence=reader.expect(v, int, "valence", p)),
        )
        apply_map("radicals", lambda a, v, p: _replace(a, radical=reader.parse_radical(v, p)))
        apply_map(
            "hydrogens",
            lambda a, v, p: _replace(a, hydrogens=reader.expect(v, int, "hydrogens", p)),
        )
        apply_map("parities", lambda a, v, p: _replace(a, parity=reader.parse_parity(v, p)))

        raw_aromatic = body.get("aromatic", [])
        if not isinstance(raw_aromatic, list):
            reader.fail("aromatic must be a list of atom ids", "aromatic")
        for atom_id in raw_aromatic:
            if atom_id not in atom_by_id:
                reader.fail(f"aromatic references unknown atom id {atom_id}", "aromatic")
            atom_by_id[atom_id] = replace_aromatic(atom_by_id[atom_id])

        atoms = [atom_by_id[a.id] for a in atoms]

    brackets = _brackets_from_body(reader, body)
    graph = MolGraph(atoms, bonds, brackets)
    _validate_groups(reader, body, set(graph.atom_ids))

    report = validate_graph(graph)
    if not report.ok:
        first = report.errors[0]
        raise CarbonSchemaError(first.message, first.location)
    return graph, form, reader.warnings


def replace_aromatic(atom: Atom) -> Atom:
    from dataclasses import replace as _replace

    return _replace(atom, aromatic=True)


def parse_carbon(text: str, strict: bool = True) -> tuple[MolGraph, CarbonForm]:
    """Parse CARBON text; the form is detected from the header.

    Strict mode rejects unknown fields; lenient mode logs warnings instead.
    Raises :class:`CarbonParseError` for malformed text and
    :class:`CarbonSchemaError` (with the offending path) for schema and
    referential-integrity violations.
    """
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CarbonParseError(f"not valid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(body, dict):
        raise CarbonParseError("document must be a JSON object")
    graph, form, _ = _graph_from_body(body, strict=strict)
    return graph, form


def load_document(text: str, strict: bool = True) -> CarbonDocument:
    """Parse into a :class:`CarbonDocument`, validating the embedded graph."""
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CarbonParseError(f"not valid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(body, dict):
        raise CarbonParseError("document must be a JSON object")
    _, form, _ = _graph_from_body(body, strict=strict)
    return CarbonDocument(form=form, version=body["version"], body=body)


def convert_form(doc: CarbonDocument, target: CarbonForm) -> CarbonDocument:
    """Re-express a document in ``target`` form, preserving semantics.

    The reserved ``groups`` section is carried over verbatim (it is
    form-independent and not part of the graph model).
    """
    graph = doc.to_graph()
    text = emit_carbon(graph, target)
    body = json.loads(text)
    if "groups" in doc.body:
        body["groups"] = doc.body["groups"]
    return CarbonDocument(form=target, version=body["version"], body=body)
