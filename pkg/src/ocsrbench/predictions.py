"""
Parsing model output into scoreable predictions.

Models are told to answer with a single JSON object, but real responses come
wrapped in prose, markdown fences, smart quotes, or with trailing commas.
:func:`repair_model_text` conservatively extracts the best candidate (one
pass, no invented structure); :func:`parse_prediction_document` then decodes
it under one of the three protocols. Parsing never raises: every failure
lands in ``parse_status`` with a categorical reason.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

from .molgraph import (
    BASIC_BOND_TYPES,
    Atom,
    AtomLabel,
    Bond,
    BondType,
    Bracket,
    MolGraph,
    Radical,
    UnknownBondTypeError,
    validate_graph,
)

logger = logging.getLogger(__name__)

PROTOCOL_SMILES = "smiles"
PROTOCOL_SIMPLIFIED = "simplified_graph"
PROTOCOL_GRAPH = "graph"
PROTOCOLS = (PROTOCOL_SMILES, PROTOCOL_SIMPLIFIED, PROTOCOL_GRAPH)

STATUS_OK = "ok"
STATUS_REPAIRED = "repaired"
STATUS_FAILED = "failed"

REASON_NOT_JSON = "not-json"
REASON_SCHEMA = "schema-violation"
REASON_UNKNOWN_BOND = "unknown-bond-type"
REASON_REFERENTIAL = "referential-integrity"
REASON_MODEL_ERROR = "model-declared-error"

FAILURE_REASONS = (
    REASON_NOT_JSON,
    REASON_SCHEMA,
    REASON_UNKNOWN_BOND,
    REASON_REFERENTIAL,
    REASON_MODEL_ERROR,
)


@dataclass(frozen=True)
class Prediction:
    """One model answer for one sample under one protocol."""

    sample_id: str
    protocol: str
    raw_text: str
    parse_status: str
    failure_reason: Optional[str] = None
    smiles: Optional[str] = None
    graph: Optional[MolGraph] = None

    @property
    def failed(self) -> bool:
        return self.parse_status == STATUS_FAILED

    def to_json(self) -> dict:
        out = {
            "sample_id": self.sample_id,
            "protocol": self.protocol,
            "parse_status": self.parse_status,
        }
        if self.failure_reason:
            out["failure_reason"] = self.failure_reason
        return out


# ---------------------------------------------------------------------------
# Text repair
# ---------------------------------------------------------------------------

_SMART_QUOTES = {
    "“": '"',
    "”": '"',
    "„": '"',
    "‘": "'",
    "’": "'",
}

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)```", re.DOTALL)

# A quoted token that plausibly is a SMILES string (used only when no JSON
# object can be found at all).
_QUOTED_SMILES_RE = re.compile(r'"([A-Za-z0-9@+\-\[\]()=#$:/\\%.*]{1,2000})"')


def _first_balanced_object(text: str) -> Optional[str]:
    start = text.find("{")
    if start == -1:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def repair_model_text(raw: str) -> str:
    """Extract the answer payload from noisy model text.

    One conservative pass: normalize smart quotes, unwrap the first fenced
    code block, then take the first balanced top-level JSON object; failing
    that, the first quoted SMILES-looking token. Returns the input unchanged
    when nothing better is found. Never raises.
    """
    if not isinstance(raw, str) or not raw.strip():
        return raw
    text = raw
    for smart, plain in _SMART_QUOTES.items():
        text = text.replace(smart, plain)

    fence = _FENCE_RE.search(text)
    if fence:
        text = fence.group(1)

    obj = _first_balanced_object(text)
    if obj is not None:
        return obj.strip()

    quoted = _QUOTED_SMILES_RE.search(text)
    if quoted:
        return f'"{quoted.group(1)}"'

    return raw


_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _loads_tolerant(text: str) -> tuple[Optional[Any], bool]:
    """JSON parse; retries once with trailing commas stripped.

    Returns (document, needed_comma_repair); document is None on failure.
    """
    try:
        return json.loads(text), False
    except json.JSONDecodeError:
        pass
    try:
        return json.loads(_TRAILING_COMMA_RE.sub(r"\1", text)), True
    except json.JSONDecodeError:
        return None, False


# ---------------------------------------------------------------------------
# Protocol decoding
# ---------------------------------------------------------------------------


class _SchemaProblem(Exception):
    def __init__(self, reason: str, detail: str):
        super().__init__(detail)
        self.reason = reason


def _need(condition: bool, detail: str, reason: str = REASON_SCHEMA) -> None:
    if not condition:
        raise _SchemaProblem(reason, detail)


def _as_int(value: Any, what: str) -> int:
    _need(isinstance(value, int) and not isinstance(value, bool), f"{what} must be an integer")
    return value


def _decode_charge(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise _SchemaProblem(REASON_SCHEMA, "charge must be a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise _SchemaProblem(REASON_SCHEMA, f"bad charge value {value!r}") from None
    raise _SchemaProblem(REASON_SCHEMA, "charge must be a number")


_ATOM_KEYS_SIMPLIFIED = {"id", "atom", "point_2d"}
_ATOM_KEYS_GRAPH = {"id", "atom", "point_2d", "charge", "isotope", "valence", "radical"}
_BOND_KEYS = {"atom1", "atom2", "bond_type"}


def _decode_graph_payload(doc: Any, protocol: str) -> MolGraph:
    _need(isinstance(doc, dict), "payload must be a JSON object")
    if protocol == PROTOCOL_SIMPLIFIED:
        allowed_top = {"atoms", "bonds"}
        atom_keys = _ATOM_KEYS_SIMPLIFIED
    else:
        allowed_top = {"atoms", "bonds", "brackets"}
        atom_keys = _ATOM_KEYS_GRAPH
    extras = sorted(set(doc) - allowed_top)
    _need(not extras, f"unexpected top-level key(s) {extras}")
    _need("atoms" in doc and "bonds" in doc, "payload needs 'atoms' and 'bonds'")
    _need(isinstance(doc["atoms"], list), "'atoms' must be a list")
    _need(isinstance(doc["bonds"], list), "'bonds' must be a list")

    atoms: list[Atom] = []
    for i, rec in enumerate(doc["atoms"]):
        _need(isinstance(rec, dict), f"atoms[{i}] must be an object")
        bad = sorted(set(rec) - atom_keys)
        _need(not bad, f"atoms[{i}] has unexpected key(s) {bad}")
        _need("id" in rec and "atom" in rec, f"atoms[{i}] needs 'id' and 'atom'")
        atom_id = _as_int(rec["id"], f"atoms[{i}].id")
        _need(isinstance(rec["atom"], str), f"atoms[{i}].atom must be a string")
        try:
            label = AtomLabel.from_wire(rec["atom"])
        except ValueError as exc:
            raise _SchemaProblem(REASON_SCHEMA, f"atoms[{i}].atom: {exc}") from None
        kwargs: dict[str, Any] = {}
        if rec.get("point_2d") is not None:
            point = rec["point_2d"]
            _need(
                isinstance(point, list)
                and len(point) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in point),
                f"atoms[{i}].point_2d must be [x, y]",
            )
            kwargs["point_2d"] = (float(point[0]), float(point[1]))
        if protocol == PROTOCOL_GRAPH:
            if rec.get("charge") is not None:
                kwargs["charge"] = _decode_charge(rec["charge"])
            if rec.get("isotope") is not None:
                kwargs["isotope"] = _as_int(rec["isotope"], f"atoms[{i}].isotope")
            if rec.get("valence") is not None:
                kwargs["valence"] = _as_int(rec["valence"], f"atoms[{i}].valence")
            if rec.get("radical") is not None:
                value = _as_int(rec["radical"], f"atoms[{i}].radical")
                _need(value in (1, 2, 3), f"atoms[{i}].radical must be 1, 2, or 3")
                kwargs["radical"] = Radical(value)
        atoms.append(Atom(id=atom_id, label=label, **kwargs))

    bonds: list[Bond] = []
    for i, rec in enumerate(doc["bonds"]):
        _need(isinstance(rec, dict), f"bonds[{i}] must be an object")
        bad = sorted(set(rec) - _BOND_KEYS)
        _need(not bad, f"bonds[{i}] has unexpected key(s) {bad}")
        _need(
            all(k in rec for k in ("atom1", "atom2", "bond_type")),
            f"bonds[{i}] needs atom1, atom2, bond_type",
        )
        atom1 = _as_int(rec["atom1"], f"bonds[{i}].atom1")
        atom2 = _as_int(rec["atom2"], f"bonds[{i}].atom2")
        _need(isinstance(rec["bond_type"], str), f"bonds[{i}].bond_type must be a string")
        try:
            bond_type = BondType.parse(rec["bond_type"])
        except UnknownBondTypeError as exc:
            raise _SchemaProblem(REASON_UNKNOWN_BOND, str(exc)) from None
        if protocol == PROTOCOL_SIMPLIFIED and bond_type not in BASIC_BOND_TYPES:
            raise _SchemaProblem(
                REASON_UNKNOWN_BOND,
                f"bond type {bond_type.value!r} is not in the simplified vocabulary",
            )
        bonds.append(Bond(atom1, atom2, bond_type))

    brackets: list[Bracket] = []
    if protocol == PROTOCOL_GRAPH:
        raw_brackets = doc.get("brackets", [])
        _need(isinstance(raw_brackets, list), "'brackets' must be a list")
        for i, rec in enumerate(raw_brackets):
            _need(isinstance(rec, dict), f"brackets[{i}] must be an object")
            bad = sorted(set(rec) - {"atoms", "mark"})
            _need(not bad, f"brackets[{i}] has unexpected key(s) {bad}")
            raw_atoms = rec.get("atoms")
            _need(
                isinstance(raw_atoms, list)
                and all(isinstance(x, int) and not isinstance(x, bool) for x in raw_atoms),
                f"brackets[{i}].atoms must be a list of atom ids",
            )
            mark = rec.get("mark")
            if isinstance(mark, (int, float)) and not isinstance(mark, bool):
                mark = str(mark)
            _need(isinstance(mark, str), f"brackets[{i}].mark must be a string or number")
            brackets.append(Bracket(raw_atoms, mark))

    graph = MolGraph(atoms, bonds, brackets)
    report = validate_graph(graph)
    if not report.ok:
        first = report.errors[0]
        raise _SchemaProblem(REASON_REFERENTIAL, f"{first.message} ({first.location})")
    return graph


def parse_prediction_document(
    raw: str, protocol: str, sample_id: str = ""
) -> Prediction:
    """Decode one raw model response under ``protocol``. Never raises.

    SMILES protocol: reads the ``smiles`` key (a null value is the model's
    own error contract and becomes ``model-declared-error``); a bare quoted
    string is accepted as the SMILES itself. Graph protocols: builds a
    :class:`MolGraph`, accepting only the six basic bond names under
    ``simplified_graph`` and the full vocabulary under ``graph``.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")

    def failed(reason: str, detail: str = "") -> Prediction:
        if detail:
            logger.debug("prediction %s failed (%s): %s", sample_id, reason, detail)
        return Prediction(
            sample_id=sample_id,
            protocol=protocol,
            raw_text=raw,
            parse_status=STATUS_FAILED,
            failure_reason=reason,
        )

    if not isinstance(raw, str) or not raw.strip():
        return failed(REASON_NOT_JSON, "empty response")

    candidate = repair_model_text(raw)
    repaired = candidate.strip() != raw.strip()

    doc, comma_fixed = _loads_tolerant(candidate)
    repaired = repaired or comma_fixed
    if doc is None:
        return failed(REASON_NOT_JSON)

    status = STATUS_REPAIRED if repaired else STATUS_OK

    try:
        if protocol == PROTOCOL_SMILES:
            if isinstance(doc, str):
                smiles = doc
            else:
                _need(isinstance(doc, dict), "payload must be a JSON object")
                _need("smiles" in doc, "payload needs a 'smiles' key")
                if doc["smiles"] is None:
                    return failed(REASON_MODEL_ERROR, str(doc.get("error", "")))
                _need(isinstance(doc["smiles"], str), "'smiles' must be a string")
                smiles = doc["smiles"]
            return Prediction(
                sample_id=sample_id,
                protocol=protocol,
                raw_text=raw,
                parse_status=status,
                smiles=smiles,
            )
        graph = _decode_graph_payload(doc, protocol)
        return Prediction(
            sample_id=sample_id,
            protocol=protocol,
            raw_text=raw,
            parse_status=status,
            graph=graph,
        )
    except _SchemaProblem as exc:
        return failed(exc.reason, str(exc))
    except Exception as exc:  # defensive: malformed input must never escape
        logger.warning("unexpected decode error for %s: %s", sample_id, exc)
        return failed(REASON_SCHEMA, f"unexpected: {exc}")
