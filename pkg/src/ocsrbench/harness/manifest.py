"""
Ground-truth manifest ingestion.

One JSON object per line with fields: ``sample_id``, ``image``, ``carbon``
(inline CARBON object, or a path relative to the manifest), optional
``smiles``, ``visual_labels``, ``chemical_labels``, and an optional
``source`` object (``journal`` / ``paper`` / ``figure``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..carbon import parse_carbon
from ..molgraph import MolGraph
from ..mosaic import LabelSet, UnknownLabelError
from ..smiles import SmilesParseError, parse_smiles


class ManifestError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class Source:
    journal: Optional[str] = None
    paper: Optional[str] = None
    figure: Optional[str] = None

    def to_json(self) -> dict:
        out = {}
        if self.journal:
            out["journal"] = self.journal
        if self.paper:
            out["paper"] = self.paper
        if self.figure:
            out["figure"] = self.figure
        return out


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    image: str
    carbon_text: str
    graph: MolGraph = field(repr=False)
    smiles: Optional[str] = None
    labels: LabelSet = field(default_factory=LabelSet)
    source: Source = field(default_factory=Source)

    @property
    def has_smiles(self) -> bool:
        return self.smiles is not None


def _decode_entry(data: dict, line: int, base_dir: Path) -> ManifestEntry:
    if not isinstance(data, dict):
        raise ManifestError("entry must be a JSON object", line)
    sample_id = data.get("sample_id")
    if not isinstance(sample_id, str) or not sample_id:
        raise ManifestError("missing or empty sample_id", line)
    image = data.get("image")
    if not isinstance(image, str) or not image:
        raise ManifestError(f"{sample_id}: missing image path", line)

    carbon = data.get("carbon")
    if isinstance(carbon, dict):
        carbon_text = json.dumps(carbon, ensure_ascii=False)
    elif isinstance(carbon, str):
        carbon_path = base_dir / carbon
        try:
            carbon_text = carbon_path.read_text("utf-8")
        except OSError as exc:
            raise ManifestError(f"{sample_id}: cannot read carbon file: {exc}", line)
    else:
        raise ManifestError(f"{sample_id}: carbon must be an object or a path", line)

    try:
        graph, _ = parse_carbon(carbon_text)
    except ValueError as exc:
        raise ManifestError(f"{sample_id}: bad ground-truth carbon: {exc}", line)

    smiles = data.get("smiles")
    if smiles is not None:
        if not isinstance(smiles, str):
            raise ManifestError(f"{sample_id}: smiles must be a string", line)
        try:
            parse_smiles(smiles)
        except SmilesParseError as exc:
            raise ManifestError(f"{sample_id}: bad ground-truth smiles: {exc}", line)

    try:
        labels = LabelSet.from_names(
            visual=data.get("visual_labels", []) or [],
            chemical=data.get("chemical_labels", []) or [],
        )
    except UnknownLabelError as exc:
        raise ManifestError(f"{sample_id}: {exc}", line)

    raw_source = data.get("source") or {}
    if not isinstance(raw_source, dict):
        raise ManifestError(f"{sample_id}: source must be an object", line)
    source = Source(
        journal=raw_source.get("journal"),
        paper=raw_source.get("paper"),
        figure=raw_source.get("figure"),
    )

    return ManifestEntry(
        sample_id=sample_id,
        image=image,
        carbon_text=carbon_text,
        graph=graph,
        smiles=smiles,
        labels=labels,
        source=source,
    )


def read_manifest(path: Path) -> tuple[list[ManifestEntry], list[ManifestError]]:
    """Lenient read: decode every line, collecting all problems."""
    path = Path(path)
    entries: list[ManifestEntry] = []
    errors: list[ManifestError] = []
    seen: set[str] = set()
    base_dir = path.parent
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(ManifestError(f"not valid JSON: {exc.msg}", line_no))
                continue
            try:
                entry = _decode_entry(data, line_no, base_dir)
            except ManifestError as exc:
                errors.append(exc)
                continue
            if entry.sample_id in seen:
                errors.append(
                    ManifestError(f"duplicate sample_id {entry.sample_id!r}", line_no)
                )
                continue
            seen.add(entry.sample_id)
            entries.append(entry)
    return entries, errors


def load_manifest(path: Path, strict: bool = True) -> list[ManifestEntry]:
    """Load and validate a manifest.

    Strict mode raises on the first malformed entry (with its line number);
    lenient mode returns the valid entries and ignores broken lines (use
    :func:`read_manifest` to inspect the collected errors).
    """
    entries, errors = read_manifest(path)
    if strict and errors:
        raise errors[0]
    return entries
