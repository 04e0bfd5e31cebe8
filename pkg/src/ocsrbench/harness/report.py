"""
Report emission.

Three surfaces from the same run records: a machine-readable JSON report
(full per-sample detail, deterministic bytes), a CSV difficulty grid for
plotting, and a human comparison table with one row per model and one column
per protocol. Percentages are two decimals, half-up; "-" marks a protocol
that was not evaluated for a model, while "0.00" means evaluated and all
wrong.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from ..mosaic import LabelSet, difficulty_grid, round_percent
from .manifest import ManifestEntry
from .scoring import RunRecord

PROTOCOL_COLUMNS = (
    ("smiles", "SMILES"),
    ("simplified_graph", "Simplified Graph"),
    ("graph", "Graph"),
)


class DuplicateRunError(ValueError):
    def __init__(self, model: str, protocol: str):
        super().__init__(f"duplicate run key: {model!r} / {protocol!r}")


@dataclass(frozen=True)
class ReportFiles:
    json_path: Optional[Path] = None
    csv_path: Optional[Path] = None
    markdown_path: Optional[Path] = None

    def paths(self) -> list[Path]:
        return [p for p in (self.json_path, self.csv_path, self.markdown_path) if p]


def accuracy_cell(record: RunRecord) -> str:
    """Table cell for one run: 2-decimal percent, or "-" when nothing was
    evaluated under the protocol."""
    if record.evaluated == 0:
        return "-"
    return str(round_percent(record.matched, record.evaluated))


def _check_unique(records: Iterable[RunRecord]) -> dict[tuple[str, str], RunRecord]:
    keyed: dict[tuple[str, str], RunRecord] = {}
    for record in records:
        key = (record.model, record.protocol)
        if key in keyed:
            raise DuplicateRunError(record.model, record.protocol)
        keyed[key] = record
    return keyed


def render_comparison_table(records: list[RunRecord]) -> str:
    """Markdown table: model rows, protocol columns, dashes where absent."""
    keyed = _check_unique(records)
    models = sorted({record.model for record in records})
    lines = ["| Model | SMILES | Simplified Graph | Graph |", "| --- | --- | --- | --- |"]
    for model in models:
        cells = []
        for protocol, _ in PROTOCOL_COLUMNS:
            record = keyed.get((model, protocol))
            cells.append(accuracy_cell(record) if record else "-")
        lines.append("| " + " | ".join([model] + cells) + " |")
    return "\n".join(lines) + "\n"


def _labels_by_sample(manifest: Optional[list[ManifestEntry]]) -> dict[str, LabelSet]:
    if not manifest:
        return {}
    return {entry.sample_id: entry.labels for entry in manifest}


def _grid_rows(record: RunRecord, labels: dict[str, LabelSet]) -> list[dict]:
    evaluated = {r.sample_id: r.matched for r in record.results if r.evaluated}
    known = {sid: labels[sid] for sid in evaluated if sid in labels}
    if len(known) != len(evaluated):
        return []
    grid = difficulty_grid(evaluated, known)
    rows = []
    for score, (matched, population) in sorted(grid.items()):
        rows.append(
            {
                "n_vis": score.n_vis,
                "n_chem": score.n_chem,
                "population": population,
                "matched": matched,
                "accuracy": matched / population,
            }
        )
    return rows


def _failure_histogram(record: RunRecord) -> dict[str, int]:
    histogram: dict[str, int] = {}
    for r in record.results:
        if not r.evaluated or r.matched:
            continue
        key = r.reason or "unknown"
        if r.failure_reason:
            key = f"{key}:{r.failure_reason}"
        histogram[key] = histogram.get(key, 0) + 1
    return dict(sorted(histogram.items()))


def run_report_payload(
    record: RunRecord, manifest: Optional[list[ManifestEntry]] = None
) -> dict:
    """Deterministic machine payload for one run (no wall-clock fields)."""
    labels = _labels_by_sample(manifest)
    return {
        "run_id": record.run_id,
        "model": record.model,
        "protocol": record.protocol,
        "config": record.config,
        "evaluated": record.evaluated,
        "matched": record.matched,
        "accuracy_percent": accuracy_cell(record),
        "failure_reasons": _failure_histogram(record),
        "difficulty_grid": _grid_rows(record, labels),
        "per_sample": [r.to_json() for r in record.results],
    }


def emit_report(
    records: list[RunRecord],
    out_prefix: Path,
    manifest: Optional[list[ManifestEntry]] = None,
    formats: Iterable[str] = ("json", "csv", "md"),
) -> ReportFiles:
    """Write the requested report files next to ``out_prefix``.

    Multiple runs merge into one comparison table keyed by model name; two
    runs for the same model and protocol are an error.
    """
    keyed = _check_unique(records)
    ordered = [keyed[key] for key in sorted(keyed)]
    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    files = {}

    if "json" in formats:
        payload = {"runs": [run_report_payload(r, manifest) for r in ordered]}
        path = out_prefix.with_suffix(".json")
        path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=False) + "\n",
            encoding="utf-8",
        )
        files["json_path"] = path

    if "csv" in formats:
        labels = _labels_by_sample(manifest)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["model", "protocol", "n_vis", "n_chem", "population", "matched", "accuracy"]
        )
        for record in ordered:
            for row in _grid_rows(record, labels):
                writer.writerow(
                    [
                        record.model,
                        record.protocol,
                        row["n_vis"],
                        row["n_chem"],
                        row["population"],
                        row["matched"],
                        f"{row['accuracy']:.4f}",
                    ]
                )
        path = out_prefix.with_suffix(".csv")
        path.write_text(buffer.getvalue(), encoding="utf-8")
        files["csv_path"] = path

    if "md" in formats:
        path = out_prefix.with_suffix(".md")
        path.write_text(render_comparison_table(ordered), encoding="utf-8")
        files["markdown_path"] = path

    return ReportFiles(**files)
