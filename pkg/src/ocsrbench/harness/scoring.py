"""
Scoring pipeline: raw prediction records -> per-sample verdicts.

Pure given its inputs: identical manifest, predictions, and configuration
produce identical run records (timestamps are informational and excluded
from hashing and reports). Missing predictions count against accuracy; the
denominator never shrinks, except that the SMILES protocol only evaluates
samples whose ground truth has a SMILES rendering at all.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from ..matching import (
    MatchConfig,
    REASON_PARSE_FAILED,
    graph_exact_match,
    simplified_graph_match,
    smiles_match,
)
from ..predictions import (
    PROTOCOL_GRAPH,
    PROTOCOL_SIMPLIFIED,
    PROTOCOL_SMILES,
    PROTOCOLS,
    parse_prediction_document,
)
from .manifest import ManifestEntry


class InputError(ValueError):
    """Caller handed inconsistent inputs (e.g. wrong-protocol predictions)."""


@dataclass(frozen=True)
class SampleResult:
    sample_id: str
    evaluated: bool
    matched: bool
    reason: Optional[str] = None  # mismatch reason when evaluated and unmatched
    parse_status: str = "ok"  # ok | repaired | failed | missing
    failure_reason: Optional[str] = None

    def to_json(self) -> dict:
        out: dict = {
            "sample_id": self.sample_id,
            "evaluated": self.evaluated,
            "matched": self.matched,
            "parse_status": self.parse_status,
        }
        if self.reason:
            out["reason"] = self.reason
        if self.failure_reason:
            out["failure_reason"] = self.failure_reason
        return out

    @staticmethod
    def from_json(data: dict) -> "SampleResult":
        return SampleResult(
            sample_id=data["sample_id"],
            evaluated=data["evaluated"],
            matched=data["matched"],
            reason=data.get("reason"),
            parse_status=data.get("parse_status", "ok"),
            failure_reason=data.get("failure_reason"),
        )


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    model: str
    protocol: str
    config: dict
    results: tuple[SampleResult, ...]
    started_at: str
    finished_at: str

    @property
    def evaluated(self) -> int:
        return sum(1 for r in self.results if r.evaluated)

    @property
    def matched(self) -> int:
        return sum(1 for r in self.results if r.evaluated and r.matched)

    def result_map(self) -> dict[str, SampleResult]:
        return {r.sample_id: r for r in self.results}

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "model": self.model,
            "protocol": self.protocol,
            "config": self.config,
            "results": [r.to_json() for r in self.results],
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @staticmethod
    def from_json(data: dict) -> "RunRecord":
        return RunRecord(
            run_id=data["run_id"],
            model=data["model"],
            protocol=data["protocol"],
            config=data["config"],
            results=tuple(SampleResult.from_json(r) for r in data["results"]),
            started_at=data["started_at"],
            finished_at=data["finished_at"],
        )


def read_predictions(path: Path) -> dict[str, dict]:
    """Load a prediction sink (one ``{sample_id, raw, meta}`` per line)."""
    records: dict[str, dict] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"predictions line {line_no}: not valid JSON: {exc.msg}")
            if not isinstance(record, dict) or "sample_id" not in record:
                raise InputError(f"predictions line {line_no}: missing sample_id")
            records[record["sample_id"]] = record
    return records


def _content_run_id(model: str, protocol: str, config: dict, results: list[SampleResult]) -> str:
    payload = json.dumps(
        {
            "model": model,
            "protocol": protocol,
            "config": config,
            "results": [r.to_json() for r in results],
        },
        sort_keys=True,
    )
    return "r-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def score_run(
    manifest: Iterable[ManifestEntry],
    predictions: dict[str, dict],
    protocol: str,
    cfg: MatchConfig = MatchConfig(),
    model: str = "unknown-model",
) -> RunRecord:
    """Score one prediction set against the manifest under one protocol."""
    if protocol not in PROTOCOLS:
        raise InputError(f"unknown protocol {protocol!r}")

    started = datetime.now(timezone.utc).isoformat()
    results: list[SampleResult] = []

    for entry in manifest:
        record = predictions.get(entry.sample_id)
        if record is not None:
            meta = record.get("meta") or {}
            rec_protocol = meta.get("protocol")
            if rec_protocol is not None and rec_protocol != protocol:
                raise InputError(
                    f"prediction for {entry.sample_id} was collected under "
                    f"{rec_protocol!r}, cannot score as {protocol!r}"
                )

        if protocol == PROTOCOL_SMILES and not entry.has_smiles:
            results.append(
                SampleResult(
                    sample_id=entry.sample_id,
                    evaluated=False,
                    matched=False,
                    parse_status="ok" if record else "missing",
                )
            )
            continue

        raw = record.get("raw") if record else None
        if raw is None:
            results.append(
                SampleResult(
                    sample_id=entry.sample_id,
                    evaluated=True,
                    matched=False,
                    reason=REASON_PARSE_FAILED,
                    parse_status="missing",
                )
            )
            continue

        prediction = parse_prediction_document(raw, protocol, entry.sample_id)
        if prediction.failed:
            results.append(
                SampleResult(
                    sample_id=entry.sample_id,
                    evaluated=True,
                    matched=False,
                    reason=REASON_PARSE_FAILED,
                    parse_status="failed",
                    failure_reason=prediction.failure_reason,
                )
            )
            continue

        if protocol == PROTOCOL_SMILES:
            outcome = smiles_match(prediction.smiles, entry.smiles, cfg)
        elif protocol == PROTOCOL_SIMPLIFIED:
            outcome = simplified_graph_match(prediction.graph, entry.graph, cfg)
        elif protocol == PROTOCOL_GRAPH:
            outcome = graph_exact_match(prediction.graph, entry.graph, cfg)
        else:  # pragma: no cover
            raise AssertionError(protocol)

        results.append(
            SampleResult(
                sample_id=entry.sample_id,
                evaluated=True,
                matched=outcome.matched,
                reason=outcome.reason,
                parse_status=prediction.parse_status,
            )
        )

    config = {"match": cfg.to_json(), "protocol": protocol}
    run_id = _content_run_id(model, protocol, config, results)
    finished = datetime.now(timezone.utc).isoformat()
    return RunRecord(
        run_id=run_id,
        model=model,
        protocol=protocol,
        config=config,
        results=tuple(results),
        started_at=started,
        finished_at=finished,
    )
