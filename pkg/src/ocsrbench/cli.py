"""
Command-line interface.

Subcommands: ``validate``, ``convert``, ``collect``, ``score``, ``report``,
``mosaic-stats``. Exit codes: 0 success, 1 operational error, 2 usage error.
Every subcommand accepts ``--json`` for machine-readable stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .carbon import (
    CarbonForm,
    CarbonParseError,
    CarbonSchemaError,
    emit_carbon,
    parse_carbon,
)
from .gateway import (
    EndpointConfig,
    GatewayStartupError,
    default_exemplar,
    run_collection,
)
from .graphops import ConfigurationError
from .harness import (
    DuplicateRunError,
    InputError,
    ManifestError,
    RunStore,
    StoreBusyError,
    emit_report,
    load_manifest,
    read_manifest,
    score_run,
)
from .harness.report import render_comparison_table, run_report_payload
from .harness.scoring import read_predictions
from .matching import MatchConfig
from .molfile import MolfileParseError, parse_molfile_v2000
from .molgraph import validate_graph
from .mosaic import (
    UndefinedStatisticError,
    cooccurrence_matrix,
    coverage_stats,
    distribution_matrix,
)
from .predictions import PROTOCOLS
from .smiles import (
    NotSmilesExpressibleError,
    SmilesParseError,
    emit_canonical_smiles,
    parse_smiles,
)

_OPERATIONAL_ERRORS = (
    CarbonParseError,
    CarbonSchemaError,
    ConfigurationError,
    DuplicateRunError,
    GatewayStartupError,
    InputError,
    ManifestError,
    MolfileParseError,
    NotSmilesExpressibleError,
    SmilesParseError,
    StoreBusyError,
    UndefinedStatisticError,
    OSError,
)


def _emit(args: argparse.Namespace, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    elif human:
        print(human)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.manifest:
        entries, errors = read_manifest(Path(args.manifest))
        payload = {
            "manifest": str(args.manifest),
            "entries": len(entries),
            "errors": [str(e) for e in errors],
            "ok": not errors,
        }
        lines = [f"{len(entries)} valid entr{'y' if len(entries) == 1 else 'ies'}"]
        lines += [f"error: {e}" for e in errors]
        _emit(args, payload, "\n".join(lines))
        return 0 if not errors else 1

    text = Path(args.carbon).read_text("utf-8")
    graph, form = parse_carbon(text, strict=args.strict)
    report = validate_graph(graph)
    payload = {
        "carbon": str(args.carbon),
        "form": form.value,
        "atoms": len(graph.atoms),
        "bonds": len(graph.bonds),
        **report.to_json(),
    }
    human = (
        f"{form.value} document: {len(graph.atoms)} atoms, {len(graph.bonds)} bonds, "
        f"{'ok' if report.ok else 'INVALID'}"
    )
    _emit(args, payload, human)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

_FORM_NAMES = {
    "atom-centric": CarbonForm.ATOM_CENTRIC,
    "attribute-centric": CarbonForm.ATTRIBUTE_CENTRIC,
}


def _read_input_graph(path: Path, source: str, strict: bool):
    text = path.read_text("utf-8")
    if source == "auto":
        name = path.name.lower()
        if name.endswith(".mol") or " v2000" in text[:400].lower():
            source = "molfile"
        elif name.endswith(".smi"):
            source = "smiles"
        else:
            source = "carbon"
    if source == "molfile":
        return parse_molfile_v2000(text)
    if source == "smiles":
        return parse_smiles(text.strip())
    graph, _ = parse_carbon(text, strict=strict)
    return graph


def _cmd_convert(args: argparse.Namespace) -> int:
    path = Path(args.input)
    graph = _read_input_graph(path, args.from_format, args.strict)
    if args.to == "smiles":
        output = emit_canonical_smiles(graph) + "\n"
    else:
        form = _FORM_NAMES["atom-centric" if args.to == "carbon" else args.to]
        output = emit_carbon(graph, form)
    if args.output:
        Path(args.output).write_text(output, encoding="utf-8")
        _emit(
            args,
            {"input": str(path), "output": str(args.output), "to": args.to},
            f"wrote {args.output}",
        )
    else:
        if args.json:
            print(json.dumps({"to": args.to, "content": output}))
        else:
            sys.stdout.write(output)
    return 0


# ---------------------------------------------------------------------------
# collect
# ---------------------------------------------------------------------------


def _cmd_collect(args: argparse.Namespace) -> int:
    manifest_path = Path(args.manifest)
    entries = load_manifest(manifest_path, strict=True)
    base = manifest_path.parent
    samples = [(e.sample_id, base / e.image) for e in entries]

    cfg = EndpointConfig(
        base_url=args.endpoint,
        model_name=args.model,
        api_key_env=args.api_key_env,
        timeout_s=args.timeout,
        max_concurrency=args.max_concurrency,
        max_retries=args.max_retries,
        requests_per_minute=args.rpm,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        backoff_base_s=args.backoff_base,
    )
    bond = Path(args.bond_exemplar) if args.bond_exemplar else None
    case = Path(args.case_exemplar) if args.case_exemplar else None
    if args.protocol == "graph":
        bond = bond or default_exemplar("bond")
        case = case or default_exemplar("case")

    summary = run_collection(
        cfg,
        samples,
        args.protocol,
        Path(args.out),
        bond_exemplar=bond,
        case_exemplar=case,
    )
    payload = {"out": str(args.out), **summary.to_json()}
    _emit(
        args,
        payload,
        f"collected {summary.ok} ok, {summary.failed} failed, {summary.skipped} skipped"
        f" -> {args.out}",
    )
    return 0


# ---------------------------------------------------------------------------
# score / report
# ---------------------------------------------------------------------------


def _match_config(args: argparse.Namespace) -> MatchConfig:
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text("utf-8"))
        cfg = MatchConfig.from_json(data)
    else:
        cfg = MatchConfig()
    overrides = {}
    if getattr(args, "ignore_stereo", False):
        overrides["compare_stereo"] = False
    if getattr(args, "no_aromatic_normalize", False):
        overrides["aromatic_normalize_smiles"] = False
    if getattr(args, "no_placeholder_equivalence", False):
        overrides["placeholder_alpha_equivalence"] = False
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _cmd_score(args: argparse.Namespace) -> int:
    manifest = load_manifest(Path(args.manifest), strict=not args.lenient)
    predictions = read_predictions(Path(args.pred))
    cfg = _match_config(args)
    record = score_run(manifest, predictions, args.protocol, cfg, model=args.model)

    if args.store:
        RunStore(Path(args.store)).store_run(record)
    files = []
    if args.out:
        emitted = emit_report([record], Path(args.out), manifest=manifest)
        files = [str(p) for p in emitted.paths()]

    payload = run_report_payload(record, manifest)
    if not args.full:
        payload = {k: v for k, v in payload.items() if k != "per_sample"}
    if files:
        payload["report_files"] = files
    human = (
        f"{record.model} / {record.protocol}: {record.matched}/{record.evaluated} "
        f"matched ({payload['accuracy_percent']}%)"
    )
    _emit(args, payload, human)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    store = RunStore(Path(args.store))
    run_ids = args.run or store.list_runs()
    records = [store.load_run(run_id) for run_id in run_ids]
    manifest = load_manifest(Path(args.manifest)) if args.manifest else None
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    emitted = emit_report(records, Path(args.out), manifest=manifest, formats=formats)
    payload = {
        "runs": [r.run_id for r in records],
        "files": [str(p) for p in emitted.paths()],
    }
    _emit(
        args,
        payload,
        render_comparison_table(records)
        + "\n".join(f"wrote {p}" for p in emitted.paths()),
    )
    return 0


# ---------------------------------------------------------------------------
# mosaic-stats
# ---------------------------------------------------------------------------


def _cmd_mosaic_stats(args: argparse.Namespace) -> int:
    entries = load_manifest(Path(args.manifest), strict=not args.lenient)
    labels = [e.labels for e in entries]
    matrix = distribution_matrix(labels)
    coverage = coverage_stats(labels)
    cooccur = cooccurrence_matrix(labels)

    payload = {
        "total": matrix.total,
        "coverage": {
            "pct_at_least_one_label": coverage.pct_at_least_one_label,
            "pct_both_dimensions": coverage.pct_both_dimensions,
        },
        "distribution": matrix.to_rows(),
        "cooccurrence": [
            {"visual": v.wire_name, "chemical": c.wire_name, "count": n}
            for (v, c), n in sorted(cooccur.items())
        ],
    }

    if args.out:
        out_prefix = Path(args.out)
        out_prefix.parent.mkdir(parents=True, exist_ok=True)
        json_path = out_prefix.with_suffix(".json")
        json_path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        csv_path = out_prefix.with_suffix(".csv")
        lines = ["n_vis,n_chem,count"]
        lines += [
            f"{row['n_vis']},{row['n_chem']},{row['count']}" for row in matrix.to_rows()
        ]
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        payload["files"] = [str(json_path), str(csv_path)]

    human = (
        f"{matrix.total} samples; {coverage.pct_at_least_one_label:.2f}% carry at least "
        f"one difficulty label; {coverage.pct_both_dimensions:.2f}% carry both dimensions"
    )
    _emit(args, payload, human)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocsrbench",
        description="CARBON molecular representation, MOSAIC difficulty metric, "
        "and a three-protocol OCSR benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("validate", help="check a manifest or CARBON document")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--manifest", help="manifest JSONL path")
    group.add_argument("--carbon", help="CARBON document path")
    p.add_argument("--strict", action="store_true", help="reject unknown fields")
    add_common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("convert", help="convert between CARBON forms, SMILES, MolFile")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--to",
        required=True,
        choices=["atom-centric", "attribute-centric", "carbon", "smiles"],
    )
    p.add_argument(
        "--from",
        dest="from_format",
        default="auto",
        choices=["auto", "carbon", "molfile", "smiles"],
    )
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--strict", action="store_true", help="reject unknown CARBON fields")
    add_common(p)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("collect", help="collect predictions from a model endpoint")
    p.add_argument("--manifest", required=True)
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--endpoint", required=True, help="API base URL")
    p.add_argument("--model", required=True, help="model name for the request body")
    p.add_argument("--out", required=True, help="prediction sink (JSONL, appended)")
    p.add_argument("--api-key-env", default="OCSRBENCH_API_KEY")
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--max-concurrency", type=int, default=4)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--rpm", type=int, default=None, help="requests per minute")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-tokens", type=int, default=8192)
    p.add_argument("--backoff-base", type=float, default=2.0)
    p.add_argument("--bond-exemplar", help="bond exemplar image (graph protocol)")
    p.add_argument("--case-exemplar", help="case exemplar image (graph protocol)")
    add_common(p)
    p.set_defaults(func=_cmd_collect)

    p = sub.add_parser("score", help="score predictions against the manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred", required=True, help="prediction JSONL")
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--model", default="unknown-model")
    p.add_argument("--out", help="report file prefix (writes .json/.csv/.md)")
    p.add_argument("--store", help="run store directory")
    p.add_argument("--config", help="harness configuration JSON (match settings)")
    p.add_argument("--ignore-stereo", action="store_true")
    p.add_argument("--no-aromatic-normalize", action="store_true")
    p.add_argument("--no-placeholder-equivalence", action="store_true")
    p.add_argument(
        "--lenient", action="store_true", help="skip malformed manifest entries"
    )
    p.add_argument("--full", action="store_true", help="include per-sample rows")
    add_common(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("report", help="render reports from stored runs")
    p.add_argument("--store", required=True)
    p.add_argument("--run", action="append", help="run id (repeatable; default all)")
    p.add_argument("--manifest", help="manifest for difficulty grids")
    p.add_argument("--out", required=True, help="report file prefix")
    p.add_argument("--formats", default="json,csv,md")
    add_common(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("mosaic-stats", help="difficulty-label statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="stats file prefix (writes .json/.csv)")
    p.add_argument(
        "--lenient", action="store_true", help="skip malformed manifest entries"
    )
    add_common(p)
    p.set_defaults(func=_cmd_mosaic_stats)

    return parser


def cli_main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _OPERATIONAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
