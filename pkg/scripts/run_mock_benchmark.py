"""End-to-end demo against the bundled mock endpoint.

Builds a 3-sample manifest with inline CARBON ground truth, serves canned
model answers from a local mock server, collects predictions under all three
protocols, scores them, and prints the comparison table. No network, no API
key, finishes in seconds.

Usage: python scripts/run_mock_benchmark.py [workdir]
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

from ocsrbench.carbon import CarbonForm, emit_carbon
from ocsrbench.gateway import EndpointConfig, run_collection
from ocsrbench.harness import emit_report, load_manifest, score_run
from ocsrbench.harness.report import render_comparison_table
from ocsrbench.harness.scoring import read_predictions
from ocsrbench.mockserver import MockChatEndpoint, image_key
from ocsrbench.smiles import parse_smiles

GROUND_TRUTH = {"s0": "CCO", "s1": "c1ccccc1", "s2": "CC(C)=O"}


def graph_answer(smiles: str, protocol: str, wrong: bool = False) -> str:
    g = parse_smiles(smiles)
    atoms = [
        {"id": a.id, "atom": a.label.to_wire(), "point_2d": [a.id * 10, 0]}
        for a in g.atoms
    ]
    if wrong and atoms:
        atoms[0]["atom"] = "Xe"
    bonds = [
        {"atom1": b.atom1, "atom2": b.atom2, "bond_type": b.bond_type.value}
        for b in g.bonds
    ]
    body = {"atoms": atoms, "bonds": bonds}
    if protocol == "graph":
        body["brackets"] = []
    return json.dumps(body)


def main() -> None:
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="ocsrbench-demo-"))
    workdir.mkdir(parents=True, exist_ok=True)
    os.environ.setdefault("OCSRBENCH_API_KEY", "demo-key")

    images = {}
    with (workdir / "manifest.jsonl").open("w") as manifest:
        for sid, smiles in GROUND_TRUTH.items():
            image = workdir / f"{sid}.png"
            image.write_bytes(b"demo image " + sid.encode())
            images[sid] = image
            manifest.write(
                json.dumps(
                    {
                        "sample_id": sid,
                        "image": image.name,
                        "carbon": json.loads(
                            emit_carbon(parse_smiles(smiles), CarbonForm.ATOM_CENTRIC)
                        ),
                        "smiles": smiles,
                        "visual_labels": ["blurry_image"] if sid == "s1" else [],
                        "chemical_labels": ["polymer"] if sid == "s2" else [],
                    }
                )
                + "\n"
            )

    canned = {
        "smiles": {
            image_key(images["s0"]): '{"smiles": "OCC"}',
            image_key(images["s1"]): '{"smiles": "C1=CC=CC=C1"}',
            image_key(images["s2"]): '{"smiles": null, "error": "Unable to recognize a chemical structure."}',
        },
        "simplified_graph": {
            image_key(images[sid]): graph_answer(smiles, "simplified_graph", wrong=(sid == "s2"))
            for sid, smiles in GROUND_TRUTH.items()
        },
        "graph": {
            image_key(images[sid]): graph_answer(smiles, "graph", wrong=(sid == "s2"))
            for sid, smiles in GROUND_TRUTH.items()
        },
    }

    manifest_entries = load_manifest(workdir / "manifest.jsonl")
    samples = [(e.sample_id, workdir / e.image) for e in manifest_entries]
    exemplar = workdir / "exemplar.png"
    exemplar.write_bytes(b"exemplar placeholder")

    records = []
    for protocol, responses in canned.items():
        with MockChatEndpoint(responses) as server:
            cfg = EndpointConfig(
                base_url=server.url,
                model_name="mock-model",
                timeout_s=10,
                max_concurrency=3,
                backoff_base_s=0.05,
            )
            sink = workdir / f"predictions-{protocol}.jsonl"
            summary = run_collection(
                cfg, samples, protocol, sink, bond_exemplar=exemplar, case_exemplar=exemplar
            )
            print(f"{protocol}: collected {summary.to_json()}")
        records.append(
            score_run(manifest_entries, read_predictions(sink), protocol, model="mock-model")
        )

    files = emit_report(records, workdir / "report", manifest=manifest_entries)
    print()
    print(render_comparison_table(records))
    print(f"artifacts in {workdir}")
    for path in files.paths():
        print(f"  {path}")


if __name__ == "__main__":
    main()
