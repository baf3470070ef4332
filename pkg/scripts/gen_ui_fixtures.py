#!/usr/bin/env python3
"""Record real API payloads for the frontend's vitest suite.

Drives the service in-process with the fan-out demo firmware and saves
every response the UI consumes, plus the library-level what-if metrics
used by the parity test. Re-run after changing the pipeline:

    python3 scripts/gen_ui_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from firmgraph.attackgraph import apply_patch, metrics
from firmgraph.pipeline import analyze_document, load_intel_bundle
from firmgraph.rules import get_ruleset
from firmgraph.service import ServiceSettings, create_app

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
OUT = ROOT / "frontend" / "test" / "fixtures"


def _write(name: str, payload) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT / name}")


def main() -> None:
    upload = {
        "fW_name": "FANOUT_DEMO",
        "graph": json.loads((DATA / "fanout_graph.json").read_text())["graph"],
        "extra_facts": "bugHyp(httpd, 'LOCAL', 'Undefined').\n",
        "auto_hypotheses": False,
    }
    settings = ServiceSettings(
        cve_db=str(DATA / "fanout_cves.json"),
        epss=str(DATA / "fanout_epss.csv"),
        kev=str(DATA / "fanout_kev.json"),
    )
    client = TestClient(create_app(settings))

    base = client.post("/api/firmware", json=upload).json()
    base_id = base["snapshot_id"]
    whatif = client.post(
        f"/api/snapshots/{base_id}/whatif", json={"patched": ["bzip2"]}
    ).json()
    child_id = whatif["snapshot"]["snapshot_id"]

    _write("upload_request.json", upload)
    _write("base_snapshot.json", base)
    _write("base_graph.json",
           client.get(f"/api/snapshots/{base_id}/graph?format=json").json())
    _write("base_risk.json",
           client.get(f"/api/snapshots/{base_id}/risk").json())
    _write("whatif_bzip2.json", whatif)
    _write("child_graph.json",
           client.get(f"/api/snapshots/{child_id}/graph?format=json").json())
    _write("child_risk.json",
           client.get(f"/api/snapshots/{child_id}/risk").json())
    _write("paths_zip.json",
           client.get(f"/api/snapshots/{base_id}/paths",
                      params={"target": "zip"}).json())
    _write("paths_wget.json",
           client.get(f"/api/snapshots/{base_id}/paths",
                      params={"target": "wget"}).json())

    # library-level reference for the UI parity test
    bundle = load_intel_bundle(
        str(DATA / "fanout_cves.json"),
        str(DATA / "fanout_epss.csv"),
        str(DATA / "fanout_kev.json"),
    )
    result = analyze_document(
        {"fW_name": upload["fW_name"], "graph": upload["graph"]},
        None,
        bundle,
        get_ruleset("combined"),
        auto_hypotheses=False,
        extra_facts_text=upload["extra_facts"],
    )
    patched = apply_patch(result.ag, ["bzip2"])
    _write(
        "library_whatif_metrics.json",
        {
            "base_metrics": metrics(result.ag).as_dict(),
            "patched_metrics": metrics(patched).as_dict(),
            "base_node_count": result.ag.node_count,
            "patched_node_count": patched.node_count,
        },
    )


if __name__ == "__main__":
    main()
