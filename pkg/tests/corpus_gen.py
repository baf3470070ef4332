"""Deterministic synthetic firmware corpus for corpus-level tests.

Binaries are drawn from a pool that mixes names with known CVE records
(in tests/data/fanout_cves.json) and neutral names with none; a firmware
without any CVE-carrying binary can never produce an attack graph.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

CVE_BINARIES = ["bzip2", "dnsmasq", "openvpn", "wget", "unzip", "zip"]
NEUTRAL_BINARIES = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
FLOW_TYPES = ["socket", "exec", "environment", "file"]


def _firmware_doc(rng: random.Random, name: str, *, with_cves: bool) -> dict:
    pool = list(NEUTRAL_BINARIES)
    if with_cves:
        pool += rng.sample(CVE_BINARIES, k=rng.randint(1, len(CVE_BINARIES)))
    count = rng.randint(2, len(pool))
    binaries = rng.sample(pool, k=count)

    graph: dict = {}
    for binary in binaries:
        peers = []
        for peer in binaries:
            if peer != binary and rng.random() < 0.3:
                peers.append(
                    {"name": peer, "type": rng.choice(FLOW_TYPES), "info": ""}
                )
        if rng.random() < (0.5 if with_cves else 0.0):
            peers.append(
                {"name": "INTERNET", "type": "border_binary", "info": ""}
            )
        graph[binary] = {"peers": peers, "version": []}
    return {"fW_name": name, "graph": graph}


def write_corpus(directory: Path, *, size: int = 25, seed: int = 2025,
                 empty_count: int = 5) -> list[Path]:
    """Write ``size`` firmware documents; the first ``empty_count`` can
    never yield an attack graph."""
    directory.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    paths = []
    for i in range(size):
        with_cves = i >= empty_count
        doc = _firmware_doc(rng, f"synthetic_{i:02d}", with_cves=with_cves)
        path = directory / f"synthetic_{i:02d}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True))
        paths.append(path)
    return paths
