"""Immutable analysis snapshots and their in-memory (optionally
directory-backed) store.

A snapshot captures one firmware analysis plus an active patch set.
What-if actions never mutate a snapshot; they derive a child whose id is
the content hash of the same inputs with the extended patch set, so
identical requests land on identical ids.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..attackgraph import AgMetrics, AttackGraph
from ..risk import BinaryRiskRow


@dataclass(frozen=True)
class AnalysisSnapshot:
    id: str
    parent_id: str | None
    fw_name: str
    ruleset: str
    inputs_digest: str
    patched: tuple[str, ...]
    ag: AttackGraph
    metrics: AgMetrics
    risk_rows: tuple[BinaryRiskRow, ...]
    graph_json: str
    graph_dot: str


def inputs_digest(facts_text: str, ruleset: str) -> str:
    payload = json.dumps({"facts": facts_text, "ruleset": ruleset})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def snapshot_id(digest: str, patched: tuple[str, ...]) -> str:
    payload = json.dumps({"inputs": digest, "patched": sorted(patched)})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class SnapshotStore:
    """Concurrent map of immutable snapshots."""

    def __init__(self, persist_dir: str | None = None) -> None:
        self._lock = threading.Lock()
        self._snapshots: dict[str, AnalysisSnapshot] = {}
        self._persist_dir = Path(persist_dir) if persist_dir else None
        if self._persist_dir:
            self._persist_dir.mkdir(parents=True, exist_ok=True)

    def get(self, snapshot_id_: str) -> AnalysisSnapshot | None:
        with self._lock:
            return self._snapshots.get(snapshot_id_)

    def put(self, snapshot: AnalysisSnapshot) -> AnalysisSnapshot:
        with self._lock:
            existing = self._snapshots.get(snapshot.id)
            if existing is not None:
                return existing
            self._snapshots[snapshot.id] = snapshot
        self._persist(snapshot)
        return snapshot

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._snapshots)

    def _persist(self, snapshot: AnalysisSnapshot) -> None:
        if not self._persist_dir:
            return
        record = {
            "id": snapshot.id,
            "parent_id": snapshot.parent_id,
            "fw_name": snapshot.fw_name,
            "ruleset": snapshot.ruleset,
            "inputs_digest": snapshot.inputs_digest,
            "patched": list(snapshot.patched),
            "metrics": snapshot.metrics.as_dict(),
            "risk_rows": [row.as_dict() for row in snapshot.risk_rows],
            "graph": json.loads(snapshot.graph_json),
        }
        path = self._persist_dir / f"{snapshot.id}.json"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        tmp.replace(path)
