"""HTTP API for interactive analysis sessions.

Endpoints:

* ``POST /api/firmware`` — run the pipeline on an uploaded graph
  document; returns a snapshot id plus metrics.
* ``GET /api/snapshots/{id}/graph?format=json|dot`` — export the graph.
* ``POST /api/snapshots/{id}/whatif`` — derive a child snapshot with more
  binaries patched; the parent is immutable.
* ``GET /api/snapshots/{id}/risk`` — per-binary risk rows (single-graph
  occurrences).
* ``GET /api/snapshots/{id}/paths?target=...`` — attack paths to a
  binary, for highlighting.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware

from ..attackgraph import (
    AttackGraph,
    UnknownTargetError,
    apply_patch,
    enumerate_paths,
    export_dot,
    export_json,
    metrics,
)
from ..errors import FirmgraphError
from ..pipeline import IntelBundle, analyze_document, facts_text, load_intel_bundle
from ..risk import binary_risk_table
from ..rules import get_ruleset
from ..vulnintel import VulnMatch
from .schemas import (
    FirmwareUpload,
    MetricsOut,
    PathOut,
    RiskRowOut,
    SnapshotOut,
    WhatifIn,
    WhatifOut,
)
from .store import AnalysisSnapshot, SnapshotStore, inputs_digest, snapshot_id


@dataclass
class ServiceSettings:
    cve_db: str
    epss: str | None = None
    kev: str | None = None
    ruleset: str = "combined"
    derivation_cap: int = 1_000_000
    ui_dir: str | None = None
    persist_dir: str | None = None
    cors_origins: tuple[str, ...] = ("*",)


class _State:
    def __init__(self, settings: ServiceSettings) -> None:
        self.settings = settings
        self.store = SnapshotStore(settings.persist_dir)
        self.matches: dict[str, tuple[VulnMatch, ...]] = {}
        self._bundle: IntelBundle | None = None
        self._lock = threading.Lock()

    def bundle(self) -> IntelBundle:
        with self._lock:
            if self._bundle is None:
                try:
                    self._bundle = load_intel_bundle(
                        self.settings.cve_db,
                        self.settings.epss,
                        self.settings.kev,
                    )
                except (OSError, FirmgraphError) as exc:
                    raise HTTPException(
                        status_code=503,
                        detail=f"vulnerability intelligence unavailable: {exc}",
                    )
            return self._bundle


def _snapshot_out(snapshot: AnalysisSnapshot) -> SnapshotOut:
    return SnapshotOut(
        snapshot_id=snapshot.id,
        parent_id=snapshot.parent_id,
        fw_name=snapshot.fw_name,
        ruleset=snapshot.ruleset,
        patched=sorted(snapshot.patched),
        metrics=MetricsOut(**snapshot.metrics.as_dict()),
        goal_binaries=list(snapshot.ag.goal_binaries()),
        node_count=snapshot.ag.node_count,
    )


def _risk_rows(state: _State, snapshot: AnalysisSnapshot) -> list[RiskRowOut]:
    return [RiskRowOut(**row.as_dict()) for row in snapshot.risk_rows]


def _build_snapshot(
    state: _State,
    *,
    parent: AnalysisSnapshot | None,
    fw_name: str,
    ruleset_name: str,
    digest: str,
    patched: tuple[str, ...],
    ag: AttackGraph,
    matches: tuple[VulnMatch, ...],
) -> AnalysisSnapshot:
    rows = binary_risk_table([(ag, list(matches))], state.bundle().intel)
    snapshot = AnalysisSnapshot(
        id=snapshot_id(digest, patched),
        parent_id=parent.id if parent else None,
        fw_name=fw_name,
        ruleset=ruleset_name,
        inputs_digest=digest,
        patched=patched,
        ag=ag,
        metrics=metrics(ag),
        risk_rows=tuple(rows),
        graph_json=export_json(ag),
        graph_dot=export_dot(ag),
    )
    state.matches[snapshot.id] = matches
    return state.store.put(snapshot)


def create_app(settings: ServiceSettings) -> FastAPI:
    app = FastAPI(title="firmgraph", version="0.1.0")
    state = _State(settings)
    app.state.firmgraph = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(settings.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _get_snapshot(snapshot_id_: str) -> AnalysisSnapshot:
        snapshot = state.store.get(snapshot_id_)
        if snapshot is None:
            raise HTTPException(status_code=404, detail="unknown snapshot id")
        return snapshot

    @app.post("/api/firmware", status_code=201, response_model=SnapshotOut)
    def upload_firmware(upload: FirmwareUpload) -> SnapshotOut:
        bundle = state.bundle()
        ruleset_name = upload.ruleset or settings.ruleset
        document = {
            "fW_name": upload.fW_name,
            "graph": {
                name: {
                    "peers": [peer.model_dump() for peer in entry.peers],
                    "version": [str(v) for v in entry.version],
                }
                for name, entry in upload.graph.items()
            },
        }
        try:
            result = analyze_document(
                document,
                upload.versions,
                bundle,
                get_ruleset(ruleset_name),
                auto_hypotheses=upload.auto_hypotheses,
                extra_facts_text=upload.extra_facts,
                derivation_cap=settings.derivation_cap,
            )
        except FirmgraphError as exc:
            path = getattr(exc, "path", "")
            raise HTTPException(
                status_code=422,
                detail={"message": str(exc), "path": path},
            )
        digest = inputs_digest(facts_text(result), ruleset_name)
        snapshot = _build_snapshot(
            state,
            parent=None,
            fw_name=result.fw_name,
            ruleset_name=ruleset_name,
            digest=digest,
            patched=(),
            ag=result.ag,
            matches=tuple(result.matches),
        )
        return _snapshot_out(snapshot)

    @app.get("/api/snapshots/{snapshot_id_}/graph")
    def get_graph(
        snapshot_id_: str,
        format: str = Query("json", pattern="^(json|dot)$"),
    ) -> Response:
        snapshot = _get_snapshot(snapshot_id_)
        if format == "dot":
            return Response(snapshot.graph_dot, media_type="text/plain")
        return Response(snapshot.graph_json, media_type="application/json")

    @app.post(
        "/api/snapshots/{snapshot_id_}/whatif",
        status_code=201,
        response_model=WhatifOut,
    )
    def whatif(snapshot_id_: str, body: WhatifIn) -> WhatifOut:
        parent = _get_snapshot(snapshot_id_)
        cumulative = tuple(sorted(set(parent.patched) | set(body.patched)))
        patched_ag = apply_patch(
            parent.ag, body.patched,
            derivation_cap=settings.derivation_cap,
        )
        child = _build_snapshot(
            state,
            parent=parent,
            fw_name=parent.fw_name,
            ruleset_name=parent.ruleset,
            digest=parent.inputs_digest,
            patched=cumulative,
            ag=patched_ag,
            matches=state.matches.get(parent.id, ()),
        )
        parent_metrics = parent.metrics.as_dict()
        child_metrics = child.metrics.as_dict()
        return WhatifOut(
            snapshot=_snapshot_out(child),
            removed_nodes=parent.ag.node_count - child.ag.node_count,
            metrics_delta=MetricsOut(
                **{
                    key: child_metrics[key] - parent_metrics[key]
                    for key in child_metrics
                }
            ),
        )

    @app.get(
        "/api/snapshots/{snapshot_id_}/risk",
        response_model=list[RiskRowOut],
    )
    def risk(snapshot_id_: str) -> list[RiskRowOut]:
        snapshot = _get_snapshot(snapshot_id_)
        return _risk_rows(state, snapshot)

    @app.get(
        "/api/snapshots/{snapshot_id_}/paths",
        response_model=list[PathOut],
    )
    def paths(snapshot_id_: str, target: str) -> list[PathOut]:
        snapshot = _get_snapshot(snapshot_id_)
        try:
            found = enumerate_paths(snapshot.ag, target)
        except UnknownTargetError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return [
            PathOut(
                binaries=list(p.binaries),
                flows=[list(f) for f in p.flows],
                entry_kind=p.entry_kind,
            )
            for p in found
        ]

    if settings.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/", StaticFiles(directory=settings.ui_dir, html=True), name="ui"
        )

    return app
