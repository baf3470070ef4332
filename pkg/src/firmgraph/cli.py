"""Batch command-line front end.

Subcommands: ``analyze`` one firmware, ``corpus`` a directory of firmware
graphs, ``whatif`` patch simulation, ``serve`` the HTTP API, ``export``
saved graphs or shipped rulesets.

Exit codes are a stable contract for CI: 0 success with an attack graph,
2 success without one, 1 error.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click

from .attackgraph import (
    AttackGraph,
    apply_patch,
    export_dot,
    export_json,
    metrics,
    proof_graph_from_json,
    proof_graph_to_dot,
)
from .config import RunConfig, load_config, validate_inputs
from .errors import FirmgraphError
from .pipeline import (
    AnalysisResult,
    IntelBundle,
    analyze_document,
    facts_text,
    load_intel_bundle,
)
from .risk import (
    binary_risk_table,
    corpus_stats,
    corpus_stats_json,
    risk_table_csv,
    risk_table_json,
)
from .rules import get_ruleset, ruleset_text
from .vulnintel import VulnMatch

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_AG = 2


def _log(event: str, **fields) -> None:
    record = {"event": event, **fields}
    click.echo(json.dumps(record, sort_keys=True), err=True)


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def _write_analysis_artifacts(
    result: AnalysisResult, out_dir: Path
) -> dict[str, str]:
    artifacts = {
        "facts": str(out_dir / "facts.P"),
        "ag_dot": str(out_dir / "ag.dot"),
        "ag_json": str(out_dir / "ag.json"),
        "metrics": str(out_dir / "metrics.json"),
    }
    _write_atomic(out_dir / "facts.P", facts_text(result))
    _write_atomic(out_dir / "ag.dot", export_dot(result.ag))
    _write_atomic(out_dir / "ag.json", export_json(result.ag))
    _write_atomic(
        out_dir / "metrics.json",
        json.dumps(
            {
                "fw_name": result.fw_name,
                "has_ag": result.has_ag,
                "metrics": result.ag_metrics.as_dict(),
                "goal_binaries": list(result.ag.goal_binaries()),
                "node_count": result.ag.node_count,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    return artifacts


def _load_bundle(config: RunConfig) -> IntelBundle:
    validate_inputs(config)
    assert config.cve_db is not None
    return load_intel_bundle(config.cve_db, config.epss, config.kev)


def _analyze_file(
    graph_path: Path,
    versions_path: Path | None,
    bundle: IntelBundle,
    config: RunConfig,
    *,
    auto_hypotheses: bool = True,
    extra_facts_path: Path | None = None,
) -> AnalysisResult:
    versions_text = versions_path.read_text() if versions_path else None
    extra = extra_facts_path.read_text() if extra_facts_path else None
    return analyze_document(
        graph_path.read_text(),
        versions_text,
        bundle,
        get_ruleset(config.ruleset),
        auto_hypotheses=auto_hypotheses,
        extra_facts_text=extra,
        derivation_cap=config.derivation_cap,
    )


def _sibling_versions(graph_path: Path) -> Path | None:
    candidate = graph_path.with_suffix(".versions.txt")
    return candidate if candidate.exists() else None


_CONFIG_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON config file."),
    click.option("--cve-db", default=None, help="CVE snapshot path."),
    click.option("--epss", default=None, help="EPSS snapshot path."),
    click.option("--kev", default=None, help="KEV catalog path."),
    click.option("--ruleset", default=None,
                 type=click.Choice(["external", "internal", "combined"]),
                 help="Threat-model ruleset (default combined)."),
    click.option("--out", "out_dir", default=None, help="Output directory."),
    click.option("--derivation-cap", type=int, default=None,
                 help="Abort evaluation beyond this many derived facts."),
]


def _with_config_options(command):
    for option in reversed(_CONFIG_OPTIONS):
        command = option(command)
    return command


def _build_config(config_path, cve_db, epss, kev, ruleset, out_dir,
                  derivation_cap, workers=None, include_empty=None) -> RunConfig:
    return load_config(
        config_path,
        cve_db=cve_db,
        epss=epss,
        kev=kev,
        ruleset=ruleset,
        out_dir=out_dir,
        derivation_cap=derivation_cap,
        workers=workers,
        include_empty=include_empty,
    )


@click.group()
def main() -> None:
    """Firmware attack-graph risk assessment."""


@main.command()
@click.argument("graph_file", type=click.Path(path_type=Path))
@click.option("--versions", "versions_file", type=click.Path(path_type=Path),
              default=None, help="Binary/version inventory file.")
@click.option("--extra-facts", "extra_facts_file",
              type=click.Path(path_type=Path), default=None,
              help="Hand-authored fact file merged into the analysis.")
@click.option("--auto-oss/--no-auto-oss", default=True,
              help="Derive bug hypotheses for binaries with any known CVE.")
@_with_config_options
def analyze(graph_file, versions_file, extra_facts_file, auto_oss,
            config_path, cve_db, epss, kev, ruleset, out_dir, derivation_cap):
    """Analyze one firmware graph document."""
    try:
        config = _build_config(config_path, cve_db, epss, kev, ruleset,
                               out_dir, derivation_cap)
        bundle = _load_bundle(config)
        if not graph_file.exists():
            raise FirmgraphError(f"graph file not found: {graph_file}")
        versions = versions_file or _sibling_versions(graph_file)
        result = _analyze_file(
            graph_file, versions, bundle, config,
            auto_hypotheses=auto_oss, extra_facts_path=extra_facts_file,
        )
    except FirmgraphError as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)
    out = Path(config.out_dir) / graph_file.stem
    artifacts = _write_analysis_artifacts(result, out)
    _log(
        "analyzed",
        firmware=result.fw_name,
        has_ag=result.has_ag,
        metrics=result.ag_metrics.as_dict(),
        artifacts=artifacts,
    )
    sys.exit(EXIT_OK if result.has_ag else EXIT_NO_AG)


@dataclass
class _CorpusOutcome:
    stem: str
    status: str  # "ok", "empty", "error"
    message: str = ""
    metrics: dict | None = None
    ag: AttackGraph | None = None
    matches: list[VulnMatch] | None = None


_WORKER_STATE: dict = {}


def _corpus_init(config: RunConfig) -> None:
    _WORKER_STATE["config"] = config
    _WORKER_STATE["bundle"] = _load_bundle(config)


def _corpus_task(graph_path_str: str) -> _CorpusOutcome:
    config: RunConfig = _WORKER_STATE["config"]
    bundle: IntelBundle = _WORKER_STATE["bundle"]
    graph_path = Path(graph_path_str)
    stem = graph_path.stem
    try:
        result = _analyze_file(
            graph_path, _sibling_versions(graph_path), bundle, config
        )
        _write_analysis_artifacts(result, Path(config.out_dir) / stem)
    except FirmgraphError as exc:
        return _CorpusOutcome(stem, "error", message=str(exc))
    return _CorpusOutcome(
        stem,
        "ok" if result.has_ag else "empty",
        metrics=result.ag_metrics.as_dict(),
        ag=result.ag,
        matches=result.matches,
    )


@main.command()
@click.argument("directory", type=click.Path(path_type=Path))
@click.option("--workers", type=int, default=None,
              help="Parallel workers (default: number of processors).")
@click.option("--include-empty/--exclude-empty", "include_empty", default=None,
              help="Count firmware without an attack graph in the means "
                   "(default: include).")
@_with_config_options
def corpus(directory, workers, include_empty,
           config_path, cve_db, epss, kev, ruleset, out_dir, derivation_cap):
    """Analyze every firmware graph document in DIRECTORY."""
    try:
        config = _build_config(config_path, cve_db, epss, kev, ruleset,
                               out_dir, derivation_cap, workers=workers,
                               include_empty=include_empty)
        include_empty = config.include_empty
        validate_inputs(config)
        graph_files = sorted(
            p for p in directory.glob("*.json") if p.is_file()
        )
        if not graph_files:
            raise FirmgraphError(f"no firmware graph documents in {directory}")
    except FirmgraphError as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)

    worker_count = config.resolved_workers()
    outcomes: list[_CorpusOutcome] = []
    started = time.time()
    if worker_count <= 1 or len(graph_files) == 1:
        _corpus_init(config)
        outcomes = [_corpus_task(str(p)) for p in graph_files]
    else:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=worker_count,
            initializer=_corpus_init,
            initargs=(config,),
        ) as pool:
            outcomes = list(pool.map(_corpus_task, (str(p) for p in graph_files)))

    out = Path(config.out_dir)
    log_lines = []
    metrics_list = []
    table_input = []
    from .attackgraph import AgMetrics

    for outcome in sorted(outcomes, key=lambda o: o.stem):
        log_lines.append(
            json.dumps(
                {
                    "event": "firmware",
                    "stem": outcome.stem,
                    "status": outcome.status,
                    "message": outcome.message,
                    "metrics": outcome.metrics,
                },
                sort_keys=True,
            )
        )
        if outcome.status == "error":
            _log("firmware_failed", stem=outcome.stem, message=outcome.message)
            continue
        assert outcome.metrics is not None
        if outcome.status == "empty" and not include_empty:
            continue
        metrics_list.append(AgMetrics(**outcome.metrics))
        table_input.append((outcome.ag, outcome.matches))

    bundle = _load_bundle(config)
    try:
        stats = corpus_stats(metrics_list)
    except FirmgraphError as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)
    rows = binary_risk_table(table_input, bundle.intel)

    _write_atomic(out / "corpus_stats.json", corpus_stats_json(stats))
    _write_atomic(out / "risk_table.json", risk_table_json(rows))
    _write_atomic(out / "risk_table.csv", risk_table_csv(rows))
    _write_atomic(
        out / "run.log",
        "\n".join(
            [json.dumps({"event": "corpus_started", "ts": started}, sort_keys=True)]
            + log_lines
        )
        + "\n",
    )
    _log(
        "corpus_done",
        firmware_count=len(graph_files),
        failures=sum(1 for o in outcomes if o.status == "error"),
        stats=stats.as_dict(),
    )
    sys.exit(EXIT_OK)


@main.command()
@click.argument("graph_file", type=click.Path(path_type=Path))
@click.option("--patched", default="", help="Comma-separated binary names.")
@click.option("--versions", "versions_file", type=click.Path(path_type=Path),
              default=None)
@click.option("--extra-facts", "extra_facts_file",
              type=click.Path(path_type=Path), default=None)
@click.option("--auto-oss/--no-auto-oss", default=True)
@_with_config_options
def whatif(graph_file, patched, versions_file, extra_facts_file, auto_oss,
           config_path, cve_db, epss, kev, ruleset, out_dir, derivation_cap):
    """Simulate patching binaries and report how the graph shrinks."""
    patch_set = [name.strip() for name in patched.split(",") if name.strip()]
    try:
        config = _build_config(config_path, cve_db, epss, kev, ruleset,
                               out_dir, derivation_cap)
        bundle = _load_bundle(config)
        versions = versions_file or _sibling_versions(graph_file)
        result = _analyze_file(
            graph_file, versions, bundle, config,
            auto_hypotheses=auto_oss, extra_facts_path=extra_facts_file,
        )
    except FirmgraphError as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)

    base = result.ag
    patched_ag = apply_patch(base, patch_set,
                             derivation_cap=config.derivation_cap)
    base_metrics = result.ag_metrics
    new_metrics = metrics(patched_ag)
    diff = {
        "patched": sorted(patch_set),
        "nodes_before": base.node_count,
        "nodes_after": patched_ag.node_count,
        "nodes_removed": base.node_count - patched_ag.node_count,
        "metrics_before": base_metrics.as_dict(),
        "metrics_after": new_metrics.as_dict(),
        "metrics_delta": {
            key: new_metrics.as_dict()[key] - base_metrics.as_dict()[key]
            for key in base_metrics.as_dict()
        },
    }
    out = Path(config.out_dir) / graph_file.stem
    _write_atomic(out / "patched_ag.dot", export_dot(patched_ag))
    _write_atomic(out / "patched_ag.json", export_json(patched_ag))
    _write_atomic(
        out / "whatif_diff.json",
        json.dumps(diff, indent=2, sort_keys=True) + "\n",
    )
    _log("whatif", **diff)
    sys.exit(EXIT_OK if not patched_ag.is_empty else EXIT_NO_AG)


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None,
              help="Serve a built UI bundle at /.")
@click.option("--persist-dir", type=click.Path(path_type=Path), default=None,
              help="Directory for snapshot persistence.")
@_with_config_options
def serve(port, host, ui_dir, persist_dir,
          config_path, cve_db, epss, kev, ruleset, out_dir, derivation_cap):
    """Run the HTTP API (and optionally the analyst UI)."""
    try:
        config = _build_config(config_path, cve_db, epss, kev, ruleset,
                               out_dir, derivation_cap)
        validate_inputs(config)
    except FirmgraphError as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)
    import uvicorn

    from .service import ServiceSettings, create_app

    app = create_app(
        ServiceSettings(
            cve_db=config.cve_db or "",
            epss=config.epss,
            kev=config.kev,
            ruleset=config.ruleset,
            derivation_cap=config.derivation_cap,
            ui_dir=str(ui_dir) if ui_dir else None,
            persist_dir=str(persist_dir) if persist_dir else None,
        )
    )
    uvicorn.run(app, host=host, port=port)


@main.group()
def export() -> None:
    """Export saved graphs and shipped rulesets."""


@export.command("dot")
@click.argument("ag_json", type=click.Path(path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), default=None)
def export_dot_command(ag_json, out_file):
    """Convert a saved attack-graph JSON document to Graphviz text."""
    try:
        graph = proof_graph_from_json(ag_json.read_text())
    except (OSError, FirmgraphError) as exc:
        _log("error", message=str(exc))
        sys.exit(EXIT_ERROR)
    text = proof_graph_to_dot(graph)
    if out_file:
        _write_atomic(out_file, text)
    else:
        click.echo(text, nl=False)
    sys.exit(EXIT_OK)


@export.command("ruleset")
@click.argument("name", type=click.Choice(["external", "internal", "combined"]))
@click.option("--out", "out_file", type=click.Path(path_type=Path), default=None)
def export_ruleset_command(name, out_file):
    """Write a shipped ruleset as clause text."""
    text = ruleset_text(name)
    if out_file:
        _write_atomic(out_file, text)
    else:
        click.echo(text, nl=False)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
