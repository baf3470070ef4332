"""End-to-end analysis of one firmware image.

Shared by the CLI and the HTTP service: load the graph document, merge
version inventories, match CVEs, detect OSS hypotheses, run the fixpoint,
and package the attack graph with its metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .attackgraph import AgMetrics, AttackGraph, generate_ag, metrics
from .datalog import Clause, parse_program
from .engine import DEFAULT_DERIVATION_CAP
from .errors import SchemaError
from .firmware import (
    BinaryInventory,
    FirmwareGraph,
    TopologyFacts,
    emit_topology_facts,
    load_firmware_graph,
    load_version_list,
    merge_inventory,
)
from .rules import Ruleset
from .vulnintel import (
    CveDatabase,
    ExploitIntel,
    VulnMatch,
    detect_oss,
    emit_vul_facts,
    load_cve_db,
    load_intel,
    match_vulnerabilities,
)

_FACT_PREDICATES = frozenset(
    {"dataFlow", "externalInteraction", "vulExists", "bugHyp"}
)


@dataclass
class IntelBundle:
    """Loaded vulnerability intelligence shared across analyses."""

    db: CveDatabase
    intel: ExploitIntel


def load_intel_bundle(
    cve_db_path: str, epss_path: str | None, kev_path: str | None
) -> IntelBundle:
    with open(cve_db_path, "r", encoding="utf-8") as handle:
        db = load_cve_db(handle.read())
    return IntelBundle(db=db, intel=load_intel(epss_path, kev_path))


@dataclass
class AnalysisResult:
    fw_name: str
    fw: FirmwareGraph
    inventory: BinaryInventory
    topology: TopologyFacts
    matches: list[VulnMatch]
    vul_facts: list[Clause]
    bug_facts: list[Clause]
    oss: frozenset[str]
    ag: AttackGraph
    ag_metrics: AgMetrics
    warnings: list[str] = field(default_factory=list)

    @property
    def has_ag(self) -> bool:
        return not self.ag.is_empty


def _split_extra_facts(
    text: str,
) -> tuple[list[Clause], list[Clause], list[Clause]]:
    program = parse_program(text)
    if program.rules:
        raise SchemaError("extra facts must not contain rules")
    topology: list[Clause] = []
    vul: list[Clause] = []
    bug: list[Clause] = []
    for clause in program.clauses:
        predicate = clause.head.predicate
        if predicate not in _FACT_PREDICATES:
            raise SchemaError(
                f"unsupported fact predicate {predicate!r}; expected one of "
                f"{', '.join(sorted(_FACT_PREDICATES))}"
            )
        if predicate == "vulExists":
            vul.append(clause)
        elif predicate == "bugHyp":
            bug.append(clause)
        else:
            topology.append(clause)
    return topology, vul, bug


def analyze_document(
    document: str | Mapping,
    versions_text: str | None,
    bundle: IntelBundle,
    ruleset: Ruleset,
    *,
    auto_hypotheses: bool = True,
    extra_facts_text: str | None = None,
    derivation_cap: int = DEFAULT_DERIVATION_CAP,
) -> AnalysisResult:
    """Run the full pipeline on one firmware graph document."""
    fw = load_firmware_graph(document)
    inventory = load_version_list(versions_text) if versions_text else BinaryInventory()
    merged = merge_inventory(fw, inventory)

    topology = emit_topology_facts(fw)
    matches = match_vulnerabilities(merged, bundle.db)
    vul_facts = emit_vul_facts(matches)
    if auto_hypotheses:
        oss, bug_facts = detect_oss(merged, bundle.db)
    else:
        oss, bug_facts = frozenset(), []

    topo_facts = list(topology.facts)
    if extra_facts_text:
        extra_topo, extra_vul, extra_bug = _split_extra_facts(extra_facts_text)
        topo_facts += extra_topo
        vul_facts = vul_facts + extra_vul
        bug_facts = bug_facts + extra_bug

    ag = generate_ag(
        topo_facts, vul_facts, bug_facts, ruleset, derivation_cap=derivation_cap
    )
    return AnalysisResult(
        fw_name=fw.fw_name,
        fw=fw,
        inventory=merged,
        topology=TopologyFacts(tuple(topo_facts)),
        matches=matches,
        vul_facts=list(vul_facts),
        bug_facts=list(bug_facts),
        oss=oss,
        ag=ag,
        ag_metrics=metrics(ag),
        warnings=list(fw.warnings),
    )


def facts_text(result: AnalysisResult) -> str:
    """Render every input fact of the analysis as clause text."""
    lines = ["% topology"]
    lines += [c.format() for c in result.topology.facts]
    lines.append("% vulnerabilities")
    lines += [c.format() for c in result.vul_facts]
    lines.append("% hypotheses")
    lines += [c.format() for c in result.bug_facts]
    return "\n".join(lines) + "\n"
