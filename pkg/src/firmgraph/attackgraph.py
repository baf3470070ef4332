"""Attack-graph assembly, metrics, path enumeration, export, and what-if.

``generate_ag`` runs the fixpoint over topology + vulnerability +
hypothesis facts with a ruleset and keeps the proof sub-graph reachable
backward from every derived goal literal
(``vulnerableSoftware``/``potentiallyVulnerableSoftware``). A graph with
zero nodes means no attack graph exists for the firmware.

What-if patching removes the patched binaries' ``vulExists``/``bugHyp``
facts and shrinks the baseline graph to what remains derivable. Working
by restriction (rather than rebuilding from scratch) makes the shrinkage
literal: the patched node set is a subset of the baseline's by
construction, and node ids stay stable for unaffected nodes' ordering.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .datalog import Clause, Literal, format_literal, program_from_clauses
from .engine import DEFAULT_DERIVATION_CAP, evaluate
from .errors import FirmgraphError, SchemaError
from .firmware import TopologyFacts, sanitize_name
from .proof import NodeKind, ProofDetail, ProofGraph, ProofNode, build_proof_detail
from .rules import GOAL_PREDICATES, Ruleset

logger = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 10_000


class UnknownTargetError(FirmgraphError):
    def __init__(self, target: str) -> None:
        self.target = target
        super().__init__(
            f"binary {target!r} does not appear in any derived goal literal"
        )


@dataclass(frozen=True)
class AgMetrics:
    attack_points: int
    potentially_compromised_oss: int
    vulnerable_binaries: int

    def as_dict(self) -> dict[str, int]:
        return {
            "attack_points": self.attack_points,
            "potentially_compromised_oss": self.potentially_compromised_oss,
            "vulnerable_binaries": self.vulnerable_binaries,
        }

    def as_tuple(self) -> tuple[int, int, int]:
        return (
            self.attack_points,
            self.potentially_compromised_oss,
            self.vulnerable_binaries,
        )


@dataclass(frozen=True, eq=False)
class AttackGraph:
    proof: ProofGraph
    goal_literals: tuple[Literal, ...]
    input_facts: tuple[Clause, ...]
    ruleset: Ruleset
    literal_by_id: Mapping[int, Literal] = field(default_factory=dict)
    clause_by_id: Mapping[int, Clause] = field(default_factory=dict)
    key_by_id: Mapping[int, str] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return self.proof.is_empty

    @property
    def node_count(self) -> int:
        return self.proof.node_count

    def node_keys(self) -> frozenset[str]:
        """Content identity of every node, independent of numbering."""
        return frozenset(
            f"{node.kind.value}|{self.key_by_id[node.id]}"
            for node in self.proof.nodes
        )

    def goal_binaries(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for literal in self.goal_literals:
            seen.setdefault(literal.args[0].text, None)
        return tuple(seen)

    def leaf_literals(self, predicate: str) -> tuple[Literal, ...]:
        out = []
        for node in self.proof.nodes:
            if node.kind is not NodeKind.LEAF:
                continue
            literal = self.literal_by_id[node.id]
            if literal.predicate == predicate:
                out.append(literal)
        return tuple(out)


def _collect_facts(
    topology: TopologyFacts | Sequence[Clause],
    vul_facts: Sequence[Clause],
    bug_facts: Sequence[Clause],
) -> list[Clause]:
    topo = topology.facts if isinstance(topology, TopologyFacts) else topology
    facts = list(topo) + list(vul_facts) + list(bug_facts)
    for clause in facts:
        if not clause.is_fact:
            raise SchemaError(f"expected a fact, got rule {clause.format()}")
    return facts


def _detail_to_graph(
    detail: ProofDetail,
    goals: Sequence[Literal],
    facts: Sequence[Clause],
    ruleset: Ruleset,
) -> AttackGraph:
    return AttackGraph(
        proof=detail.graph,
        goal_literals=tuple(goals),
        input_facts=tuple(facts),
        ruleset=ruleset,
        literal_by_id=dict(detail.literal_by_id),
        clause_by_id=dict(detail.clause_by_id),
        key_by_id=dict(detail.key_by_id),
    )


def generate_ag(
    topology: TopologyFacts | Sequence[Clause],
    vul_facts: Sequence[Clause],
    bug_facts: Sequence[Clause],
    ruleset: Ruleset,
    *,
    derivation_cap: int = DEFAULT_DERIVATION_CAP,
) -> AttackGraph:
    """Evaluate the facts under the ruleset and build the attack graph."""
    facts = _collect_facts(topology, vul_facts, bug_facts)
    program = program_from_clauses(facts + list(ruleset.rules))
    derivations = evaluate(program, derivation_cap=derivation_cap)
    goals = sorted(
        (
            lit
            for lit in derivations.derived_literals
            if lit.predicate in GOAL_PREDICATES
        ),
        key=format_literal,
    )
    detail = build_proof_detail(derivations, goals)
    return _detail_to_graph(detail, goals, program.facts, ruleset)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def metrics(ag: AttackGraph) -> AgMetrics:
    """Count attack points, hypothesized-OSS, and new vulnerable binaries.

    Attack points and OSS hypotheses count distinct LEAF facts in the
    graph; vulnerable binaries count distinct goal-literal binaries minus
    the binaries already counted by the first two.
    """
    external = set(ag.leaf_literals("externalInteraction"))
    hypotheses = set(ag.leaf_literals("bugHyp"))
    entry_binaries = {lit.args[1].text for lit in external} | {
        lit.args[0].text for lit in hypotheses
    }
    goal_binaries = set(ag.goal_binaries())
    return AgMetrics(
        attack_points=len(external),
        potentially_compromised_oss=len(hypotheses),
        vulnerable_binaries=len(goal_binaries - entry_binaries),
    )


# ---------------------------------------------------------------------------
# Attack paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttackPath:
    binaries: tuple[str, ...]
    # one flow-type tuple per hop (multiple dataFlow facts may link a pair)
    flows: tuple[tuple[str, ...], ...]
    entry_kind: str  # "external" for attack points, "hypothesis" for OSS

    def __len__(self) -> int:
        return len(self.binaries)


def enumerate_paths(
    ag: AttackGraph, target: str, *, path_cap: int = DEFAULT_PATH_CAP
) -> list[AttackPath]:
    """All simple data-flow paths from an entry binary to ``target``.

    Entries are the graph's attack points and OSS hypotheses; every hop
    after the first must satisfy a goal literal. Results are ordered
    shortest first, ties lexicographic, and enumeration stops at
    ``path_cap`` collected paths.
    """
    target_key = sanitize_name(target)
    goal_binaries = set(ag.goal_binaries())
    if target_key not in goal_binaries:
        raise UnknownTargetError(target)

    external_entries = {
        lit.args[1].text for lit in ag.leaf_literals("externalInteraction")
    }
    hypothesis_entries = {
        lit.args[0].text for lit in ag.leaf_literals("bugHyp")
    }
    entries = sorted(external_entries | hypothesis_entries)

    flows: dict[str, dict[str, set[str]]] = {}
    for clause in ag.input_facts:
        if clause.head.predicate != "dataFlow":
            continue
        src, dst, flow_type = (t.text for t in clause.head.args)
        flows.setdefault(src, {}).setdefault(dst, set()).add(flow_type)

    found: list[AttackPath] = []

    def walk(current: str, path: list[str], hop_flows: list[tuple[str, ...]],
             entry_kind: str) -> bool:
        if len(found) >= path_cap:
            return False
        if current == target_key:
            found.append(
                AttackPath(tuple(path), tuple(hop_flows), entry_kind)
            )
            return len(found) < path_cap
        for neighbor in sorted(flows.get(current, ())):
            if neighbor in path:
                continue
            if neighbor not in goal_binaries:
                continue
            path.append(neighbor)
            hop_flows.append(tuple(sorted(flows[current][neighbor])))
            keep_going = walk(neighbor, path, hop_flows, entry_kind)
            path.pop()
            hop_flows.pop()
            if not keep_going:
                return False
        return True

    for entry in entries:
        kind = "external" if entry in external_entries else "hypothesis"
        if not walk(entry, [entry], [], kind):
            break

    found.sort(key=lambda p: (len(p.binaries), p.binaries))
    return found


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

_DOT_SHAPES = {NodeKind.LEAF: "box", NodeKind.AND: "ellipse", NodeKind.OR: "diamond"}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(ag: AttackGraph) -> str:
    """Graphviz text: LEAF boxes, AND ellipses, OR diamonds."""
    return proof_graph_to_dot(ag.proof)


def proof_graph_to_dot(graph: ProofGraph) -> str:
    lines = ["digraph attack_graph {"]
    for node in graph.nodes:
        lines.append(
            f'  n{node.id} [label="{_dot_escape(node.label)}", '
            f"shape={_DOT_SHAPES[node.kind]}];"
        )
    for src, dst in graph.edges:
        lines.append(f"  n{src} -> n{dst};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(ag: AttackGraph) -> str:
    """JSON mirror of the proof graph: nodes (id/kind/label) and edges."""
    return proof_graph_to_json(ag.proof)


def proof_graph_to_json(graph: ProofGraph) -> str:
    payload = {
        "nodes": [
            {"id": n.id, "kind": n.kind.value, "label": n.label}
            for n in graph.nodes
        ],
        "edges": [[src, dst] for src, dst in graph.edges],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def proof_graph_from_json(text: str) -> ProofGraph:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    try:
        nodes = tuple(
            ProofNode(n["id"], NodeKind(n["kind"]), n["label"])
            for n in payload["nodes"]
        )
        edges = tuple((int(src), int(dst)) for src, dst in payload["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed proof graph document: {exc}") from exc
    return ProofGraph(nodes, edges)


# ---------------------------------------------------------------------------
# What-if patching
# ---------------------------------------------------------------------------


def _patched_out(clause: Clause, patched_keys: frozenset[str]) -> bool:
    head = clause.head
    if head.predicate == "vulExists":
        return head.args[1].text in patched_keys
    if head.predicate == "bugHyp":
        return head.args[0].text in patched_keys
    return False


def apply_patch(
    ag: AttackGraph,
    patched: Iterable[str],
    *,
    derivation_cap: int = DEFAULT_DERIVATION_CAP,
) -> AttackGraph:
    """Shrink ``ag`` to what stays derivable once ``patched`` binaries'
    vulnerability and hypothesis facts are removed.

    Patching an unknown binary is a no-op with a warning. Patching
    nothing returns a graph identical to ``ag``.
    """
    patched_keys = frozenset(sanitize_name(name) for name in patched)
    known = set()
    for clause in ag.input_facts:
        head = clause.head
        if head.predicate == "dataFlow":
            known.update(t.text for t in head.args[:2])
        elif head.predicate == "externalInteraction":
            known.add(head.args[1].text)
        elif head.predicate == "vulExists":
            known.add(head.args[1].text)
        elif head.predicate == "bugHyp":
            known.add(head.args[0].text)
    for name in sorted(patched_keys - known):
        logger.warning("patched binary %r is unknown; ignoring", name)

    remaining = [
        c for c in ag.input_facts if not _patched_out(c, patched_keys)
    ]
    program = program_from_clauses(remaining + list(ag.ruleset.rules))
    surviving = evaluate(program, derivation_cap=derivation_cap)

    nodes = ag.proof.nodes
    in_edges: dict[int, list[int]] = {n.id: [] for n in nodes}
    out_edges: dict[int, list[int]] = {n.id: [] for n in nodes}
    for src, dst in ag.proof.edges:
        in_edges[dst].append(src)
        out_edges[src].append(dst)

    # Pass 1 (ids are topological): keep nodes whose support survives.
    keep: dict[int, bool] = {}
    for node in nodes:
        if node.kind is NodeKind.LEAF:
            keep[node.id] = ag.literal_by_id[node.id] in surviving.literals
        elif node.kind is NodeKind.AND:
            keep[node.id] = all(keep[src] for src in in_edges[node.id])
        else:  # OR
            literal = ag.literal_by_id[node.id]
            keep[node.id] = literal in surviving.literals and any(
                keep[src] for src in in_edges[node.id]
            )

    # Pass 2: prune to what is backward-reachable from surviving goals.
    goal_ids = [
        node.id
        for node in nodes
        if node.kind is NodeKind.OR
        and keep[node.id]
        and ag.literal_by_id[node.id] in set(ag.goal_literals)
    ]
    reachable: set[int] = set()
    stack = list(goal_ids)
    while stack:
        node_id = stack.pop()
        if node_id in reachable:
            continue
        reachable.add(node_id)
        for src in in_edges[node_id]:
            if keep[src]:
                stack.append(src)

    kept_ids = [n.id for n in nodes if n.id in reachable]
    remap = {old: new for new, old in enumerate(kept_ids)}
    new_nodes = tuple(
        ProofNode(remap[n.id], n.kind, n.label) for n in nodes if n.id in reachable
    )
    new_edges = tuple(
        sorted(
            (remap[src], remap[dst])
            for src, dst in ag.proof.edges
            if src in reachable and dst in reachable
        )
    )
    goals = tuple(
        lit
        for lit in ag.goal_literals
        if any(
            ag.literal_by_id[g] == lit for g in goal_ids
        )
    )
    return AttackGraph(
        proof=ProofGraph(new_nodes, new_edges),
        goal_literals=goals,
        input_facts=tuple(remaining),
        ruleset=ag.ruleset,
        literal_by_id={
            remap[i]: lit for i, lit in ag.literal_by_id.items() if i in reachable
        },
        clause_by_id={
            remap[i]: c for i, c in ag.clause_by_id.items() if i in reachable
        },
        key_by_id={
            remap[i]: k for i, k in ag.key_by_id.items() if i in reachable
        },
    )


def whatif_patch(
    topology: TopologyFacts | Sequence[Clause],
    vul_facts: Sequence[Clause],
    bug_facts: Sequence[Clause],
    ruleset: Ruleset,
    patched: Iterable[str],
    *,
    derivation_cap: int = DEFAULT_DERIVATION_CAP,
) -> AttackGraph:
    """Regenerate the attack graph with the patched binaries' facts gone."""
    base = generate_ag(
        topology, vul_facts, bug_facts, ruleset, derivation_cap=derivation_cap
    )
    return apply_patch(base, patched, derivation_cap=derivation_cap)
