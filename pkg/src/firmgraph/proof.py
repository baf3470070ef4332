"""Proof graphs: typed LEAF/AND/OR DAGs extracted from a derivation set.

Node kinds follow the usual logical attack-graph convention:

* LEAF  — an input fact; in-degree 0.
* AND   — one ground rule instantiation; premises point into it, its
          single out-edge points at the literal it derives.
* OR    — a derived ground literal; one in-edge per alternative
          derivation.

Acyclicity is guaranteed by a well-foundedness filter: a derivation is
rendered only when every premise first appeared strictly before the
conclusion (stage comparison). Each derived literal keeps at least one
derivation this way — its earliest ones always qualify — while circular
justifications (a literal indirectly supporting itself) are suppressed.

Node ids are dense integers assigned deterministically: nodes are sorted
by dependency level, then kind, then label, then a canonical content key,
so the numbering is a topological order that does not depend on clause
order in the source program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .datalog import Clause, Literal, format_clause, format_literal
from .engine import Derivation, DerivationSet
from .errors import FirmgraphError


class UnknownGoalError(FirmgraphError):
    """A requested goal is neither an input fact nor derived."""

    def __init__(self, goals: Iterable[Literal]) -> None:
        self.goals = tuple(goals)
        rendered = ", ".join(format_literal(g) for g in self.goals)
        super().__init__(f"unknown goal literal(s): {rendered}")


class NodeKind(str, Enum):
    LEAF = "LEAF"
    AND = "AND"
    OR = "OR"


_KIND_ORDER = {NodeKind.LEAF: 0, NodeKind.AND: 1, NodeKind.OR: 2}


@dataclass(frozen=True)
class ProofNode:
    id: int
    kind: NodeKind
    label: str


@dataclass(frozen=True)
class ProofGraph:
    nodes: tuple[ProofNode, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def is_empty(self) -> bool:
        return not self.nodes


@dataclass
class ProofDetail:
    """A proof graph plus the structured data behind each node."""

    graph: ProofGraph
    literal_by_id: dict[int, Literal] = field(default_factory=dict)
    clause_by_id: dict[int, Clause] = field(default_factory=dict)
    derivation_by_id: dict[int, Derivation] = field(default_factory=dict)
    key_by_id: dict[int, str] = field(default_factory=dict)

    def node_keys(self) -> frozenset[str]:
        """Content identity of every node, independent of id assignment."""
        return frozenset(
            f"{node.kind.value}|{self.key_by_id[node.id]}"
            for node in self.graph.nodes
        )


@dataclass
class _PendingNode:
    kind: NodeKind
    label: str
    key: str
    level: int
    literal: Literal | None = None
    clause: Clause | None = None
    derivation: Derivation | None = None
    premises: tuple[str, ...] = ()  # keys of premise nodes (AND only)
    target: str | None = None  # key of the derived OR node (AND only)


def _admissible(derivs: DerivationSet, literal: Literal) -> list[Derivation]:
    stage = derivs.stages[literal]
    return [
        d
        for d in derivs.derivations.get(literal, ())
        if all(derivs.stages[p] < stage for p in d.body)
    ]


def build_proof_detail(
    derivations: DerivationSet, goals: Iterable[Literal]
) -> ProofDetail:
    """Build the sub-proof-graph backward-reachable from ``goals``."""
    goal_list = list(dict.fromkeys(goals))
    unknown = [g for g in goal_list if g not in derivations.literals]
    if unknown:
        raise UnknownGoalError(unknown)

    pending: dict[str, _PendingNode] = {}

    def visit_literal(literal: Literal) -> str:
        key = format_literal(literal)
        if key in pending:
            return key
        if literal in derivations.input_facts:
            # Input facts need no proof even when rules also derive them.
            pending[key] = _PendingNode(
                kind=NodeKind.LEAF,
                label=key,
                key=key,
                level=0,
                literal=literal,
                clause=Clause(literal),
            )
            return key
        node = _PendingNode(
            kind=NodeKind.OR, label=key, key=key, level=0, literal=literal
        )
        pending[key] = node
        or_level = 0
        for derivation in _admissible(derivations, literal):
            premise_keys = tuple(visit_literal(p) for p in derivation.body)
            and_level = 1 + max(pending[k].level for k in premise_keys)
            and_key = f"{format_clause(derivation.rule)}|{key}|" + ";".join(
                premise_keys
            )
            pending[and_key] = _PendingNode(
                kind=NodeKind.AND,
                label=derivation.rule.label or format_clause(derivation.rule),
                key=and_key,
                level=and_level,
                clause=derivation.rule,
                derivation=derivation,
                premises=premise_keys,
                target=key,
            )
            or_level = max(or_level, and_level + 1)
        node.level = or_level
        return key

    for goal in goal_list:
        visit_literal(goal)

    ordered = sorted(
        pending.values(),
        key=lambda n: (n.level, _KIND_ORDER[n.kind], n.label, n.key),
    )
    id_by_key = {node.key: i for i, node in enumerate(ordered)}

    nodes = tuple(
        ProofNode(i, node.kind, node.label) for i, node in enumerate(ordered)
    )
    edges: list[tuple[int, int]] = []
    detail = ProofDetail(graph=ProofGraph(nodes, ()))
    for i, node in enumerate(ordered):
        detail.key_by_id[i] = node.key
        if node.literal is not None:
            detail.literal_by_id[i] = node.literal
        if node.clause is not None:
            detail.clause_by_id[i] = node.clause
        if node.derivation is not None:
            detail.derivation_by_id[i] = node.derivation
        if node.kind is NodeKind.AND:
            for premise_key in node.premises:
                edges.append((id_by_key[premise_key], i))
            assert node.target is not None
            edges.append((i, id_by_key[node.target]))
    detail.graph = ProofGraph(nodes, tuple(sorted(edges)))
    return detail


def build_proof_graph(
    derivations: DerivationSet, goals: Iterable[Literal]
) -> ProofGraph:
    return build_proof_detail(derivations, goals).graph
