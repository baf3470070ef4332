"""Proof-graph construction tests."""

from __future__ import annotations

import random

import pytest

from firmgraph.datalog import Literal, parse_program, program_from_clauses
from firmgraph.engine import evaluate
from firmgraph.proof import (
    NodeKind,
    UnknownGoalError,
    build_proof_detail,
    build_proof_graph,
)
from oracle import random_program


def _kinds(graph):
    return [node.kind for node in graph.nodes]


def test_empty_goal_set():
    result = evaluate(parse_program("a."))
    graph = build_proof_graph(result, [])
    assert graph.nodes == ()
    assert graph.edges == ()


def test_minimal_chain():
    result = evaluate(parse_program("a. b :- a."))
    graph = build_proof_graph(result, [Literal("b")])
    assert len(graph.nodes) == 3
    assert _kinds(graph) == [NodeKind.LEAF, NodeKind.AND, NodeKind.OR]
    assert graph.edges == ((0, 1), (1, 2))
    labels = {n.kind: n.label for n in graph.nodes}
    assert labels[NodeKind.LEAF] == "a"
    assert labels[NodeKind.OR] == "b"


def test_leaf_nodes_have_in_degree_zero():
    result = evaluate(parse_program("a. b. c :- a, b. d :- c, a."))
    graph = build_proof_graph(result, [Literal("d")])
    incoming = {node.id: 0 for node in graph.nodes}
    for _, dst in graph.edges:
        incoming[dst] += 1
    for node in graph.nodes:
        if node.kind is NodeKind.LEAF:
            assert incoming[node.id] == 0
        elif node.kind is NodeKind.AND:
            outgoing = [e for e in graph.edges if e[0] == node.id]
            assert len(outgoing) == 1


def test_or_node_collects_alternative_derivations():
    result = evaluate(parse_program("a. b. goal :- a. goal :- b."))
    graph = build_proof_graph(result, [Literal("goal")])
    or_nodes = [n for n in graph.nodes if n.kind is NodeKind.OR]
    assert len(or_nodes) == 1
    incoming = [e for e in graph.edges if e[1] == or_nodes[0].id]
    assert len(incoming) == 2


def test_unknown_goal():
    result = evaluate(parse_program("a."))
    with pytest.raises(UnknownGoalError):
        build_proof_graph(result, [Literal("nope")])


def test_goal_that_is_an_input_fact_is_a_leaf():
    result = evaluate(parse_program("a. a :- a."))
    graph = build_proof_graph(result, [Literal("a")])
    assert len(graph.nodes) == 1
    assert graph.nodes[0].kind is NodeKind.LEAF


def test_graph_is_acyclic_even_with_mutual_support():
    program = parse_program(
        "seed. p :- seed. q :- p. p :- q."
    )
    result = evaluate(program)
    graph = build_proof_graph(result, [Literal("p"), Literal("q")])
    _assert_acyclic(graph)


def _assert_acyclic(graph):
    order = {node.id: i for i, node in enumerate(graph.nodes)}
    for src, dst in graph.edges:
        assert order[src] < order[dst], "ids must form a topological order"


def test_ids_are_dense_and_topological():
    result = evaluate(
        parse_program("a. b. c :- a, b. d :- c. e :- d, a.")
    )
    graph = build_proof_graph(result, [Literal("e")])
    assert [n.id for n in graph.nodes] == list(range(len(graph.nodes)))
    _assert_acyclic(graph)


def test_node_multiset_independent_of_clause_order():
    rng = random.Random(4242)
    for _ in range(20):
        program = random_program(rng)
        result = evaluate(program)
        goals = sorted(result.derived_literals, key=Literal.format)
        if not goals:
            continue
        detail = build_proof_detail(result, goals)
        clauses = list(program.clauses)
        rng.shuffle(clauses)
        shuffled_result = evaluate(program_from_clauses(clauses))
        shuffled_detail = build_proof_detail(shuffled_result, goals)
        assert detail.node_keys() == shuffled_detail.node_keys()
        base_labels = sorted((n.kind, n.label) for n in detail.graph.nodes)
        shuffled_labels = sorted(
            (n.kind, n.label) for n in shuffled_detail.graph.nodes
        )
        assert base_labels == shuffled_labels


def test_proof_soundness_on_random_programs():
    rng = random.Random(31337)
    checked = 0
    for _ in range(40):
        program = random_program(rng)
        result = evaluate(program)
        goals = sorted(result.derived_literals, key=Literal.format)
        if not goals:
            continue
        detail = build_proof_detail(result, goals)
        graph = detail.graph
        _assert_acyclic(graph)
        for node in graph.nodes:
            if node.kind is not NodeKind.AND:
                continue
            derivation = detail.derivation_by_id[node.id]
            # premises rendered in the graph are exactly the recorded body
            premise_ids = [src for src, dst in graph.edges if dst == node.id]
            premises = {detail.literal_by_id[i] for i in premise_ids}
            assert premises == set(derivation.body)
            for premise in derivation.body:
                assert premise in result.literals
            (target_id,) = [dst for src, dst in graph.edges if src == node.id]
            assert detail.literal_by_id[target_id] == derivation.head
            checked += 1
    assert checked > 0
