"""Bottom-up fixpoint evaluation that records how every literal was derived.

Evaluation is semi-naive: each pass only considers rule instantiations in
which at least one body literal was derived in the previous pass, so the
derived set converges without re-deriving everything per pass. The result
is the least fixpoint, independent of clause order.

Every successful rule instantiation is recorded as a :class:`Derivation`
(rule, ground head, ground body). All distinct instantiations are kept,
including alternative derivations of literals that were already known;
proof-graph construction needs them to render alternatives.

A literal's *stage* is the pass on which it first appeared (input facts
are stage 0). Stages equal the literal's minimal derivation depth and are
therefore deterministic and clause-order independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .datalog import Clause, Literal, Program, Term, TermKind
from .errors import FirmgraphError

DEFAULT_DERIVATION_CAP = 1_000_000


class DerivationLimitError(FirmgraphError):
    """The derived-fact count exceeded the configured cap."""

    def __init__(self, cap: int) -> None:
        self.cap = cap
        super().__init__(
            f"derived-fact count exceeded the cap of {cap}; "
            "the program looks runaway"
        )


@dataclass(frozen=True)
class Derivation:
    """One ground rule instantiation: ``head`` follows from ``body``."""

    rule: Clause
    head: Literal
    body: tuple[Literal, ...]
    # Variable bindings of this instantiation, sorted by name. Derived
    # data (recoverable from rule and body), excluded from equality.
    bindings: tuple[tuple[str, str], ...] = field(default=(), compare=False)


@dataclass(frozen=True, eq=False)
class DerivationSet:
    """Least fixpoint of a program plus per-literal provenance."""

    literals: frozenset[Literal]
    input_facts: frozenset[Literal]
    stages: Mapping[Literal, int]
    derivations: Mapping[Literal, frozenset[Derivation]]

    @property
    def derived_literals(self) -> frozenset[Literal]:
        return self.literals - self.input_facts

    def __contains__(self, literal: Literal) -> bool:
        return literal in self.literals


def _match_args(
    pattern: Literal, ground: Literal, env: dict[str, Term]
) -> dict[str, Term] | None:
    """Try to extend ``env`` so that ``pattern`` matches ``ground``.

    Wildcards match anything without binding; each occurrence is
    independent. Returns the extended environment or None.
    """
    if pattern.predicate != ground.predicate or pattern.arity != ground.arity:
        return None
    out = env
    copied = False
    for p_arg, g_arg in zip(pattern.args, ground.args):
        if p_arg.kind is TermKind.CONSTANT:
            if p_arg != g_arg:
                return None
        elif p_arg.kind is TermKind.VARIABLE:
            bound = out.get(p_arg.text)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[p_arg.text] = g_arg
            elif bound != g_arg:
                return None
        # wildcard: always matches
    return out


def _join(
    body: tuple[Literal, ...],
    position: int,
    pivot: int,
    env: dict[str, Term],
    ground_so_far: list[Literal],
    delta_by_pred: dict[str, list[Literal]],
    all_by_pred: dict[str, list[Literal]],
) -> Iterator[tuple[tuple[Literal, ...], dict[str, Term]]]:
    """Enumerate all ground instantiations of ``body``.

    The literal at ``pivot`` only matches literals from the last pass's
    delta; the others match the full set.
    """
    if position == len(body):
        yield tuple(ground_so_far), env
        return
    pattern = body[position]
    pool = delta_by_pred if position == pivot else all_by_pred
    for candidate in pool.get(pattern.predicate, ()):
        extended = _match_args(pattern, candidate, env)
        if extended is None:
            continue
        ground_so_far.append(candidate)
        yield from _join(
            body, position + 1, pivot, extended, ground_so_far,
            delta_by_pred, all_by_pred,
        )
        ground_so_far.pop()


def _substitute(literal: Literal, env: dict[str, Term]) -> Literal:
    args = tuple(
        env[a.text] if a.kind is TermKind.VARIABLE else a for a in literal.args
    )
    return Literal(literal.predicate, args)


def evaluate(
    program: Program, *, derivation_cap: int = DEFAULT_DERIVATION_CAP
) -> DerivationSet:
    """Compute the least fixpoint of ``program`` with full provenance.

    Raises :class:`DerivationLimitError` when the number of distinct
    literals exceeds ``derivation_cap``.
    """
    input_facts = frozenset(c.head for c in program.facts)
    all_literals: set[Literal] = set(input_facts)
    stages: dict[Literal, int] = {lit: 0 for lit in input_facts}
    derivations: dict[Literal, set[Derivation]] = {}

    all_by_pred: dict[str, list[Literal]] = {}
    for lit in sorted(input_facts, key=Literal.format):
        all_by_pred.setdefault(lit.predicate, []).append(lit)

    rules = program.rules
    delta = set(input_facts)
    stage_no = 0
    while delta:
        stage_no += 1
        delta_by_pred: dict[str, list[Literal]] = {}
        for lit in sorted(delta, key=Literal.format):
            delta_by_pred.setdefault(lit.predicate, []).append(lit)
        fresh: set[Literal] = set()
        for rule in rules:
            for pivot in range(len(rule.body)):
                if rule.body[pivot].predicate not in delta_by_pred:
                    continue
                for ground_body, env in _join(
                    rule.body, 0, pivot, {}, [], delta_by_pred, all_by_pred
                ):
                    head = _substitute(rule.head, env)
                    bucket = derivations.setdefault(head, set())
                    derivation = Derivation(
                        rule,
                        head,
                        ground_body,
                        bindings=tuple(
                            sorted((name, term.text) for name, term in env.items())
                        ),
                    )
                    if derivation in bucket:
                        continue
                    bucket.add(derivation)
                    if head not in all_literals:
                        all_literals.add(head)
                        stages[head] = stage_no
                        fresh.add(head)
                        if len(all_literals) > derivation_cap:
                            raise DerivationLimitError(derivation_cap)
        for lit in sorted(fresh, key=Literal.format):
            all_by_pred.setdefault(lit.predicate, []).append(lit)
        delta = fresh

    return DerivationSet(
        literals=frozenset(all_literals),
        input_facts=input_facts,
        stages=stages,
        derivations={k: frozenset(v) for k, v in derivations.items()},
    )
