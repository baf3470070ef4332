"""Parser, formatter, and program validation tests."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firmgraph.datalog import (
    ArityConflictError,
    Clause,
    DatalogSyntaxError,
    Literal,
    ProgramError,
    TermKind,
    constant,
    format_clause,
    parse_clause,
    parse_program,
    variable,
    wildcard,
)

THREE_LINE_RULE = """\
localFileProtection(Host, User, Access, Path) :-
    fileOwner(Host, Path, User),
    ownerAccessible(Host, Access, Path).
"""


def test_parse_single_fact():
    program = parse_program('vulExists(webServer01, "CVE-2002-0392", httpd).')
    assert len(program.clauses) == 1
    clause = program.clauses[0]
    assert clause.is_fact
    assert clause.head.predicate == "vulExists"
    assert clause.head.arity == 3
    assert clause.head.args[0] == constant("webServer01")
    assert clause.head.args[1] == constant("CVE-2002-0392")


def test_parse_multiline_rule():
    program = parse_program(THREE_LINE_RULE)
    assert len(program.clauses) == 1
    rule = program.clauses[0]
    assert not rule.is_fact
    assert rule.head.predicate == "localFileProtection"
    assert rule.head.arity == 4
    assert len(rule.body) == 2
    assert {lit.predicate for lit in rule.body} == {
        "fileOwner",
        "ownerAccessible",
    }


def test_parse_empty_input():
    program = parse_program("")
    assert program.clauses == ()
    program = parse_program("% only a comment\n")
    assert program.clauses == ()


def test_parse_zero_arity_literals():
    program = parse_program("a. b :- a.")
    assert len(program.clauses) == 2
    assert program.clauses[0].head == Literal("a")
    assert program.clauses[1].body == (Literal("a"),)


def test_arity_conflict():
    with pytest.raises(ArityConflictError) as excinfo:
        parse_program("foo(a, b). foo(c).")
    assert excinfo.value.predicate == "foo"
    assert excinfo.value.arities == (2, 1)


def test_missing_period_reports_position():
    with pytest.raises(DatalogSyntaxError) as excinfo:
        parse_program("foo(a)\nbar(b).")
    assert excinfo.value.line == 2


def test_unbalanced_parentheses():
    with pytest.raises(DatalogSyntaxError):
        parse_program("foo(a, b.")


def test_empty_predicate_name():
    with pytest.raises(DatalogSyntaxError):
        parse_program("(a).")


def test_unterminated_and_empty_strings():
    with pytest.raises(DatalogSyntaxError):
        parse_program("foo('abc).")
    with pytest.raises(DatalogSyntaxError):
        parse_program("foo('').")


def test_quote_styles_normalize_to_one_constant():
    a = parse_clause("flag('NETWORK').").head.args[0]
    b = parse_clause('flag("NETWORK").').head.args[0]
    assert a == b
    assert a.kind is TermKind.CONSTANT
    assert a.text == "NETWORK"


def test_facts_must_be_ground():
    with pytest.raises(ProgramError):
        parse_program("foo(X).")
    with pytest.raises(ProgramError):
        parse_program("foo(_).")


def test_range_restriction():
    with pytest.raises(ProgramError):
        parse_program("head(X) :- body(Y).")


def test_wildcard_forbidden_in_head():
    with pytest.raises(ProgramError):
        parse_program("head(_x) :- body(_x).")


def test_duplicate_facts_collapse():
    program = parse_program("a(b). a(b). a(c).")
    assert len(program.clauses) == 2


def test_comments_and_whitespace():
    program = parse_program(
        "% leading comment\n"
        "a(b).  % trailing comment\n"
        "   c( d ,e ).\n"
    )
    assert len(program.clauses) == 2
    assert program.clauses[1].head.args == (constant("d"), constant("e"))


def test_format_quoted_flow_constant():
    clause = parse_clause("dataFlow(uhttpd, opkg, 'environment').")
    assert format_clause(clause) == "dataFlow(uhttpd, opkg, 'environment')."


def test_format_fact_without_body_marker():
    clause = Clause(Literal("ping", (constant("pong"),)))
    assert format_clause(clause) == "ping(pong)."
    assert ":-" not in format_clause(clause)


def test_format_quotes_when_needed():
    clause = Clause(Literal("sev", (constant("HIGH"),)))
    assert format_clause(clause) == "sev('HIGH')."
    clause = Clause(Literal("id", (constant("CVE-2017-13089"),)))
    assert format_clause(clause) == "id('CVE-2017-13089')."


def test_escaped_quote_round_trip():
    original = Clause(Literal("note", (constant("it's"),)))
    text = format_clause(original)
    assert parse_clause(text) == original


# --- round-trip property ----------------------------------------------------

_constants = st.one_of(
    st.from_regex(r"[a-z][A-Za-z0-9_]{0,8}", fullmatch=True),
    st.text(
        alphabet=st.characters(
            codec="ascii", categories=("L", "N", "P", "S"), exclude_characters=""
        ),
        min_size=1,
        max_size=10,
    ),
)

_terms = st.one_of(
    _constants.map(lambda text: constant(text)),
    st.from_regex(r"[A-Z][A-Za-z0-9_]{0,6}", fullmatch=True).map(variable),
    st.from_regex(r"_[A-Za-z0-9_]{0,6}", fullmatch=True).map(wildcard),
)

_literals = st.builds(
    Literal,
    st.from_regex(r"[a-z][A-Za-z0-9_]{0,8}", fullmatch=True),
    st.lists(_terms, max_size=4).map(tuple),
)


def _well_formed_clause(head: Literal, body: tuple[Literal, ...]) -> Clause:
    # Rewrite the head so the clause satisfies the range restriction.
    body_vars = [
        t for lit in body for t in lit.args if t.kind is TermKind.VARIABLE
    ]
    fixed_args = []
    for term in head.args:
        if term.kind is TermKind.CONSTANT:
            fixed_args.append(term)
        elif body_vars:
            fixed_args.append(body_vars[0])
        else:
            fixed_args.append(constant("c"))
    head = Literal(head.predicate, tuple(fixed_args))
    if not body and not head.is_ground:
        body = (Literal("ground", ()),)
    return Clause(head, body)


_clauses = st.builds(
    _well_formed_clause, _literals, st.lists(_literals, max_size=3).map(tuple)
)


@given(_clauses)
@settings(max_examples=300, deadline=None)
def test_clause_round_trip(clause):
    assert parse_clause(format_clause(clause)) == clause


def test_random_generated_programs_round_trip():
    from oracle import random_program

    rng = random.Random(20240817)
    for _ in range(50):
        program = random_program(rng)
        text = "\n".join(format_clause(c) for c in program.clauses)
        reparsed = parse_program(text)
        assert reparsed.clauses == program.clauses
