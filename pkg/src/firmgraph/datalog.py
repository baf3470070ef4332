"""Datalog subset used to model firmware topology and vulnerabilities.

The language is deliberately small: positive Horn clauses over flat terms.
Constants are lowercase identifiers or quoted strings ('x' and "x" denote
the same constant), variables start with an uppercase letter, and
identifiers starting with an underscore are wildcards that match anything
without binding. A clause with an empty body is a fact and must be ground.

Grammar, informally::

    program  := clause*
    clause   := literal ( ':-' literal (',' literal)* )? '.'
    literal  := IDENT ( '(' term (',' term)* ')' )?
    term     := IDENT | QUOTED

``%`` starts a comment running to end of line; whitespace is insignificant
between tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import FirmgraphError


class DatalogSyntaxError(FirmgraphError):
    """Malformed clause text; carries the source position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class ProgramError(FirmgraphError):
    """A syntactically valid clause set that violates program rules."""


class ArityConflictError(ProgramError):
    """The same predicate was used with two different arities."""

    def __init__(self, predicate: str, first: int, second: int) -> None:
        self.predicate = predicate
        self.arities = (first, second)
        super().__init__(
            f"predicate {predicate!r} used with arity {second} "
            f"after being declared with arity {first}"
        )


class TermKind(str, Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"
    WILDCARD = "wildcard"


# Constants that may be written without quotes.
_BARE_CONSTANT = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_VARIABLE_NAME = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
_WILDCARD_NAME = re.compile(r"_[A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Term:
    kind: TermKind
    text: str
    # Presentation only: whether the source spelled this constant quoted.
    # Excluded from equality so 'NETWORK' and NETWORK-written-bare compare
    # equal whenever both are constants with the same text.
    quoted: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("term text must be nonempty")
        if self.kind is TermKind.VARIABLE and not _VARIABLE_NAME.match(self.text):
            raise ValueError(f"invalid variable name {self.text!r}")
        if self.kind is TermKind.WILDCARD and not _WILDCARD_NAME.match(self.text):
            raise ValueError(f"invalid wildcard name {self.text!r}")

    @property
    def is_constant(self) -> bool:
        return self.kind is TermKind.CONSTANT

    def format(self) -> str:
        if self.kind is TermKind.CONSTANT:
            if _BARE_CONSTANT.match(self.text) and not self.quoted:
                return self.text
            escaped = self.text.replace("\\", "\\\\").replace("'", "\\'")
            return f"'{escaped}'"
        return self.text


def constant(text: str, *, quoted: bool = False) -> Term:
    return Term(TermKind.CONSTANT, text, quoted=quoted)


def variable(name: str) -> Term:
    return Term(TermKind.VARIABLE, name)


def wildcard(name: str = "_") -> Term:
    return Term(TermKind.WILDCARD, name)


@dataclass(frozen=True)
class Literal:
    predicate: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.predicate:
            raise ValueError("predicate name must be nonempty")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return all(a.is_constant for a in self.args)

    def format(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(a.format() for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Literal
    body: tuple[Literal, ...] = ()
    # Optional human-readable rule name; presentation only.
    label: str | None = field(default=None, compare=False)

    @property
    def is_fact(self) -> bool:
        return not self.body

    def format(self) -> str:
        if self.is_fact:
            return f"{self.head.format()}."
        body = ", ".join(lit.format() for lit in self.body)
        return f"{self.head.format()} :- {body}."

    def with_label(self, label: str) -> "Clause":
        return replace(self, label=label)


def fact(predicate: str, *args: Term) -> Clause:
    """Build a ground fact clause."""
    return Clause(Literal(predicate, tuple(args)))


def format_literal(literal: Literal) -> str:
    return literal.format()


def format_clause(clause: Clause) -> str:
    return clause.format()


@dataclass(frozen=True, eq=True)
class Program:
    """A validated clause set with its implicit predicate arity table."""

    clauses: tuple[Clause, ...] = ()
    arities: Mapping[str, int] = field(default_factory=dict, compare=False)

    @property
    def facts(self) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if c.is_fact)

    @property
    def rules(self) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if not c.is_fact)

    def extended(self, more: Iterable[Clause]) -> "Program":
        return program_from_clauses(list(self.clauses) + list(more))

    def __hash__(self) -> int:  # arities is derived data
        return hash(self.clauses)


def program_from_clauses(clauses: Iterable[Clause]) -> Program:
    """Validate clauses and assemble a :class:`Program`.

    Enforces: consistent arity per predicate (first use declares it),
    ground facts, no wildcard in a rule head, range restriction (every
    head variable appears in the body), and set semantics for facts
    (duplicate ground facts are dropped, first occurrence wins).
    """
    arities: dict[str, int] = {}
    seen_facts: set[Literal] = set()
    kept: list[Clause] = []

    def check_arity(lit: Literal) -> None:
        known = arities.get(lit.predicate)
        if known is None:
            arities[lit.predicate] = lit.arity
        elif known != lit.arity:
            raise ArityConflictError(lit.predicate, known, lit.arity)

    for clause in clauses:
        check_arity(clause.head)
        for lit in clause.body:
            check_arity(lit)
        if clause.is_fact:
            if not clause.head.is_ground:
                raise ProgramError(
                    f"fact is not ground: {clause.format()}"
                )
            if clause.head in seen_facts:
                continue
            seen_facts.add(clause.head)
        else:
            body_vars = {
                t.text
                for lit in clause.body
                for t in lit.args
                if t.kind is TermKind.VARIABLE
            }
            for t in clause.head.args:
                if t.kind is TermKind.WILDCARD:
                    raise ProgramError(
                        f"wildcard {t.text!r} not allowed in a rule head: "
                        f"{clause.format()}"
                    )
                if t.kind is TermKind.VARIABLE and t.text not in body_vars:
                    raise ProgramError(
                        f"head variable {t.text!r} does not appear in the "
                        f"body (range restriction): {clause.format()}"
                    )
        kept.append(clause)

    return Program(tuple(kept), arities)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_T_IDENT = "ident"
_T_STRING = "string"
_T_PUNCT = "punct"
_T_EOF = "eof"

_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_CHARS = re.compile(r"[A-Za-z0-9_]")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(source: str) -> Iterator[_Token]:
    line = 1
    col = 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in "'\"":
            quote = ch
            i += 1
            col += 1
            buf: list[str] = []
            closed = False
            while i < n:
                c = source[i]
                if c == "\\" and i + 1 < n:
                    buf.append(source[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == quote:
                    i += 1
                    col += 1
                    closed = True
                    break
                if c == "\n":
                    break
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                raise DatalogSyntaxError(
                    "unterminated quoted constant", start_line, start_col
                )
            if not buf:
                raise DatalogSyntaxError(
                    "empty quoted constant", start_line, start_col
                )
            yield _Token(_T_STRING, "".join(buf), start_line, start_col)
            continue
        if _IDENT_START.match(ch):
            j = i
            while j < n and _IDENT_CHARS.match(source[j]):
                j += 1
            text = source[i:j]
            col += j - i
            i = j
            yield _Token(_T_IDENT, text, start_line, start_col)
            continue
        if ch == ":" and i + 1 < n and source[i + 1] == "-":
            yield _Token(_T_PUNCT, ":-", start_line, start_col)
            i += 2
            col += 2
            continue
        if ch in "(),.":
            yield _Token(_T_PUNCT, ch, start_line, start_col)
            i += 1
            col += 1
            continue
        raise DatalogSyntaxError(f"unexpected character {ch!r}", line, col)
    yield _Token(_T_EOF, "", line, col)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = list(_tokenize(source))
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind is not _T_EOF:
            self.pos += 1
        return tok

    def error(self, message: str) -> DatalogSyntaxError:
        tok = self.current
        return DatalogSyntaxError(message, tok.line, tok.column)

    def expect_punct(self, text: str, what: str) -> None:
        tok = self.current
        if tok.kind == _T_PUNCT and tok.text == text:
            self.advance()
            return
        raise self.error(f"expected {what}")

    def parse_term(self) -> Term:
        tok = self.current
        if tok.kind == _T_STRING:
            self.advance()
            return constant(tok.text, quoted=True)
        if tok.kind == _T_IDENT:
            self.advance()
            first = tok.text[0]
            if first == "_":
                return wildcard(tok.text)
            if first.isupper():
                return variable(tok.text)
            return constant(tok.text)
        raise self.error("expected a term")

    def parse_literal(self) -> Literal:
        tok = self.current
        if tok.kind != _T_IDENT:
            raise self.error("expected predicate name")
        self.advance()
        predicate = tok.text
        if not (self.current.kind == _T_PUNCT and self.current.text == "("):
            return Literal(predicate)
        self.advance()
        args = [self.parse_term()]
        while self.current.kind == _T_PUNCT and self.current.text == ",":
            self.advance()
            args.append(self.parse_term())
        self.expect_punct(")", "')' to close the argument list")
        return Literal(predicate, tuple(args))

    def parse_clause(self) -> Clause:
        head = self.parse_literal()
        body: list[Literal] = []
        if self.current.kind == _T_PUNCT and self.current.text == ":-":
            self.advance()
            body.append(self.parse_literal())
            while self.current.kind == _T_PUNCT and self.current.text == ",":
                self.advance()
                body.append(self.parse_literal())
        self.expect_punct(".", "'.' to terminate the clause")
        return Clause(head, tuple(body))

    def parse_program(self) -> list[Clause]:
        clauses: list[Clause] = []
        while self.current.kind is not _T_EOF:
            clauses.append(self.parse_clause())
        return clauses


def parse_program(source_text: str) -> Program:
    """Parse clause text into a validated :class:`Program`.

    Raises :class:`DatalogSyntaxError` with line/column on malformed text
    and :class:`ProgramError` (or :class:`ArityConflictError`) on
    structurally invalid programs.
    """
    return program_from_clauses(_Parser(source_text).parse_program())


def parse_clause(source_text: str) -> Clause:
    """Parse exactly one clause; convenience for tests and fact snippets."""
    parser = _Parser(source_text)
    clause = parser.parse_clause()
    if parser.current.kind is not _T_EOF:
        raise parser.error("trailing input after clause")
    return clause
