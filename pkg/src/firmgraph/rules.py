"""Shipped interaction rulesets for the two firmware threat models.

``external_threat`` models an outside attacker entering through an
Internet-facing binary and moving laterally along data flows.
``internal_threat`` models a compromised third-party (OSS) binary acting
as an insider. ``combined`` runs both in one fixpoint so an insider chain
and an external chain can meet.

Derivation fires only on remotely exploitable (``'NETWORK'``) flaws of
``'CRITICAL'`` or ``'HIGH'`` severity; lower severities never enable a
step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datalog import Clause, parse_program
from .errors import ConfigError

GOAL_PREDICATES = frozenset({"vulnerableSoftware", "potentiallyVulnerableSoftware"})

EXTERNAL_THREAT_TEXT = """\
% An Internet-facing binary with a remotely exploitable critical flaw.
vulnerableSoftware(SW) :-
    externalInteraction('Internet', SW, _interactionType),
    vulExists(_cveId, SW, 'NETWORK', _loseTypes, 'CRITICAL').

% Same entry point, high severity.
vulnerableSoftware(SW) :-
    externalInteraction('Internet', SW, _interactionType),
    vulExists(_cveId, SW, 'NETWORK', _loseTypes, 'HIGH').

% Lateral movement: a vulnerable binary feeds data into another binary
% that carries a remotely exploitable critical flaw.
vulnerableSoftware(SW2) :-
    vulnerableSoftware(SW1),
    dataFlow(SW1, SW2, _flowType),
    vulExists(_cveId, SW2, 'NETWORK', _loseTypes, 'CRITICAL').

% Lateral movement, high severity.
vulnerableSoftware(SW2) :-
    vulnerableSoftware(SW1),
    dataFlow(SW1, SW2, _flowType),
    vulExists(_cveId, SW2, 'NETWORK', _loseTypes, 'HIGH').
"""

INTERNAL_THREAT_TEXT = """\
% Any binary under an undocumented-bug hypothesis may already be
% compromised.
potentiallyVulnerableSoftware(Software) :-
    bugHyp(Software, _accessVector, _loseTypes).

% A potentially compromised binary feeds data into a binary with a
% remotely exploitable critical flaw.
vulnerableSoftware(SW2) :-
    potentiallyVulnerableSoftware(SW1),
    dataFlow(SW1, SW2, _flowType),
    vulExists(_cveId, SW2, 'NETWORK', _loseTypes, 'CRITICAL').

% Same step, high severity.
vulnerableSoftware(SW2) :-
    potentiallyVulnerableSoftware(SW1),
    dataFlow(SW1, SW2, _flowType),
    vulExists(_cveId, SW2, 'NETWORK', _loseTypes, 'HIGH').
"""

_EXTERNAL_LABELS = (
    "internet_facing_critical_cve",
    "internet_facing_high_cve",
    "lateral_flow_critical_cve",
    "lateral_flow_high_cve",
)

_INTERNAL_LABELS = (
    "oss_bug_hypothesis",
    "oss_flow_critical_cve",
    "oss_flow_high_cve",
)

RULESET_NAMES = ("external_threat", "internal_threat", "combined")

_ALIASES = {
    "external": "external_threat",
    "internal": "internal_threat",
    "external_threat": "external_threat",
    "internal_threat": "internal_threat",
    "combined": "combined",
}


@dataclass(frozen=True)
class Ruleset:
    name: str
    rules: tuple[Clause, ...]


def _labeled_rules(text: str, labels: tuple[str, ...]) -> tuple[Clause, ...]:
    clauses = parse_program(text).clauses
    assert len(clauses) == len(labels)
    return tuple(c.with_label(label) for c, label in zip(clauses, labels))


def _build() -> dict[str, Ruleset]:
    external = _labeled_rules(EXTERNAL_THREAT_TEXT, _EXTERNAL_LABELS)
    internal = _labeled_rules(INTERNAL_THREAT_TEXT, _INTERNAL_LABELS)
    return {
        "external_threat": Ruleset("external_threat", external),
        "internal_threat": Ruleset("internal_threat", internal),
        "combined": Ruleset("combined", external + internal),
    }


_RULESETS = _build()


def get_ruleset(name: str) -> Ruleset:
    """Look up a shipped ruleset; short aliases are accepted."""
    resolved = _ALIASES.get(name)
    if resolved is None:
        raise ConfigError(
            f"unknown ruleset {name!r}; expected one of "
            f"{', '.join(sorted(_ALIASES))}"
        )
    return _RULESETS[resolved]


def ruleset_text(name: str) -> str:
    """Clause text of a shipped ruleset, suitable for saving to a file."""
    ruleset = get_ruleset(name)
    return "\n".join(f"% {c.label}\n{c.format()}" for c in ruleset.rules) + "\n"


def custom_ruleset(name: str, text: str) -> Ruleset:
    """Build a ruleset from user-provided clause text (rules only)."""
    program = parse_program(text)
    if program.facts:
        raise ConfigError("a ruleset file must contain rules only, no facts")
    labeled = tuple(
        c if c.label else c.with_label(f"{name}_rule_{i + 1}")
        for i, c in enumerate(program.clauses)
    )
    return Ruleset(name, labeled)
