"""Corpus statistics and per-binary impact/likelihood/risk ranking.

A binary's *impact* is its mean number of incident data-flow interactions
per attack graph it appears in; its *likelihood* is the exploitation
percentage from :func:`firmgraph.vulnintel.likelihood`; *risk* is the
product. Ranking uses unrounded values (ties broken by name); display
rounds impact and likelihood to one decimal and risk to the nearest
integer (half away from zero).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .attackgraph import AgMetrics, AttackGraph
from .errors import FirmgraphError
from .firmware import sanitize_name
from .vulnintel import ExploitIntel, VulnMatch, likelihood


class EmptyCorpusError(FirmgraphError):
    def __init__(self) -> None:
        super().__init__("cannot aggregate statistics over an empty corpus")


class ZeroOccurrenceError(FirmgraphError):
    def __init__(self) -> None:
        super().__init__("impact needs at least one occurrence")


def impact(occurrences: int, interactions: int) -> float:
    """Interactions per appearance, unrounded."""
    if occurrences < 1:
        raise ZeroOccurrenceError()
    return interactions / occurrences


def risk_score(impact_value: float, likelihood_pct: float) -> float:
    """Unrounded impact x likelihood product used for ranking."""
    return impact_value * likelihood_pct


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def display_risk(impact_value: float, likelihood_pct: float) -> int:
    return round_half_up(risk_score(impact_value, likelihood_pct))


@dataclass(frozen=True)
class BinaryRiskRow:
    binary: str
    occurrences: int
    interactions: int
    impact: float
    cve_count: int
    likelihood: float
    risk: float

    @property
    def impact_display(self) -> float:
        return round(self.impact, 1)

    @property
    def likelihood_display(self) -> float:
        return round(self.likelihood, 1)

    @property
    def risk_display(self) -> int:
        return round_half_up(self.risk)

    def as_dict(self) -> dict:
        return {
            "binary": self.binary,
            "occurrences": self.occurrences,
            "interactions": self.interactions,
            "impact": self.impact_display,
            "cve_count": self.cve_count,
            "likelihood": self.likelihood_display,
            "risk": self.risk_display,
        }


@dataclass(frozen=True)
class CorpusStats:
    metrics: tuple[AgMetrics, ...]
    mean_attack_points: float
    mean_potentially_compromised_oss: float
    mean_vulnerable_binaries: float
    max_attack_points: int
    max_potentially_compromised_oss: int
    max_vulnerable_binaries: int

    def as_dict(self) -> dict:
        return {
            "firmware_count": len(self.metrics),
            "mean": {
                "attack_points": self.mean_attack_points,
                "potentially_compromised_oss": self.mean_potentially_compromised_oss,
                "vulnerable_binaries": self.mean_vulnerable_binaries,
            },
            "max": {
                "attack_points": self.max_attack_points,
                "potentially_compromised_oss": self.max_potentially_compromised_oss,
                "vulnerable_binaries": self.max_vulnerable_binaries,
            },
        }


def corpus_stats(metrics_list: Sequence[AgMetrics]) -> CorpusStats:
    """Arithmetic mean (one decimal) and max per counter."""
    if not metrics_list:
        raise EmptyCorpusError()
    n = len(metrics_list)
    totals = [0, 0, 0]
    maxes = [0, 0, 0]
    for m in metrics_list:
        for i, value in enumerate(m.as_tuple()):
            totals[i] += value
            maxes[i] = max(maxes[i], value)
    means = [round(t / n, 1) for t in totals]
    return CorpusStats(
        metrics=tuple(metrics_list),
        mean_attack_points=means[0],
        mean_potentially_compromised_oss=means[1],
        mean_vulnerable_binaries=means[2],
        max_attack_points=maxes[0],
        max_potentially_compromised_oss=maxes[1],
        max_vulnerable_binaries=maxes[2],
    )


def _binaries_in_graph(ag: AttackGraph) -> set[str]:
    present = set(ag.goal_binaries())
    present.update(lit.args[0].text for lit in ag.leaf_literals("bugHyp"))
    return present


def _incident_flow_count(ag: AttackGraph, binary: str) -> int:
    count = 0
    for lit in ag.leaf_literals("dataFlow"):
        src, dst = lit.args[0].text, lit.args[1].text
        if binary in (src, dst):
            count += 1
    return count


def binary_risk_table(
    corpus: Sequence[tuple[AttackGraph, Sequence[VulnMatch]]],
    intel: ExploitIntel,
) -> list[BinaryRiskRow]:
    """One row per binary that appears in at least one attack graph,
    sorted by unrounded risk descending (ties by name)."""
    occurrences: dict[str, int] = {}
    interactions: dict[str, int] = {}
    matches_by_binary: dict[str, list[VulnMatch]] = {}

    for ag, matches in corpus:
        present = _binaries_in_graph(ag)
        for binary in present:
            occurrences[binary] = occurrences.get(binary, 0) + 1
            interactions[binary] = interactions.get(binary, 0) + _incident_flow_count(
                ag, binary
            )
        for match in matches:
            matches_by_binary.setdefault(
                sanitize_name(match.binary), []
            ).append(match)

    rows = []
    for binary in occurrences:
        binary_matches = matches_by_binary.get(binary, [])
        impact_value = impact(occurrences[binary], interactions[binary])
        likelihood_pct = likelihood(binary, binary_matches, intel)
        cve_count = len({m.record.cve_id for m in binary_matches})
        rows.append(
            BinaryRiskRow(
                binary=binary,
                occurrences=occurrences[binary],
                interactions=interactions[binary],
                impact=impact_value,
                cve_count=cve_count,
                likelihood=likelihood_pct,
                risk=risk_score(impact_value, likelihood_pct),
            )
        )
    rows.sort(key=lambda r: (-r.risk, r.binary))
    return rows


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

_CSV_COLUMNS = (
    "binary",
    "occurrences",
    "interactions",
    "impact",
    "cve_count",
    "likelihood",
    "risk",
)


def risk_table_csv(rows: Iterable[BinaryRiskRow]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())
    return buffer.getvalue()


def risk_table_json(rows: Iterable[BinaryRiskRow]) -> str:
    return json.dumps([r.as_dict() for r in rows], indent=2, sort_keys=True) + "\n"


def corpus_stats_json(stats: CorpusStats) -> str:
    return json.dumps(stats.as_dict(), indent=2, sort_keys=True) + "\n"
