"""Vulnerability intelligence: CVE matching, OSS detection, likelihood.

The CVE database is a flat snapshot format (JSON array of records) so
analyses run offline and reproducibly; :func:`import_nvd_feed` converts
NVD API 2.0 payloads into that format. Exploit intelligence combines a
known-exploited catalog (membership forces likelihood 100%) with
exploit-prediction scores in [0, 1].
"""

from __future__ import annotations

import csv
import gzip
import json
import logging
import os
import re
import urllib.request
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .datalog import Clause, constant, fact
from .errors import SchemaError
from .firmware import BinaryInventory, binary_term, sanitize_name

logger = logging.getLogger(__name__)

ACCESS_VECTORS = frozenset({"NETWORK", "ADJACENT", "LOCAL", "PHYSICAL"})
SEVERITIES = frozenset({"LOW", "MEDIUM", "HIGH", "CRITICAL"})
LOSE_TYPES = frozenset(
    {"confidentiality_loss", "data_modification", "availability_loss"}
)

_CVE_ID = re.compile(r"CVE-\d{4}-\d{4,}\Z")

DEFAULT_EPSS_URL = "https://epss.cyentia.com/epss_scores-current.csv.gz"
DEFAULT_KEV_URL = (
    "https://www.cisa.gov/sites/default/files/feeds/"
    "known_exploited_vulnerabilities.json"
)


@dataclass(frozen=True)
class CveRecord:
    cve_id: str
    product: str
    affected_versions: tuple[str, ...]
    access_vector: str
    severity: str
    lose_types: tuple[str, ...]


@dataclass
class CveDatabase:
    records: tuple[CveRecord, ...] = ()
    by_product: dict[str, tuple[int, ...]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def products(self) -> frozenset[str]:
        return frozenset(self.by_product)


@dataclass(frozen=True)
class ExploitIntel:
    kev: frozenset[str] = frozenset()
    epss: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class VulnMatch:
    binary: str
    record: CveRecord
    matched_version: str


# ---------------------------------------------------------------------------
# Version constraints
# ---------------------------------------------------------------------------

_COMPARATORS = (">=", "<=", "<", ">")


def _parse_version(version: str) -> tuple[int, ...] | None:
    """Numeric dotted form after stripping a leading v; None otherwise."""
    text = version.strip()
    if text[:1] in ("v", "V"):
        text = text[1:]
    if not text:
        return None
    parts = text.split(".")
    out = []
    for part in parts:
        if not part.isdigit():
            return None
        out.append(int(part))
    return tuple(out)


def _versions_equal(a: str, b: str) -> bool:
    if a == b:
        return True
    strip = lambda v: v[1:] if v[:1] in ("v", "V") else v  # noqa: E731
    return strip(a) == strip(b)


def version_satisfies(version: str, constraint: str) -> bool:
    """Check one constraint: ``any``, an exact version, or a comparator
    list such as ``>=1.0,<2.0`` (half-open ranges)."""
    constraint = constraint.strip()
    if constraint == "any":
        return True
    if not constraint.startswith(_COMPARATORS):
        return _versions_equal(version, constraint)
    parsed = _parse_version(version)
    if parsed is None:
        return False
    for part in constraint.split(","):
        part = part.strip()
        for op in _COMPARATORS:
            if part.startswith(op):
                bound = _parse_version(part[len(op):])
                if bound is None:
                    return False
                if op == ">=" and not parsed >= bound:
                    return False
                if op == "<=" and not parsed <= bound:
                    return False
                if op == "<" and not parsed < bound:
                    return False
                if op == ">" and not parsed > bound:
                    return False
                break
        else:
            return False
    return True


def version_matches(version: str, constraints: Sequence[str]) -> bool:
    if version == "*":
        return True
    return any(version_satisfies(version, c) for c in constraints)


# ---------------------------------------------------------------------------
# Snapshot loading
# ---------------------------------------------------------------------------

_RECORD_FIELDS = (
    "cve_id",
    "product",
    "affected_versions",
    "access_vector",
    "severity",
    "lose_types",
)


def _validate_record(raw: Mapping, path: str) -> CveRecord:
    for key in _RECORD_FIELDS:
        if key not in raw:
            raise SchemaError(f"missing field {key!r}", path)
    cve_id = raw["cve_id"]
    if not isinstance(cve_id, str) or not _CVE_ID.match(cve_id):
        raise SchemaError(f"invalid cve_id {cve_id!r}", f"{path}.cve_id")
    product = raw["product"]
    if not isinstance(product, str) or not product:
        raise SchemaError("product must be a nonempty string", f"{path}.product")
    versions = raw["affected_versions"]
    if not isinstance(versions, list) or not all(
        isinstance(v, str) and v for v in versions
    ):
        raise SchemaError(
            "affected_versions must be a list of constraint strings",
            f"{path}.affected_versions",
        )
    access_vector = raw["access_vector"]
    if access_vector not in ACCESS_VECTORS:
        raise SchemaError(
            f"access_vector {access_vector!r} not in "
            f"{sorted(ACCESS_VECTORS)}",
            f"{path}.access_vector",
        )
    severity = raw["severity"]
    if severity not in SEVERITIES:
        raise SchemaError(
            f"severity {severity!r} not in {sorted(SEVERITIES)}",
            f"{path}.severity",
        )
    lose_types = raw["lose_types"]
    if (
        not isinstance(lose_types, list)
        or not lose_types
        or not all(lt in LOSE_TYPES for lt in lose_types)
    ):
        raise SchemaError(
            f"lose_types must be a nonempty subset of {sorted(LOSE_TYPES)}",
            f"{path}.lose_types",
        )
    return CveRecord(
        cve_id=cve_id,
        product=product.lower(),
        affected_versions=tuple(versions),
        access_vector=access_vector,
        severity=severity,
        lose_types=tuple(sorted(lose_types)),
    )


def load_cve_db(document: str | Sequence) -> CveDatabase:
    """Load the snapshot format: a JSON array of CVE records.

    Duplicate (cve_id, product) pairs are collapsed last-wins with a
    warning; the product index is rebuilt from the surviving records.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Sequence) or isinstance(document, (str, bytes)):
        raise SchemaError("snapshot must be an array of records")

    warnings: list[str] = []
    by_key: dict[tuple[str, str], CveRecord] = {}
    for i, raw in enumerate(document):
        if not isinstance(raw, Mapping):
            raise SchemaError("record must be an object", f"[{i}]")
        record = _validate_record(raw, f"[{i}]")
        key = (record.cve_id, record.product)
        if key in by_key:
            warnings.append(
                f"duplicate record for {record.cve_id}/{record.product};"
                " keeping the later one"
            )
        by_key[key] = record

    records = tuple(by_key.values())
    index: dict[str, list[int]] = {}
    for i, record in enumerate(records):
        index.setdefault(record.product, []).append(i)
    db = CveDatabase(
        records=records,
        by_product={k: tuple(v) for k, v in index.items()},
        warnings=warnings,
    )
    for message in warnings:
        logger.warning("%s", message)
    return db


# ---------------------------------------------------------------------------
# NVD 2.0 import adapter
# ---------------------------------------------------------------------------

_V2_SEVERITY_BANDS = ((4.0, "LOW"), (7.0, "MEDIUM"), (9.0, "HIGH"))


def _v2_score_to_severity(score: float) -> str:
    for bound, name in _V2_SEVERITY_BANDS:
        if score < bound:
            return name
    return "CRITICAL"


def _lose_types_from_impacts(conf: str, integ: str, avail: str) -> list[str]:
    out = []
    if conf.upper() != "NONE":
        out.append("confidentiality_loss")
    if integ.upper() != "NONE":
        out.append("data_modification")
    if avail.upper() != "NONE":
        out.append("availability_loss")
    return out


def _cpe_constraints(match: Mapping) -> list[str]:
    criteria = match.get("criteria", "")
    parts = criteria.split(":")
    version = parts[5] if len(parts) > 5 else "*"
    if version not in ("*", "-", ""):
        return [version]
    lower = match.get("versionStartIncluding")
    upper = match.get("versionEndExcluding")
    if lower and upper:
        return [f">={lower},<{upper}"]
    if upper:
        return [f"<{upper}"]
    if lower:
        return [f">={lower}"]
    return ["any"]


def import_nvd_feed(document: str | Mapping) -> list[dict]:
    """Convert an NVD API 2.0 payload into snapshot-format records."""
    if isinstance(document, str):
        document = json.loads(document)
    vulnerabilities = document.get("vulnerabilities", [])
    out: list[dict] = []
    for entry in vulnerabilities:
        cve = entry.get("cve", {})
        cve_id = cve.get("id")
        if not cve_id:
            continue
        metrics = cve.get("metrics", {})
        access_vector = None
        severity = None
        lose_types: list[str] = []
        for key in ("cvssMetricV31", "cvssMetricV30"):
            for metric in metrics.get(key, []):
                data = metric.get("cvssData", {})
                access_vector = data.get("attackVector")
                severity = data.get("baseSeverity")
                lose_types = _lose_types_from_impacts(
                    data.get("confidentialityImpact", "NONE"),
                    data.get("integrityImpact", "NONE"),
                    data.get("availabilityImpact", "NONE"),
                )
                break
            if severity:
                break
        if not severity:
            for metric in metrics.get("cvssMetricV2", []):
                data = metric.get("cvssData", {})
                access_vector = {
                    "NETWORK": "NETWORK",
                    "ADJACENT_NETWORK": "ADJACENT",
                    "LOCAL": "LOCAL",
                }.get(data.get("accessVector", ""), "LOCAL")
                severity = _v2_score_to_severity(float(data.get("baseScore", 0)))
                lose_types = _lose_types_from_impacts(
                    data.get("confidentialityImpact", "NONE"),
                    data.get("integrityImpact", "NONE"),
                    data.get("availabilityImpact", "NONE"),
                )
                break
        if not severity or not access_vector:
            continue
        if not lose_types:
            continue

        constraints_by_product: dict[str, list[str]] = {}
        for config in cve.get("configurations", []):
            for node in config.get("nodes", []):
                for match in node.get("cpeMatch", []):
                    if not match.get("vulnerable", False):
                        continue
                    parts = match.get("criteria", "").split(":")
                    if len(parts) < 5:
                        continue
                    product = parts[4].lower()
                    constraints_by_product.setdefault(product, []).extend(
                        _cpe_constraints(match)
                    )
        for product, constraints in constraints_by_product.items():
            out.append(
                {
                    "cve_id": cve_id,
                    "product": product,
                    "affected_versions": sorted(set(constraints)),
                    "access_vector": access_vector,
                    "severity": severity,
                    "lose_types": lose_types,
                }
            )
    return out


# ---------------------------------------------------------------------------
# Matching and OSS detection
# ---------------------------------------------------------------------------


def _product_key(name: str) -> str:
    return sanitize_name(name.lower())


def match_vulnerabilities(
    inventory: BinaryInventory, db: CveDatabase
) -> list[VulnMatch]:
    """Match inventory entries against the database.

    A binary matches a record when the names agree (case-insensitive,
    hyphen/underscore-insensitive) and its version is ``*`` or satisfies
    the record's constraints. One match per (binary, cve_id).
    """
    products: dict[str, list[CveRecord]] = {}
    for record in db.records:
        products.setdefault(_product_key(record.product), []).append(record)

    matches: list[VulnMatch] = []
    seen: set[tuple[str, str]] = set()
    for entry in inventory.entries:
        for record in products.get(_product_key(entry.name), ()):
            if (entry.name, record.cve_id) in seen:
                continue
            if version_matches(entry.version, record.affected_versions):
                seen.add((entry.name, record.cve_id))
                matches.append(VulnMatch(entry.name, record, entry.version))
    return matches


def emit_vul_facts(matches: Sequence[VulnMatch]) -> list[Clause]:
    """One ``vulExists`` fact per (match, lose type), deterministic order."""
    keyed = []
    for match in matches:
        for lose_type in match.record.lose_types:
            keyed.append((sanitize_name(match.binary), match.record.cve_id,
                          lose_type, match))
    keyed.sort(key=lambda item: item[:3])
    facts = []
    for _, cve_id, lose_type, match in keyed:
        facts.append(
            fact(
                "vulExists",
                constant(cve_id, quoted=True),
                binary_term(match.binary),
                constant(match.record.access_vector, quoted=True),
                constant(lose_type, quoted=True),
                constant(match.record.severity, quoted=True),
            )
        )
    return facts


def detect_oss(
    inventory: BinaryInventory, db: CveDatabase
) -> tuple[frozenset[str], list[Clause]]:
    """Binaries whose name has ever had a CVE, regardless of version.

    Returns the OSS binary names plus one
    ``bugHyp(binary, 'LOCAL', 'Undefined')`` hypothesis fact each.
    """
    product_keys = {_product_key(p) for p in db.products}
    oss = frozenset(
        name for name in inventory.names() if _product_key(name) in product_keys
    )
    facts = [
        fact(
            "bugHyp",
            binary_term(name),
            constant("LOCAL", quoted=True),
            constant("Undefined", quoted=True),
        )
        for name in sorted(oss, key=sanitize_name)
    ]
    return oss, facts


def likelihood(
    binary: str, matches: Sequence[VulnMatch], intel: ExploitIntel
) -> float:
    """Exploitation likelihood as a percentage in [0, 100].

    100 when any matched CVE is in the known-exploited catalog, otherwise
    the highest prediction score times 100 (absent scores count as 0).
    """
    own = [m for m in matches if _product_key(m.binary) == _product_key(binary)]
    if not own:
        return 0.0
    best = 0.0
    for match in own:
        if match.record.cve_id in intel.kev:
            return 100.0
        best = max(best, intel.epss.get(match.record.cve_id, 0.0))
    return best * 100.0


# ---------------------------------------------------------------------------
# Exploit intelligence snapshots
# ---------------------------------------------------------------------------


def load_epss(text: str) -> dict[str, float]:
    """Parse ``cve,epss,percentile`` delimited text (comments allowed)."""
    scores: dict[str, float] = {}
    rows = csv.reader(
        line for line in text.splitlines() if line and not line.startswith("#")
    )
    for i, row in enumerate(rows):
        if not row:
            continue
        if i == 0 and row[0].strip().lower() == "cve":
            continue
        if len(row) < 2:
            raise SchemaError(f"malformed epss row: {row!r}")
        cve_id = row[0].strip()
        try:
            score = float(row[1])
        except ValueError as exc:
            raise SchemaError(f"invalid epss score in row {row!r}") from exc
        if not 0.0 <= score <= 1.0:
            raise SchemaError(f"epss score out of range in row {row!r}")
        scores[cve_id] = score
    return scores


def load_kev(text: str) -> frozenset[str]:
    """Parse the published known-exploited catalog JSON."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping) or "vulnerabilities" not in document:
        raise SchemaError("expected a catalog object with 'vulnerabilities'")
    ids = set()
    for entry in document["vulnerabilities"]:
        cve_id = entry.get("cveID")
        if cve_id:
            ids.add(cve_id)
    return frozenset(ids)


def load_intel(epss_path: str | None, kev_path: str | None) -> ExploitIntel:
    epss: dict[str, float] = {}
    kev: frozenset[str] = frozenset()
    if epss_path:
        with open(epss_path, "r", encoding="utf-8") as handle:
            epss = load_epss(handle.read())
    if kev_path:
        with open(kev_path, "r", encoding="utf-8") as handle:
            kev = load_kev(handle.read())
    return ExploitIntel(kev=kev, epss=epss)


def _http_get(url: str, timeout: float) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as response:
        payload = response.read()
    if payload[:2] == b"\x1f\x8b":
        payload = gzip.decompress(payload)
    return payload


def refresh_intel(
    snapshot: ExploitIntel,
    *,
    epss_url: str | None = None,
    kev_url: str | None = None,
    timeout: float = 30.0,
) -> ExploitIntel:
    """Fetch fresh intelligence; fall back to the snapshot on failure.

    URLs default to the public feeds and may be overridden via the
    FIRMGRAPH_EPSS_URL / FIRMGRAPH_KEV_URL environment variables.
    """
    epss_url = epss_url or os.environ.get("FIRMGRAPH_EPSS_URL", DEFAULT_EPSS_URL)
    kev_url = kev_url or os.environ.get("FIRMGRAPH_KEV_URL", DEFAULT_KEV_URL)
    epss = dict(snapshot.epss)
    kev = snapshot.kev
    try:
        epss = load_epss(_http_get(epss_url, timeout).decode("utf-8"))
    except Exception as exc:  # degrade to the snapshot
        logger.warning("epss refresh failed (%s); using snapshot", exc)
    try:
        kev = load_kev(_http_get(kev_url, timeout).decode("utf-8"))
    except Exception as exc:
        logger.warning("kev refresh failed (%s); using snapshot", exc)
    return ExploitIntel(kev=kev, epss=epss)
