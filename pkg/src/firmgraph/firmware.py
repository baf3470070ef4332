"""Firmware topology ingestion and fact emission.

Consumes the two documents an extraction pipeline produces for a firmware
image — the binary data-flow graph (JSON) and the binary/version
inventory (comma-separated text) — validates them, and compiles the
topology into ``dataFlow``/``externalInteraction`` facts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .datalog import Clause, Term, constant, fact
from .errors import FirmgraphError, SchemaError

LINK_TYPES = frozenset(
    {"environment", "socket", "file", "exec", "shared_memory", "border_binary"}
)

# Sentinel peer name marking an Internet-facing (border) binary.
INTERNET_SENTINEL = "INTERNET"

UNKNOWN_VERSION = "*"

_BARE_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


class UnknownLinkTypeError(SchemaError):
    def __init__(self, value: str, path: str) -> None:
        self.value = value
        super().__init__(
            f"unknown link type {value!r}; expected one of "
            f"{', '.join(sorted(LINK_TYPES))}",
            path,
        )


class DuplicateBinaryError(SchemaError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"binary {name!r} appears more than once", "graph")


class SanitationCollisionError(SchemaError):
    def __init__(self, names: Iterable[str], sanitized: str) -> None:
        rendered = ", ".join(sorted(names))
        super().__init__(
            f"binary names {rendered} collide after sanitation "
            f"({sanitized!r})",
            "graph",
        )


class MalformedLineError(FirmgraphError):
    def __init__(self, line_no: int, line: str) -> None:
        self.line_no = line_no
        super().__init__(
            f"malformed version list line {line_no}: {line!r} "
            "(expected 'name, version')"
        )


@dataclass(frozen=True)
class PeerLink:
    target: str
    link_type: str
    info: tuple[str, ...] = ()


@dataclass(frozen=True)
class BinaryEntry:
    peers: tuple[PeerLink, ...] = ()
    versions: tuple[str, ...] = ()


@dataclass
class FirmwareGraph:
    fw_name: str
    binaries: dict[str, BinaryEntry] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def dangling_targets(self) -> list[str]:
        """Peer targets that are not declared binaries (implicit nodes)."""
        declared = set(self.binaries)
        seen: dict[str, None] = {}
        for entry in self.binaries.values():
            for peer in entry.peers:
                if peer.target == INTERNET_SENTINEL:
                    continue
                if peer.target not in declared:
                    seen.setdefault(peer.target, None)
        return list(seen)

    def all_binaries(self) -> list[str]:
        """Declared binaries in document order, then implicit ones."""
        return list(self.binaries) + self.dangling_targets()


@dataclass(frozen=True)
class InventoryEntry:
    name: str
    version: str


@dataclass
class BinaryInventory:
    entries: list[InventoryEntry] = field(default_factory=list)

    def names(self) -> list[str]:
        return list(dict.fromkeys(e.name for e in self.entries))

    def versions_for(self, name: str) -> list[str]:
        return [e.version for e in self.entries if e.name == name]


@dataclass(frozen=True)
class TopologyFacts:
    facts: tuple[Clause, ...] = ()

    @property
    def data_flows(self) -> tuple[Clause, ...]:
        return tuple(f for f in self.facts if f.head.predicate == "dataFlow")

    @property
    def external_interactions(self) -> tuple[Clause, ...]:
        return tuple(
            f for f in self.facts if f.head.predicate == "externalInteraction"
        )


# ---------------------------------------------------------------------------
# Name sanitation
# ---------------------------------------------------------------------------


def sanitize_name(name: str) -> str:
    """Map a binary name into the constant space (``-`` becomes ``_``)."""
    return name.replace("-", "_")


def binary_term(name: str) -> Term:
    """Binary name as a constant term; quoted when the sanitized form does
    not fit the bare-identifier grammar."""
    sanitized = sanitize_name(name)
    return constant(sanitized, quoted=not _BARE_NAME.match(sanitized))


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _pairs_hook(pairs):
    # surface duplicate keys instead of silently keeping the last one
    out: dict = {}
    for key, value in pairs:
        if key in out:
            raise DuplicateBinaryError(key)
        out[key] = value
    return out


def _normalize_info(value, path: str) -> tuple[str, ...]:
    if value is None or value == "":
        return ()
    if isinstance(value, str):
        return (value,)
    if isinstance(value, list):
        items = []
        for i, item in enumerate(value):
            if not isinstance(item, str):
                raise SchemaError("info entries must be strings", f"{path}[{i}]")
            items.append(item)
        return tuple(items)
    raise SchemaError("info must be a string or an array of strings", path)


def _normalize_versions(value, path: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise SchemaError("version must be an array", path)
    out = []
    for i, item in enumerate(value):
        if isinstance(item, (int, float)):
            item = str(item)
        if not isinstance(item, str):
            raise SchemaError("version entries must be strings", f"{path}[{i}]")
        if item:
            out.append(item)
    return tuple(out)


def load_firmware_graph(document: str | Mapping) -> FirmwareGraph:
    """Load and validate a binary data-flow graph document.

    ``document`` may be raw JSON text or an already-parsed mapping. Raises
    :class:`SchemaError` (with a path) on malformed structure,
    :class:`UnknownLinkTypeError` on link types outside the closed set,
    and :class:`DuplicateBinaryError` on repeated binary keys.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document, object_pairs_hook=_pairs_hook)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise SchemaError("document must be a JSON object")

    fw_name = document.get("fW_name")
    if not isinstance(fw_name, str) or not fw_name:
        raise SchemaError("missing or empty firmware name", "fW_name")
    graph = document.get("graph")
    if not isinstance(graph, Mapping):
        raise SchemaError("missing graph object", "graph")

    binaries: dict[str, BinaryEntry] = {}
    for name, entry in graph.items():
        path = f"graph.{name}"
        if not isinstance(entry, Mapping):
            raise SchemaError("binary entry must be an object", path)
        peers_raw = entry.get("peers", [])
        if not isinstance(peers_raw, list):
            raise SchemaError("peers must be an array", f"{path}.peers")
        peers: list[PeerLink] = []
        for i, peer in enumerate(peers_raw):
            peer_path = f"{path}.peers[{i}]"
            if not isinstance(peer, Mapping):
                raise SchemaError("peer must be an object", peer_path)
            target = peer.get("name")
            if not isinstance(target, str) or not target:
                raise SchemaError("missing peer name", f"{peer_path}.name")
            link_type = peer.get("type")
            if not isinstance(link_type, str) or link_type not in LINK_TYPES:
                raise UnknownLinkTypeError(str(link_type), f"{peer_path}.type")
            info = _normalize_info(peer.get("info"), f"{peer_path}.info")
            if link_type == "border_binary" and info:
                raise SchemaError(
                    "border_binary links carry no info", f"{peer_path}.info"
                )
            peers.append(PeerLink(target, link_type, info))
        versions = _normalize_versions(entry.get("version"), f"{path}.version")
        binaries[name] = BinaryEntry(tuple(peers), versions)

    fw = FirmwareGraph(fw_name, binaries)
    for target in fw.dangling_targets():
        fw.warnings.append(
            f"peer target {target!r} is not a declared binary; kept as an "
            "implicit node"
        )
    _check_sanitation_injective(fw)
    return fw


def _check_sanitation_injective(fw: FirmwareGraph) -> None:
    by_sanitized: dict[str, set[str]] = {}
    for name in fw.all_binaries():
        by_sanitized.setdefault(sanitize_name(name), set()).add(name)
    for sanitized, names in by_sanitized.items():
        if len(names) > 1:
            raise SanitationCollisionError(names, sanitized)


def load_version_list(text: str) -> BinaryInventory:
    """Parse ``name, version`` lines; ``*`` marks an unknown version."""
    entries: list[InventoryEntry] = []
    seen: set[tuple[str, str]] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," not in line:
            raise MalformedLineError(line_no, raw)
        name, version = (part.strip() for part in line.split(",", 1))
        if not name or not version:
            raise MalformedLineError(line_no, raw)
        key = (name, version)
        if key in seen:
            continue
        seen.add(key)
        entries.append(InventoryEntry(name, version))
    return BinaryInventory(entries)


def merge_inventory(fw: FirmwareGraph, inv: BinaryInventory) -> BinaryInventory:
    """Union the graph's version arrays with the inventory.

    Binaries known to the graph but absent from both version sources get a
    single ``*`` entry. Entries come out sorted for determinism.
    """
    versions: dict[str, set[str]] = {}
    for name, entry in fw.binaries.items():
        versions.setdefault(name, set()).update(entry.versions)
    for implicit in fw.dangling_targets():
        versions.setdefault(implicit, set())
    for entry in inv.entries:
        versions.setdefault(entry.name, set()).add(entry.version)

    merged: list[InventoryEntry] = []
    for name in sorted(versions):
        observed = versions[name]
        if not observed:
            observed = {UNKNOWN_VERSION}
        for version in sorted(observed):
            merged.append(InventoryEntry(name, version))
    return BinaryInventory(merged)


# ---------------------------------------------------------------------------
# Fact emission
# ---------------------------------------------------------------------------


def emit_topology_facts(fw: FirmwareGraph) -> TopologyFacts:
    """Compile the graph into ground topology facts.

    One ``dataFlow(src, dst, 'type')`` per non-border peer link and one
    ``externalInteraction('Internet', binary, internet)`` per border link.
    Emission order is deterministic: sources sorted by name, peers in
    document order, data flows before external interactions.
    """
    data_flows: list[Clause] = []
    externals: list[Clause] = []
    seen_external: set[str] = set()
    for name in sorted(fw.binaries):
        entry = fw.binaries[name]
        src = binary_term(name)
        for peer in entry.peers:
            if peer.link_type == "border_binary":
                if name not in seen_external:
                    seen_external.add(name)
                    externals.append(
                        fact(
                            "externalInteraction",
                            constant("Internet", quoted=True),
                            src,
                            constant("internet"),
                        )
                    )
                continue
            data_flows.append(
                fact(
                    "dataFlow",
                    src,
                    binary_term(peer.target),
                    constant(peer.link_type, quoted=True),
                )
            )
    return TopologyFacts(tuple(data_flows) + tuple(externals))
