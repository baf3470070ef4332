"""Request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator


class PeerIn(BaseModel):
    name: str
    type: str
    info: str | list[str] = ""


class GraphEntryIn(BaseModel):
    peers: list[PeerIn] = Field(default_factory=list)
    version: list[str | int | float] = Field(default_factory=list)


class FirmwareUpload(BaseModel):
    fW_name: str
    graph: dict[str, GraphEntryIn]
    versions: str | None = None
    extra_facts: str | None = None
    auto_hypotheses: bool = True
    ruleset: Literal["external", "internal", "combined"] | None = None

    @field_validator("fW_name")
    @classmethod
    def _nonempty_name(cls, value: str) -> str:
        if not value:
            raise ValueError("fW_name must be nonempty")
        return value


class MetricsOut(BaseModel):
    attack_points: int
    potentially_compromised_oss: int
    vulnerable_binaries: int


class SnapshotOut(BaseModel):
    snapshot_id: str
    parent_id: str | None
    fw_name: str
    ruleset: str
    patched: list[str]
    metrics: MetricsOut
    goal_binaries: list[str]
    node_count: int


class WhatifIn(BaseModel):
    patched: list[str] = Field(default_factory=list)


class WhatifOut(BaseModel):
    snapshot: SnapshotOut
    removed_nodes: int
    metrics_delta: MetricsOut


class RiskRowOut(BaseModel):
    binary: str
    occurrences: int
    interactions: int
    impact: float
    cve_count: int
    likelihood: float
    risk: int


class PathOut(BaseModel):
    binaries: list[str]
    flows: list[list[str]]
    entry_kind: Literal["external", "hypothesis"]
