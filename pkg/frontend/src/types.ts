// API payload shapes, mirroring the service's response models.

export interface Metrics {
  attack_points: number;
  potentially_compromised_oss: number;
  vulnerable_binaries: number;
}

export interface Snapshot {
  snapshot_id: string;
  parent_id: string | null;
  fw_name: string;
  ruleset: string;
  patched: string[];
  metrics: Metrics;
  goal_binaries: string[];
  node_count: number;
}

export type NodeKind = 'LEAF' | 'AND' | 'OR';

export interface GraphNode {
  id: number;
  kind: NodeKind;
  label: string;
}

export interface GraphDoc {
  nodes: GraphNode[];
  edges: [number, number][];
}

export interface WhatifResult {
  snapshot: Snapshot;
  removed_nodes: number;
  metrics_delta: Metrics;
}

export interface RiskRow {
  binary: string;
  occurrences: number;
  interactions: number;
  impact: number;
  cve_count: number;
  likelihood: number;
  risk: number;
}

export interface AttackPath {
  binaries: string[];
  flows: string[][];
  entry_kind: 'external' | 'hypothesis';
}

export interface FirmwareUpload {
  fW_name: string;
  graph: Record<string, unknown>;
  versions?: string;
  extra_facts?: string;
  auto_hypotheses?: boolean;
  ruleset?: string;
}
