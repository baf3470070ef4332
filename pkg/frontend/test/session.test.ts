import { describe, expect, it } from 'vitest';

import type { ApiClient } from '../src/api.js';
import { Session } from '../src/session.js';
import type {
  AttackPath,
  FirmwareUpload,
  GraphDoc,
  RiskRow,
  Snapshot,
  WhatifResult,
} from '../src/types.js';

import baseSnapshotJson from './fixtures/base_snapshot.json';
import baseGraphJson from './fixtures/base_graph.json';
import baseRiskJson from './fixtures/base_risk.json';
import whatifJson from './fixtures/whatif_bzip2.json';
import childGraphJson from './fixtures/child_graph.json';
import childRiskJson from './fixtures/child_risk.json';
import pathsZipJson from './fixtures/paths_zip.json';
import libraryRefJson from './fixtures/library_whatif_metrics.json';
import uploadRequestJson from './fixtures/upload_request.json';

const baseSnapshot = baseSnapshotJson as unknown as Snapshot;
const baseGraph = baseGraphJson as unknown as GraphDoc;
const baseRisk = baseRiskJson as unknown as RiskRow[];
const whatifResult = whatifJson as unknown as WhatifResult;
const childGraph = childGraphJson as unknown as GraphDoc;
const childRisk = childRiskJson as unknown as RiskRow[];
const pathsZip = pathsZipJson as unknown as AttackPath[];
const uploadRequest = uploadRequestJson as unknown as FirmwareUpload;
const libraryRef = libraryRefJson as {
  base_metrics: Snapshot['metrics'];
  patched_metrics: Snapshot['metrics'];
  base_node_count: number;
  patched_node_count: number;
};

const childSnapshot = whatifResult.snapshot;

/** Serves the recorded payloads and counts server round-trips. */
class FixtureApi implements ApiClient {
  calls: string[] = [];

  async uploadFirmware(_body: FirmwareUpload): Promise<Snapshot> {
    this.calls.push('upload');
    return structuredClone(baseSnapshot);
  }

  async getGraph(snapshotId: string): Promise<GraphDoc> {
    this.calls.push(`graph:${snapshotId}`);
    if (snapshotId === baseSnapshot.snapshot_id) return structuredClone(baseGraph);
    if (snapshotId === childSnapshot.snapshot_id) return structuredClone(childGraph);
    throw new Error(`unknown snapshot ${snapshotId}`);
  }

  async getRisk(snapshotId: string): Promise<RiskRow[]> {
    this.calls.push(`risk:${snapshotId}`);
    if (snapshotId === baseSnapshot.snapshot_id) return structuredClone(baseRisk);
    if (snapshotId === childSnapshot.snapshot_id) return structuredClone(childRisk);
    throw new Error(`unknown snapshot ${snapshotId}`);
  }

  async whatif(snapshotId: string, patched: string[]): Promise<WhatifResult> {
    this.calls.push(`whatif:${snapshotId}:${patched.join('+')}`);
    if (
      snapshotId === baseSnapshot.snapshot_id
      && patched.length === 1
      && patched[0] === 'bzip2'
    ) {
      return structuredClone(whatifResult);
    }
    throw new Error(`unexpected whatif ${snapshotId} ${patched}`);
  }

  async getPaths(snapshotId: string, target: string): Promise<AttackPath[]> {
    this.calls.push(`paths:${snapshotId}:${target}`);
    if (target === 'zip') return structuredClone(pathsZip);
    return [];
  }
}

async function uploadedSession(): Promise<{ session: Session; api: FixtureApi }> {
  const api = new FixtureApi();
  const session = new Session(api);
  await session.upload(uploadRequest);
  return { session, api };
}

describe('what-if session loop', () => {
  it('shows the base payload values after upload', async () => {
    const { session } = await uploadedSession();
    expect(session.metrics).toEqual(baseSnapshot.metrics);
    expect(session.metrics).toEqual({
      attack_points: 0,
      potentially_compromised_oss: 1,
      vulnerable_binaries: 6,
    });
    // rendered node count equals the API payload's count
    expect(session.nodeCount).toBe(baseGraph.nodes.length);
    expect(session.nodeCount).toBe(baseSnapshot.node_count);
    expect(session.current.risk.length).toBe(baseRisk.length);
  });

  it('toggle + untoggle walks the metrics through patch and back', async () => {
    const { session, api } = await uploadedSession();
    const seen = [structuredClone(session.metrics)];

    await session.toggle('bzip2');
    seen.push(structuredClone(session.metrics));
    expect(session.nodeCount).toBe(childGraph.nodes.length);
    expect(session.nodeCount).toBe(childSnapshot.node_count);
    expect(session.current.removedNodes).toBe(whatifResult.removed_nodes);
    expect(session.isPatched('bzip2')).toBe(true);

    const callsBeforeUndo = api.calls.length;
    await session.toggle('bzip2'); // undo: most recent toggle
    seen.push(structuredClone(session.metrics));
    // untoggling the latest patch is client-side only
    expect(api.calls.length).toBe(callsBeforeUndo);

    expect(seen).toEqual([
      baseSnapshot.metrics,
      childSnapshot.metrics,
      baseSnapshot.metrics,
    ]);
    expect(session.nodeCount).toBe(baseGraph.nodes.length);
    expect(session.current.risk).toEqual(baseRisk);
  });

  it('matches the library-level what-if on the same inputs', async () => {
    const { session } = await uploadedSession();
    expect(session.metrics).toEqual(libraryRef.base_metrics);
    expect(session.nodeCount).toBe(libraryRef.base_node_count);
    await session.toggle('bzip2');
    expect(session.metrics).toEqual(libraryRef.patched_metrics);
    expect(session.nodeCount).toBe(libraryRef.patched_node_count);
  });

  it('drops patched binaries from the risk table', async () => {
    const { session } = await uploadedSession();
    const before = new Set(session.current.risk.map((row) => row.binary));
    expect(before.has('bzip2')).toBe(true);
    await session.toggle('bzip2');
    const after = new Set(session.current.risk.map((row) => row.binary));
    expect(after.has('bzip2')).toBe(false);
    expect(after.has('unzip')).toBe(false);
    expect(after.has('zip')).toBe(false);
  });

  it('refuses toggles for binaries outside the graph', async () => {
    const { session } = await uploadedSession();
    expect(session.canToggle('bftpd')).toBe(false);
    expect(() => session.toggle('bftpd')).toThrow(/cannot toggle/);
  });

  it('allows at most one in-flight mutation', async () => {
    const { session } = await uploadedSession();
    const first = session.toggle('bzip2');
    expect(session.pending).toBe(true);
    expect(session.canToggle('dnsmasq')).toBe(false);
    expect(() => session.toggle('dnsmasq')).toThrow(/cannot toggle/);
    await first;
    expect(session.pending).toBe(false);
  });

  it('undo steps back without a server call', async () => {
    const { session, api } = await uploadedSession();
    await session.toggle('bzip2');
    const calls = api.calls.length;
    session.undo();
    expect(api.calls.length).toBe(calls);
    expect(session.metrics).toEqual(baseSnapshot.metrics);
  });

  it('serves attack paths for highlighting', async () => {
    const { session } = await uploadedSession();
    const paths = await session.pathsTo('zip');
    expect(paths).toEqual(pathsZip);
    expect(paths[0].binaries).toEqual(['httpd', 'bzip2', 'unzip', 'zip']);
    expect(paths[0].entry_kind).toBe('hypothesis');
  });

  it('offers patched binaries for untoggling even when absent from the graph', async () => {
    const { session } = await uploadedSession();
    await session.toggle('bzip2');
    expect(session.current.snapshot.goal_binaries).not.toContain('bzip2');
    expect(session.togglableBinaries()).toContain('bzip2');
  });
});
