import type { ApiClient } from './api.js';
import type {
  AttackPath,
  FirmwareUpload,
  GraphDoc,
  Metrics,
  RiskRow,
  Snapshot,
} from './types.js';

/** One snapshot plus everything the view renders for it. All numbers
 * come from the server verbatim; the client does no risk math. */
export interface SessionFrame {
  snapshot: Snapshot;
  graph: GraphDoc;
  risk: RiskRow[];
  /** Nodes removed relative to the parent frame (0 for the base). */
  removedNodes: number;
  /** Binary whose toggle created this frame, when applicable. */
  toggledBinary: string | null;
}

/**
 * Analyst session: a lineage of immutable snapshots from the base upload
 * through successive what-if patches. Toggling a patched binary back off
 * pops the lineage without a server call when it was the most recent
 * toggle; otherwise the patch set is re-derived from the base snapshot.
 * At most one mutation is in flight; callers should disable controls
 * while `pending` is true.
 */
export class Session {
  private frames: SessionFrame[] = [];
  private inFlight = false;

  constructor(private readonly api: ApiClient) {}

  get pending(): boolean {
    return this.inFlight;
  }

  get hasSession(): boolean {
    return this.frames.length > 0;
  }

  get current(): SessionFrame {
    if (!this.frames.length) {
      throw new Error('no session; upload a firmware graph first');
    }
    return this.frames[this.frames.length - 1];
  }

  get base(): SessionFrame {
    if (!this.frames.length) {
      throw new Error('no session; upload a firmware graph first');
    }
    return this.frames[0];
  }

  get lineage(): readonly SessionFrame[] {
    return this.frames;
  }

  /** Metrics exactly as the active snapshot's payload reported them. */
  get metrics(): Metrics {
    return this.current.snapshot.metrics;
  }

  /** Rendered node count; equals the payload's node_count. */
  get nodeCount(): number {
    return this.current.graph.nodes.length;
  }

  get patchSet(): string[] {
    return [...this.current.snapshot.patched];
  }

  isPatched(binary: string): boolean {
    return this.current.snapshot.patched.includes(binary);
  }

  /** Binaries the patch toggles should offer: everything vulnerable in
   * the active graph plus anything already patched (so it can be
   * un-patched). */
  togglableBinaries(): string[] {
    const names = new Set<string>(this.current.snapshot.goal_binaries);
    for (const binary of this.current.snapshot.patched) {
      names.add(binary);
    }
    return [...names].sort();
  }

  canToggle(binary: string): boolean {
    return !this.inFlight && this.hasSession
      && this.togglableBinaries().includes(binary);
  }

  private async fetchFrame(
    snapshot: Snapshot,
    removedNodes: number,
    toggledBinary: string | null,
  ): Promise<SessionFrame> {
    const [graph, risk] = await Promise.all([
      this.api.getGraph(snapshot.snapshot_id),
      this.api.getRisk(snapshot.snapshot_id),
    ]);
    return { snapshot, graph, risk, removedNodes, toggledBinary };
  }

  private async mutate<T>(action: () => Promise<T>): Promise<T> {
    if (this.inFlight) {
      throw new Error('another action is still in flight');
    }
    this.inFlight = true;
    try {
      return await action();
    } finally {
      this.inFlight = false;
    }
  }

  upload(body: FirmwareUpload): Promise<SessionFrame> {
    return this.mutate(async () => {
      const snapshot = await this.api.uploadFirmware(body);
      const frame = await this.fetchFrame(snapshot, 0, null);
      this.frames = [frame];
      return frame;
    });
  }

  /** Flip one binary's patch state and re-render from the response. */
  toggle(binary: string): Promise<SessionFrame> {
    if (!this.canToggle(binary)) {
      throw new Error(`cannot toggle ${binary}`);
    }
    if (this.isPatched(binary)) {
      const top = this.current;
      if (top.toggledBinary === binary && this.frames.length > 1) {
        // undo: return to the parent snapshot without a server call
        this.frames.pop();
        return Promise.resolve(this.current);
      }
      const remaining = this.patchSet.filter((name) => name !== binary);
      return this.mutate(async () => {
        const result = await this.api.whatif(
          this.base.snapshot.snapshot_id, remaining,
        );
        const frame = await this.fetchFrame(
          result.snapshot, result.removed_nodes, null,
        );
        this.frames = [this.base, frame];
        return frame;
      });
    }
    return this.mutate(async () => {
      const result = await this.api.whatif(
        this.current.snapshot.snapshot_id, [binary],
      );
      const frame = await this.fetchFrame(
        result.snapshot, result.removed_nodes, binary,
      );
      this.frames.push(frame);
      return frame;
    });
  }

  /** Step back one frame; purely client-side. */
  undo(): SessionFrame {
    if (this.frames.length > 1) {
      this.frames.pop();
    }
    return this.current;
  }

  pathsTo(target: string): Promise<AttackPath[]> {
    return this.api.getPaths(this.current.snapshot.snapshot_id, target);
  }
}
