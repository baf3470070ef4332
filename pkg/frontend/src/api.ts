import type {
  AttackPath,
  FirmwareUpload,
  GraphDoc,
  RiskRow,
  Snapshot,
  WhatifResult,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

/** Everything the session needs from the server; tests substitute a
 * fixture-backed implementation. */
export interface ApiClient {
  uploadFirmware(body: FirmwareUpload): Promise<Snapshot>;
  getGraph(snapshotId: string): Promise<GraphDoc>;
  getRisk(snapshotId: string): Promise<RiskRow[]>;
  whatif(snapshotId: string, patched: string[]): Promise<WhatifResult>;
  getPaths(snapshotId: string, target: string): Promise<AttackPath[]>;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, (body as { detail?: unknown }).detail ?? body);
    }
    return body as T;
  }

  uploadFirmware(body: FirmwareUpload): Promise<Snapshot> {
    return this.request('/api/firmware', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getGraph(snapshotId: string): Promise<GraphDoc> {
    return this.request(`/api/snapshots/${snapshotId}/graph?format=json`);
  }

  getRisk(snapshotId: string): Promise<RiskRow[]> {
    return this.request(`/api/snapshots/${snapshotId}/risk`);
  }

  whatif(snapshotId: string, patched: string[]): Promise<WhatifResult> {
    return this.request(`/api/snapshots/${snapshotId}/whatif`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ patched }),
    });
  }

  getPaths(snapshotId: string, target: string): Promise<AttackPath[]> {
    const query = new URLSearchParams({ target });
    return this.request(`/api/snapshots/${snapshotId}/paths?${query}`);
  }
}
