/**
 * HTTP client for the planning service. The UI computes no coverage or
 * alignment numbers itself; everything displayed comes from these calls.
 */

import type {
  AlignmentResponse,
  CoverageResponse,
  JobRecord,
  MaskPreviewResponse,
  MountDoc,
  PlannerConfigDoc,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function readError(res: Response): Promise<ApiError> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.detail === 'string') detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(res.status, detail);
}

export class PlannerApi {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, '') + path;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.url(path), init);
    if (!res.ok) throw await readError(res);
    return (await res.json()) as T;
  }

  /** Store the exact text given; the service returns it byte-identically. */
  async putSceneText(sceneId: string, sceneText: string): Promise<void> {
    const res = await this.fetchImpl(this.url(`/scene/${sceneId}`), {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: sceneText,
    });
    if (!res.ok) throw await readError(res);
  }

  /** Raw stored scene text, suitable for byte-identical export. */
  async getSceneText(sceneId: string): Promise<string> {
    const res = await this.fetchImpl(this.url(`/scene/${sceneId}`));
    if (!res.ok) throw await readError(res);
    return res.text();
  }

  coverage(
    sceneId: string,
    cellSize: number,
    signal?: AbortSignal,
  ): Promise<CoverageResponse> {
    return this.json(`/scene/${sceneId}/coverage`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ cell_size: cellSize }),
      signal,
    });
  }

  alignment(
    sceneId: string,
    cellSize: number,
    signal?: AbortSignal,
  ): Promise<AlignmentResponse> {
    return this.json(`/scene/${sceneId}/alignment`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ cell_size: cellSize }),
      signal,
    });
  }

  maskPreview(sceneId: string, width: number, height: number): Promise<MaskPreviewResponse> {
    return this.json(`/scene/${sceneId}/mask-preview`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ width, height }),
    });
  }

  startOptimize(
    sceneId: string,
    mounts: MountDoc[],
    config: PlannerConfigDoc,
  ): Promise<JobRecord> {
    return this.json(`/scene/${sceneId}/optimize`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ mounts, config }),
    });
  }

  job(jobId: string): Promise<JobRecord> {
    return this.json(`/job/${jobId}`);
  }

  /** Poll until the job leaves pending/running; rejects on 'failed'. */
  async pollJob(jobId: string, intervalMs = 250, timeoutMs = 120_000): Promise<JobRecord> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const rec = await this.job(jobId);
      if (rec.status === 'done') return rec;
      if (rec.status === 'failed') {
        throw new ApiError(500, rec.error ?? 'optimize job failed');
      }
      if (Date.now() > deadline) throw new ApiError(408, `job ${jobId} timed out`);
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }
}

/**
 * Latest-wins guard: at most one in-flight request per instance; starting a
 * new one aborts the old, and stale results resolve to null.
 */
export class LatestWins {
  private seq = 0;
  private controller: AbortController | null = null;

  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.seq;
    try {
      const value = await fn(controller.signal);
      return ticket === this.seq ? value : null;
    } catch (err) {
      if (ticket !== this.seq || controller.signal.aborted) return null;
      throw err;
    }
  }
}
