// Typed client for the contextvis HTTP API.

export interface Unit {
  id: string;
  title: string;
  grade_label: string;
  words: string[];
}

export interface Highlight {
  start: number;
  end: number;
}

export interface ScriptLine {
  word: string;
  sentence: string;
  sticker_prompt: string;
  highlights: Highlight[];
  sticker_id: string | null;
}

export interface MaterialSet {
  id: string;
  unit_id: string;
  theme: string;
  state: 'Generating' | 'Ready' | 'Failed';
  script: { lines: ScriptLine[] };
  created_at: string;
}

export interface VariantSummary {
  id: string;
  theme: string;
  state: string;
  created_at: string;
}

export interface Job {
  id: string;
  kind: 'Script' | 'Sticker' | 'Exploration';
  state: 'Pending' | 'Running' | 'Succeeded' | 'Failed';
  attempts: number;
  error?: string;
  result_ref?: string;
}

export interface Exploration {
  word_a: string;
  word_b: string;
  theme: string;
  chain: string[];
  added_prompts: Record<string, string>;
  stickers: Record<string, string>;
}

export interface ApiError {
  error: string;
  detail: string;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let code = `http_${resp.status}`;
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as ApiError;
        code = body.error ?? code;
        detail = body.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status-derived code
      }
      throw new ApiRequestError(resp.status, code, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getUnits(): Promise<{ units: Unit[] }> {
    return this.request('/units');
  }

  importUnits(document: unknown): Promise<{ ids: string[] }> {
    return this.post('/units/import', document);
  }

  createMaterialSet(unitId: string, theme: string, seed?: number): Promise<{ job_id: string; material_set_id: string }> {
    const body: Record<string, unknown> = { unit_id: unitId, theme };
    if (seed !== undefined) body.seed = seed;
    return this.post('/material-sets', body);
  }

  getMaterialSet(id: string): Promise<MaterialSet> {
    return this.request(`/material-sets/${id}`);
  }

  listVariants(unitId: string): Promise<{ material_sets: VariantSummary[] }> {
    return this.request(`/material-sets?unit_id=${encodeURIComponent(unitId)}`);
  }

  getJob(id: string): Promise<Job> {
    return this.request(`/jobs/${id}`);
  }

  refineSticker(stickerId: string, prompt: string): Promise<{ job_id: string }> {
    return this.post(`/stickers/${stickerId}/refine`, { prompt });
  }

  explore(materialSetId: string, wordA: string, wordB: string, seed?: number): Promise<{ job_id: string }> {
    const body: Record<string, unknown> = { material_set_id: materialSetId, word_a: wordA, word_b: wordB };
    if (seed !== undefined) body.seed = seed;
    return this.post('/explore', body);
  }

  getExploration(id: string): Promise<Exploration> {
    return this.request(`/explorations/${id}`);
  }

  assetUrl(assetId: string): string {
    return `${this.baseUrl}/assets/${assetId}`;
  }

  /** Poll a job until it reaches a terminal state. */
  async waitForJob(jobId: string, options: PollOptions = {}, onUpdate?: (job: Job) => void): Promise<Job> {
    const interval = options.intervalMs ?? 1000;
    const deadline = Date.now() + (options.timeoutMs ?? 120_000);
    for (;;) {
      const job = await this.getJob(jobId);
      onUpdate?.(job);
      if (job.state === 'Succeeded' || job.state === 'Failed') return job;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
