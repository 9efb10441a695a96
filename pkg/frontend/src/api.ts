/** Typed client for the review service HTTP API. */

import type {
  BiasHistoryExport,
  DecisionRequest,
  HogEntry,
  Outcome,
  PendingGate,
  ProjectDocument,
  SimilarityHit,
  SimulationSummary,
  StageTable,
} from './types';

/** Error payload from the service: a stable machine-readable code plus message. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly httpStatus: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'content-type': 'application/json' } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(
        typeof payload.code === 'string' ? payload.code : 'error',
        typeof payload.message === 'string' ? payload.message : resp.statusText,
        resp.status,
      );
    }
    return payload as T;
  }

  listProjects(): Promise<{ projects: string[] }> {
    return this.request('GET', '/projects');
  }

  getProject(id: string): Promise<ProjectDocument> {
    return this.request('GET', `/projects/${encodeURIComponent(id)}`);
  }

  getBiasHistory(id: string): Promise<BiasHistoryExport> {
    return this.request('GET', `/projects/${encodeURIComponent(id)}/bias-history`);
  }

  getSimilar(id: string, k = 10, minScore = 0.3): Promise<{ hits: SimilarityHit[] }> {
    return this.request(
      'GET',
      `/projects/${encodeURIComponent(id)}/similar?k=${k}&min_score=${minScore}`,
    );
  }

  advance(id: string): Promise<Outcome> {
    return this.request('POST', `/projects/${encodeURIComponent(id)}/advance`);
  }

  /** Resolves null when no gate is open (the service answers 404). */
  async getGate(id: string): Promise<PendingGate | null> {
    try {
      return await this.request<PendingGate>('GET', `/projects/${encodeURIComponent(id)}/gate`);
    } catch (err) {
      if (err instanceof ApiError && err.httpStatus === 404) return null;
      throw err;
    }
  }

  decide(id: string, decision: DecisionRequest): Promise<Outcome> {
    return this.request('POST', `/projects/${encodeURIComponent(id)}/gate/decision`, decision);
  }

  getHog(pipeline: string, stage: string): Promise<{ entries: HogEntry[] }> {
    return this.request(
      'GET',
      `/hog?pipeline=${encodeURIComponent(pipeline)}&stage=${encodeURIComponent(stage)}`,
    );
  }

  getStages(): Promise<StageTable> {
    return this.request('GET', '/stages');
  }

  simulateMarketing(
    scenario: 'project1' | 'project2',
    seed?: number,
    interactive = false,
  ): Promise<SimulationSummary> {
    return this.request('POST', '/simulate/marketing', { scenario, seed, interactive });
  }
}
