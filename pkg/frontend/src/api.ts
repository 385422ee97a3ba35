/** Scoring-service client with latest-wins request handling.
 *
 * Every displayed number originates from these responses; the UI never
 * computes risk locally.  Rapid edits supersede in-flight requests: older
 * responses resolve to null and are dropped by the caller.
 */

import type {
  Modifications,
  ModelMetadata,
  RiskBreakdown,
  SubjectProfile,
  WhatIfResponse,
} from './types.js';

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly errors: { field: string; message: string }[],
  ) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join('; ') || `HTTP ${status}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  private sequence = { score: 0, whatif: 0 };
  private controllers: { score?: AbortController; whatif?: AbortController } = {};

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async model(): Promise<ModelMetadata> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/model`);
    if (!response.ok) throw new ServiceError(response.status, []);
    return (await response.json()) as ModelMetadata;
  }

  /** Resolves null when a newer score request was issued meanwhile. */
  async score(profile: SubjectProfile): Promise<RiskBreakdown | null> {
    return this.latestWins('score', `${this.baseUrl}/v1/score`, profile) as Promise<
      RiskBreakdown | null
    >;
  }

  /** Resolves null when a newer what-if request was issued meanwhile. */
  async whatif(
    base: SubjectProfile,
    modifications: Modifications,
  ): Promise<WhatIfResponse | null> {
    return this.latestWins('whatif', `${this.baseUrl}/v1/whatif`, {
      base,
      modifications,
    }) as Promise<WhatIfResponse | null>;
  }

  private async latestWins(
    kind: 'score' | 'whatif',
    url: string,
    body: unknown,
  ): Promise<unknown | null> {
    const ticket = ++this.sequence[kind];
    this.controllers[kind]?.abort();
    const controller = new AbortController();
    this.controllers[kind] = controller;
    let response: Response;
    try {
      response = await this.fetchImpl(url, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } catch (error) {
      if (controller.signal.aborted) return null;
      throw error;
    }
    if (ticket !== this.sequence[kind]) return null; // superseded
    if (!response.ok) {
      const payload = (await response.json().catch(() => ({ errors: [] }))) as {
        errors?: { field: string; message: string }[];
      };
      throw new ServiceError(response.status, payload.errors ?? []);
    }
    return response.json();
  }
}

/** Service origin: ?api=... query override, else same host on port 8432. */
export function resolveBaseUrl(location: Pick<Location, 'search' | 'hostname'>): string {
  const override = new URLSearchParams(location.search).get('api');
  if (override) return override.replace(/\/$/, '');
  return `http://${location.hostname || '127.0.0.1'}:8432`;
}
