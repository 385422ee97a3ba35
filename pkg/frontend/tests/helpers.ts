import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { ModelMetadata, RiskBreakdown, WhatIfResponse, SubjectProfile } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));

export interface ProfileFixture {
  name: string;
  request: SubjectProfile;
  score_response: RiskBreakdown;
  whatif: {
    modifications: Partial<SubjectProfile>;
    response: WhatIfResponse;
  };
}

export function loadProfiles(): ProfileFixture[] {
  return JSON.parse(readFileSync(join(here, 'fixtures', 'profiles.json'), 'utf-8'));
}

export function loadModelMetadata(): ModelMetadata {
  return JSON.parse(readFileSync(join(here, 'fixtures', 'model.json'), 'utf-8'));
}

/** Minimal DOM skeleton matching index.html's element ids. */
export function appSkeleton(): string {
  return `
    <p id="status"></p>
    <form id="profile-form"></form>
    <div id="gauge"></div>
    <strong id="risk-value"></strong>
    <p id="risk-lp"></p>
    <div id="chart"></div>
    <p id="chart-sum"></p>
    <div id="whatif-controls"></div>
    <p id="whatif-note"></p>
    <strong id="whatif-before"></strong>
    <strong id="whatif-after"></strong>
    <span id="whatif-delta"></span>
    <button id="whatif-reset"></button>
    <p id="disclaimer"></p>
  `;
}

type Handler = (url: string, body: unknown) => { status: number; json: unknown };

/** fetch stub routing /v1/* calls to handlers. */
export function fetchStub(handlers: {
  model?: () => unknown;
  score?: Handler;
  whatif?: Handler;
  beforeRespond?: () => Promise<void>;
}): typeof fetch {
  return (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    if (handlers.beforeRespond) await handlers.beforeRespond();
    const respond = (status: number, payload: unknown) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { 'content-type': 'application/json' },
      });
    if (url.endsWith('/v1/model')) {
      return respond(200, handlers.model ? handlers.model() : loadModelMetadata());
    }
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    if (url.endsWith('/v1/score') && handlers.score) {
      const { status, json } = handlers.score(url, body);
      return respond(status, json);
    }
    if (url.endsWith('/v1/whatif') && handlers.whatif) {
      const { status, json } = handlers.whatif(url, body);
      return respond(status, json);
    }
    throw new Error(`unhandled request: ${url}`);
  }) as typeof fetch;
}
