import { describe, expect, it } from 'vitest';

import { ApiClient, ServiceError, resolveBaseUrl } from '../src/api.js';
import { defaultProfile } from '../src/state.js';
import { fetchStub, loadProfiles } from './helpers.js';

const fixture = loadProfiles()[0]!;

// the stub re-serializes through JS JSON, which canonicalizes -0 to 0
const overWire = <T,>(value: T): T => JSON.parse(JSON.stringify(value));

describe('latest-wins request handling', () => {
  it('an older in-flight score resolves null once superseded', async () => {
    const gates: (() => void)[] = [];
    const fetch = fetchStub({
      score: () => ({ status: 200, json: fixture.score_response }),
      beforeRespond: () =>
        new Promise<void>((resolve) => {
          gates.push(resolve);
        }),
    });
    const client = new ApiClient('http://service.test', fetch);
    const first = client.score(defaultProfile());
    const second = client.score({ ...defaultProfile(), bmi: 30 });
    // release responses in order; the first was aborted/superseded
    while (gates.length < 2) await new Promise((r) => setTimeout(r, 1));
    gates.forEach((release) => release());
    const [a, b] = await Promise.all([first, second]);
    expect(a).toBeNull();
    expect(b).toEqual(overWire(fixture.score_response));
  });

  it('sequential requests both resolve', async () => {
    const fetch = fetchStub({
      score: () => ({ status: 200, json: fixture.score_response }),
    });
    const client = new ApiClient('http://service.test', fetch);
    expect(await client.score(defaultProfile())).toEqual(overWire(fixture.score_response));
    expect(await client.score(defaultProfile())).toEqual(overWire(fixture.score_response));
  });
});

describe('error surfacing', () => {
  it('field errors become a ServiceError with messages', async () => {
    const fetch = fetchStub({
      score: () => ({
        status: 422,
        json: { errors: [{ field: 'bmi', message: 'must be > 0' }] },
      }),
    });
    const client = new ApiClient('http://service.test', fetch);
    await expect(client.score(defaultProfile())).rejects.toThrowError(/bmi: must be > 0/);
    await expect(client.score(defaultProfile())).rejects.toBeInstanceOf(ServiceError);
  });
});

describe('resolveBaseUrl', () => {
  it('uses the api query parameter when present', () => {
    expect(
      resolveBaseUrl({ search: '?api=http://api.example:9000/', hostname: 'x' }),
    ).toBe('http://api.example:9000');
  });

  it('defaults to the page host on port 8432', () => {
    expect(resolveBaseUrl({ search: '', hostname: 'myhost' })).toBe('http://myhost:8432');
    expect(resolveBaseUrl({ search: '', hostname: '' })).toBe('http://127.0.0.1:8432');
  });
});
