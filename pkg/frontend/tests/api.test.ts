import { describe, expect, it } from 'vitest';

import { ApiClient, AuthError } from '../src/api';
import { MockService, twoItemFixture } from './mockService';

const TOKENS = { 'tok-alice': 'alice' };

describe('ApiClient', () => {
  it('rejects a bad token with AuthError', async () => {
    const service = new MockService(TOKENS, twoItemFixture());
    const client = new ApiClient('', 'wrong-token', service.fetch);
    await expect(client.listItems()).rejects.toBeInstanceOf(AuthError);
  });

  it('fetches items and blinded payloads with the token header', async () => {
    const service = new MockService(TOKENS, twoItemFixture());
    const client = new ApiClient('', 'tok-alice', service.fetch);
    const queue = await client.listItems();
    expect(queue.map((e) => e.hs_id)).toEqual(['h1', 'h2']);
    const item = await client.getItem('h1');
    expect(item.candidates).toHaveLength(2);
    expect(JSON.stringify(item)).not.toContain('gpt2');
  });

  it('walks a paginated queue fetching every item exactly once', async () => {
    const items = Array.from({ length: 200 }, (_, i) => ({
      hsId: `h${i}`,
      hs: `hs ${i}`,
      candidates: [{ cnId: `h${i}:cn0`, text: `cn ${i}` }],
      provenance: { [`h${i}:cn0`]: ['m', 'd'] as [string, string] },
    }));
    const service = new MockService(TOKENS, items);
    service.pageSize = 50;
    const client = new ApiClient('', 'tok-alice', service.fetch);

    const queue = await client.listItems();
    expect(queue).toHaveLength(200);
    expect(new Set(queue.map((e) => e.hs_id)).size).toBe(200);
    const listCalls = service.calls.filter((c) => c.startsWith('GET /items'));
    expect(listCalls).toHaveLength(4);

    // cached: a second call does not refetch
    await client.listItems();
    expect(
      service.calls.filter((c) => c.startsWith('GET /items'))
    ).toHaveLength(4);
  });

  it('reports progress for the annotator', async () => {
    const service = new MockService(TOKENS, twoItemFixture());
    const client = new ApiClient('', 'tok-alice', service.fetch);
    await client.submitAnnotation('h2', {
      cn_id: 'h2:cn0',
      sui: 4,
      spe: 3,
      grm: 5,
      cho: 1,
      best: 0,
    });
    const progress = await client.progress();
    expect(progress.items_done).toBe(1);
    expect(progress.items_total).toBe(2);
  });
});
