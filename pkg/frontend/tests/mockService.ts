/**
 * In-memory stand-in for the annotation service, wired as a fetch
 * implementation. Mirrors the server semantics the client depends on:
 * token auth, blinded payloads, the append-only store with is-best
 * exclusivity, and verdict persistence.
 */

import type { AnnotationBody, Verdict } from '../src/types';

export interface MockItem {
  hsId: string;
  hs: string;
  candidates: Array<{ cnId: string; text: string }>;
  /** Server-side only; must never appear in any payload. */
  provenance: Record<string, [string, string]>;
}

export interface MockComparison {
  comparisonId: string;
  hs: string;
  first: string;
  second: string;
  apeFirst: boolean;
}

interface StoredAnnotation extends AnnotationBody {
  annotator: string;
  hsId: string;
}

interface StoredVerdict {
  annotator: string;
  comparisonId: string;
  verdict: Verdict;
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export class MockService {
  annotationLog: StoredAnnotation[] = [];
  verdictLog: StoredVerdict[] = [];
  calls: string[] = [];
  pageSize: number | null = null;

  constructor(
    private tokens: Record<string, string>,
    private items: MockItem[],
    private comparisons: MockComparison[] = []
  ) {}

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const headers = (init?.headers ?? {}) as Record<string, string>;
    const token = headers['X-Annotator-Token'];
    this.calls.push(`${method} ${url}`);

    const annotator = token ? this.tokens[token] : undefined;
    if (!annotator) {
      return json(401, { detail: 'unknown annotator token' });
    }

    const [path, query] = url.split('?');
    const parts = (path ?? '').split('/').filter(Boolean);

    if (method === 'GET' && parts[0] === 'items' && parts.length === 1) {
      return this.listItems(annotator, query);
    }
    if (parts[0] === 'items' && parts.length === 2 && method === 'GET') {
      return this.getItem(parts[1]!);
    }
    if (parts[0] === 'items' && parts[2] === 'annotation' && method === 'POST') {
      const body = JSON.parse(String(init?.body)) as AnnotationBody;
      return this.postAnnotation(annotator, parts[1]!, body);
    }
    if (method === 'GET' && parts[0] === 'comparisons' && parts.length === 1) {
      const done = new Set(
        this.currentVerdicts()
          .filter((v) => v.annotator === annotator)
          .map((v) => v.comparisonId)
      );
      return json(200, {
        comparisons: this.comparisons.map((c) => ({
          comparison_id: c.comparisonId,
          done: done.has(c.comparisonId),
        })),
      });
    }
    if (parts[0] === 'comparisons' && parts.length === 2 && method === 'GET') {
      const cmp = this.comparisons.find((c) => c.comparisonId === parts[1]);
      if (!cmp) {
        return json(404, { detail: 'no such comparison' });
      }
      return json(200, {
        comparison_id: cmp.comparisonId,
        hs_id: cmp.comparisonId,
        hs: cmp.hs,
        first: cmp.first,
        second: cmp.second,
      });
    }
    if (parts[0] === 'comparisons' && parts[2] === 'verdict' && method === 'POST') {
      const cmp = this.comparisons.find((c) => c.comparisonId === parts[1]);
      if (!cmp) {
        return json(404, { detail: 'no such comparison' });
      }
      const body = JSON.parse(String(init?.body)) as { verdict: Verdict };
      if (!['FIRST', 'SECOND', 'TIE'].includes(body.verdict)) {
        return json(422, { detail: 'bad verdict' });
      }
      this.verdictLog.push({
        annotator,
        comparisonId: cmp.comparisonId,
        verdict: body.verdict,
      });
      return json(200, { status: 'ok', comparison_id: cmp.comparisonId });
    }
    if (method === 'GET' && parts[0] === 'progress') {
      return this.getProgress(annotator);
    }
    return json(404, { detail: `no route for ${method} ${url}` });
  };

  private listItems(annotator: string, query?: string): Response {
    const done = this.doneCnIds(annotator);
    const entries = this.items.map((item) => ({
      hs_id: item.hsId,
      done: item.candidates.every((c) => done.has(c.cnId)),
    }));
    if (this.pageSize === null) {
      return json(200, { annotator, items: entries });
    }
    const offset = Number(new URLSearchParams(query).get('offset') ?? '0');
    const page = entries.slice(offset, offset + this.pageSize);
    const next = offset + this.pageSize;
    return json(200, {
      annotator,
      items: page,
      ...(next < entries.length ? { next_offset: next } : {}),
    });
  }

  private getItem(hsId: string): Response {
    const item = this.items.find((i) => i.hsId === hsId);
    if (!item) {
      return json(404, { detail: 'no such item' });
    }
    return json(200, {
      hs_id: item.hsId,
      hs: item.hs,
      candidates: item.candidates.map((c) => ({ cn_id: c.cnId, text: c.text })),
    });
  }

  private postAnnotation(
    annotator: string,
    hsId: string,
    body: AnnotationBody
  ): Response {
    const item = this.items.find((i) => i.hsId === hsId);
    if (!item) {
      return json(404, { detail: 'no such item' });
    }
    if (!item.candidates.some((c) => c.cnId === body.cn_id)) {
      return json(422, { detail: `cn ${body.cn_id} not in item ${hsId}` });
    }
    if (body.best === 1) {
      const current = this.currentAnnotations().find(
        (a) =>
          a.annotator === annotator &&
          a.hsId === hsId &&
          a.cn_id !== body.cn_id &&
          a.best === 1
      );
      if (current) {
        return json(409, {
          error: 'is-best-conflict',
          conflicting_cn_id: current.cn_id,
        });
      }
    }
    this.annotationLog.push({ ...body, annotator, hsId });
    return json(200, { status: 'ok', cn_id: body.cn_id });
  }

  private getProgress(annotator: string): Response {
    const done = this.doneCnIds(annotator);
    const itemsDone = this.items.filter((item) =>
      item.candidates.every((c) => done.has(c.cnId))
    ).length;
    const cmpDone = new Set(
      this.currentVerdicts()
        .filter((v) => v.annotator === annotator)
        .map((v) => v.comparisonId)
    ).size;
    return json(200, {
      annotator,
      items_done: itemsDone,
      items_total: this.items.length,
      comparisons_done: cmpDone,
      comparisons_total: this.comparisons.length,
    });
  }

  /** Last record per (annotator, cn) wins, like the real store view. */
  currentAnnotations(): StoredAnnotation[] {
    const view = new Map<string, StoredAnnotation>();
    for (const record of this.annotationLog) {
      view.set(`${record.annotator}:${record.cn_id}`, record);
    }
    return [...view.values()];
  }

  currentVerdicts(): StoredVerdict[] {
    const view = new Map<string, StoredVerdict>();
    for (const record of this.verdictLog) {
      view.set(`${record.annotator}:${record.comparisonId}`, record);
    }
    return [...view.values()];
  }

  private doneCnIds(annotator: string): Set<string> {
    return new Set(
      this.currentAnnotations()
        .filter((a) => a.annotator === annotator)
        .map((a) => a.cn_id)
    );
  }

  /** De-randomized preference counts, mirroring the server-side tally. */
  preferenceCounts(): { ape: number; original: number; tie: number } {
    const counts = { ape: 0, original: 0, tie: 0 };
    for (const verdict of this.currentVerdicts()) {
      const cmp = this.comparisons.find(
        (c) => c.comparisonId === verdict.comparisonId
      )!;
      if (verdict.verdict === 'TIE') {
        counts.tie += 1;
      } else if ((verdict.verdict === 'FIRST') === cmp.apeFirst) {
        counts.ape += 1;
      } else {
        counts.original += 1;
      }
    }
    return counts;
  }
}

export function twoItemFixture(): MockItem[] {
  return [
    {
      hsId: 'h1',
      hs: 'hate speech one',
      candidates: [
        { cnId: 'h1:cn0', text: 'counter narrative alpha' },
        { cnId: 'h1:cn1', text: 'counter narrative beta' },
      ],
      provenance: {
        'h1:cn0': ['gpt2-medium', 'topk'],
        'h1:cn1': ['dialogpt', 'bs'],
      },
    },
    {
      hsId: 'h2',
      hs: 'hate speech two',
      candidates: [{ cnId: 'h2:cn0', text: 'counter narrative gamma' }],
      provenance: { 'h2:cn0': ['gpt2-medium', 'topp'] },
    },
  ];
}
