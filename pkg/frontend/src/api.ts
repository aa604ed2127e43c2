/**
 * Typed client for the annotation service.
 *
 * The fetch implementation is injectable so tests can run against a mocked
 * service. Verdict submission is idempotent on the client side: repeated
 * submissions of the same verdict reuse the first acknowledgment.
 */

import type {
  AnnotationBody,
  ComparisonEntry,
  ComparisonPayload,
  ItemPayload,
  ProgressPayload,
  QueueEntry,
  QueuePage,
  Verdict,
} from './types';

export const TOKEN_HEADER = 'X-Annotator-Token';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class AuthError extends ApiError {
  constructor(message: string) {
    super(401, message);
  }
}

/** Server rejected an is-best submission; another CN already holds it. */
export class ConflictError extends ApiError {
  constructor(public conflictingCnId: string) {
    super(409, `is-best already assigned to ${conflictingCnId}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private queueCache: QueueEntry[] | null = null;
  private verdictAcks = new Map<string, Promise<unknown>>();

  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers = {
      [TOKEN_HEADER]: this.token,
      'Content-Type': 'application/json',
      ...(init.headers ?? {}),
    };
    const response = await this.fetchImpl(this.baseUrl + path, {
      ...init,
      headers,
    });
    if (response.status === 401) {
      throw new AuthError('annotator token rejected');
    }
    if (response.status === 409) {
      const body = (await response.json()) as { conflicting_cn_id: string };
      throw new ConflictError(body.conflicting_cn_id);
    }
    if (!response.ok) {
      throw new ApiError(response.status, `request failed: ${path}`);
    }
    return (await response.json()) as T;
  }

  /**
   * Fetch the assigned queue, following server pagination when present.
   * The result is cached; every item is fetched exactly once per session.
   */
  async listItems(force = false): Promise<QueueEntry[]> {
    if (this.queueCache && !force) {
      return this.queueCache;
    }
    const items: QueueEntry[] = [];
    let offset: number | undefined = 0;
    while (offset !== undefined) {
      const page: QueuePage = await this.request<QueuePage>(
        offset === 0 ? '/items' : `/items?offset=${offset}`
      );
      items.push(...page.items);
      offset = page.next_offset;
    }
    this.queueCache = items;
    return items;
  }

  getItem(hsId: string): Promise<ItemPayload> {
    return this.request<ItemPayload>(`/items/${hsId}`);
  }

  submitAnnotation(hsId: string, body: AnnotationBody): Promise<unknown> {
    return this.request(`/items/${hsId}/annotation`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  async listComparisons(): Promise<ComparisonEntry[]> {
    const page = await this.request<{ comparisons: ComparisonEntry[] }>(
      '/comparisons'
    );
    return page.comparisons;
  }

  getComparison(comparisonId: string): Promise<ComparisonPayload> {
    return this.request<ComparisonPayload>(`/comparisons/${comparisonId}`);
  }

  /**
   * Post a verdict once per (comparison, verdict). A double-click reuses the
   * in-flight or completed acknowledgment instead of posting again.
   */
  submitVerdict(comparisonId: string, verdict: Verdict): Promise<unknown> {
    const key = `${comparisonId}:${verdict}`;
    const pending = this.verdictAcks.get(key);
    if (pending) {
      return pending;
    }
    const ack = this.request(`/comparisons/${comparisonId}/verdict`, {
      method: 'POST',
      body: JSON.stringify({ verdict }),
    }).catch((err) => {
      this.verdictAcks.delete(key); // allow a retry after failure
      throw err;
    });
    this.verdictAcks.set(key, ack);
    return ack;
  }

  progress(): Promise<ProgressPayload> {
    return this.request<ProgressPayload>('/progress');
  }
}
