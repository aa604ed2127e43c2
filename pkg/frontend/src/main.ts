/** Browser entry point: token prompt, queue, and hash-based navigation. */

import { ApiClient, AuthError } from './api';
import { submitItem } from './controller';
import { ItemSession } from './state';
import { renderComparison, renderItem, renderQueue } from './views';

async function openItem(
  client: ApiClient,
  annotator: string,
  container: HTMLElement,
  hsId: string
): Promise<void> {
  const item = await client.getItem(hsId);
  const session = new ItemSession(
    annotator,
    hsId,
    item.candidates.map((c) => c.cn_id),
    window.localStorage
  );
  const handle = renderItem(container, item, session, async () => {
    const outcome = await submitItem(client, item, session);
    if (!outcome.ok) {
      handle.showNotice(
        `The server already has a best CN (${outcome.conflictingCnId}); ` +
          `retract it first.`
      );
    } else {
      await showQueue(client, annotator, container);
    }
  });
}

async function showQueue(
  client: ApiClient,
  annotator: string,
  container: HTMLElement
): Promise<void> {
  const [entries, progress] = await Promise.all([
    client.listItems(true),
    client.progress(),
  ]);
  renderQueue(container, entries, progress, (hsId) => {
    void openItem(client, annotator, container, hsId);
  });
}

async function showComparisons(
  client: ApiClient,
  container: HTMLElement
): Promise<void> {
  const pending = (await client.listComparisons()).filter((c) => !c.done);
  const next = pending[0];
  if (!next) {
    container.textContent = 'All comparisons are done.';
    return;
  }
  const comparison = await client.getComparison(next.comparison_id);
  renderComparison(container, comparison, async (verdict) => {
    await client.submitVerdict(comparison.comparison_id, verdict);
    await showComparisons(client, container);
  });
}

export async function boot(): Promise<void> {
  const container = document.getElementById('app');
  if (!container) {
    throw new Error('missing #app container');
  }
  const token = window.prompt('Annotator token:') ?? '';
  const client = new ApiClient('', token);
  try {
    const progress = await client.progress();
    if (window.location.hash === '#comparisons') {
      await showComparisons(client, container);
    } else {
      await showQueue(client, progress.annotator, container);
    }
  } catch (err) {
    if (err instanceof AuthError) {
      container.textContent = 'Token rejected; reload and re-authenticate.';
      return;
    }
    throw err;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  void boot();
}
