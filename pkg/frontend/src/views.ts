/**
 * DOM views for the annotation workbench. Everything rendered comes from
 * annotator payloads only; provenance never reaches this layer.
 */

import type {
  ComparisonPayload,
  ItemPayload,
  ProgressPayload,
  QueueEntry,
  Verdict,
} from './types';
import { ItemSession, progressPercent } from './state';

const LIKERT_FIELDS = ['sui', 'spe', 'grm'] as const;
const LIKERT_LABELS: Record<string, string> = {
  sui: 'Suitableness',
  spe: 'Specificity',
  grm: 'Grammaticality',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderCompletion(container: HTMLElement): void {
  container.replaceChildren(
    el('div', 'completion', 'All assigned items are annotated. Thank you.')
  );
}

export function renderQueue(
  container: HTMLElement,
  entries: QueueEntry[],
  progress: ProgressPayload,
  onOpen: (hsId: string) => void
): void {
  if (entries.length === 0) {
    renderCompletion(container);
    return;
  }
  const pct = progressPercent(progress.items_done, progress.items_total);
  const header = el('div', 'progress', `Progress: ${pct}%`);
  const list = el('ul', 'queue');
  for (const entry of entries) {
    const row = el('li', entry.done ? 'queue-item done' : 'queue-item');
    const button = el('button', 'open', entry.hs_id);
    button.addEventListener('click', () => onOpen(entry.hs_id));
    row.append(button, el('span', 'state', entry.done ? 'done' : 'open'));
    list.append(row);
  }
  container.replaceChildren(header, list);
}

export interface ItemViewHandle {
  submitButton: HTMLButtonElement;
  notice: HTMLElement;
  showNotice(message: string): void;
  refresh(): void;
}

export function renderItem(
  container: HTMLElement,
  item: ItemPayload,
  session: ItemSession,
  onSubmit: () => void
): ItemViewHandle {
  const root = el('div', 'item');
  root.append(el('h2', 'hs', item.hs));
  const notice = el('div', 'notice');

  const bestButtons = new Map<string, HTMLButtonElement>();
  const submitButton = el('button', 'submit', 'Submit ratings');

  const refresh = () => {
    submitButton.disabled = !session.complete();
    for (const [cnId, button] of bestButtons) {
      const selected = session.draft(cnId).best === 1;
      button.classList.toggle('selected', selected);
      button.textContent = selected ? 'Best (selected)' : 'Mark best';
    }
  };

  for (const candidate of item.candidates) {
    const card = el('div', 'candidate');
    card.append(el('p', 'cn-text', candidate.text));

    for (const field of LIKERT_FIELDS) {
      const label = el('label', 'likert', `${LIKERT_LABELS[field]}: `);
      const select = el('select');
      select.append(el('option', undefined, '-'));
      for (let value = 1; value <= 5; value += 1) {
        select.append(el('option', undefined, String(value)));
      }
      const saved = session.draft(candidate.cn_id)[field];
      if (saved !== undefined) {
        select.selectedIndex = saved;
      }
      select.addEventListener('change', () => {
        if (select.selectedIndex > 0) {
          session.setRating(candidate.cn_id, field, select.selectedIndex);
        }
        refresh();
      });
      label.append(select);
      card.append(label);
    }

    const choLabel = el('label', 'cho', 'Would use after editing: ');
    const cho = el('input');
    cho.type = 'checkbox';
    cho.checked = session.draft(candidate.cn_id).cho === 1;
    const choSaved = session.draft(candidate.cn_id).cho !== undefined;
    cho.addEventListener('change', () => {
      session.setCho(candidate.cn_id, cho.checked ? 1 : 0);
      refresh();
    });
    if (!choSaved) {
      // the checkbox starts unset; treat first interaction as the answer,
      // and an untouched control as 0 once any rating is given
      session.setCho(candidate.cn_id, 0);
    }
    choLabel.append(cho);
    card.append(choLabel);

    const best = el('button', 'best');
    best.addEventListener('click', () => {
      if (session.draft(candidate.cn_id).best === 1) {
        session.clearBest(candidate.cn_id);
        notice.textContent = '';
      } else {
        const result = session.setBest(candidate.cn_id);
        if (!result.ok) {
          notice.textContent =
            `Only one CN can be best for this hate speech; ` +
            `unselect the current best first.`;
        } else {
          notice.textContent = '';
        }
      }
      refresh();
    });
    bestButtons.set(candidate.cn_id, best);
    card.append(best);
    root.append(card);
  }

  submitButton.addEventListener('click', onSubmit);
  root.append(notice, submitButton);
  container.replaceChildren(root);
  refresh();

  return {
    submitButton,
    notice,
    showNotice: (message: string) => {
      notice.textContent = message;
    },
    refresh,
  };
}

export function renderComparison(
  container: HTMLElement,
  comparison: ComparisonPayload,
  onVerdict: (verdict: Verdict) => void
): void {
  const root = el('div', 'comparison');
  root.append(el('h2', 'hs', comparison.hs));
  const a = el('div', 'option');
  a.append(el('h3', undefined, 'A'), el('p', undefined, comparison.first));
  const b = el('div', 'option');
  b.append(el('h3', undefined, 'B'), el('p', undefined, comparison.second));
  root.append(a, b);

  const verdicts: Array<[string, Verdict]> = [
    ['Prefer A', 'FIRST'],
    ['Prefer B', 'SECOND'],
    ['Tie', 'TIE'],
  ];
  for (const [label, verdict] of verdicts) {
    const button = el('button', 'verdict', label);
    button.addEventListener('click', () => onVerdict(verdict));
    root.append(button);
  }
  container.replaceChildren(root);
}
