/**
 * Client-side session state: per-CN rating drafts with pluggable storage,
 * and the is-best exclusivity rule enforced before anything reaches the
 * server.
 */

export interface CnDraft {
  sui?: number;
  spe?: number;
  grm?: number;
  cho?: 0 | 1;
  best: 0 | 1;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export function draftComplete(draft: CnDraft): boolean {
  return (
    draft.sui !== undefined &&
    draft.spe !== undefined &&
    draft.grm !== undefined &&
    draft.cho !== undefined
  );
}

export function progressPercent(done: number, total: number): number {
  if (total === 0) {
    return 100;
  }
  return Math.round((100 * done) / total);
}

export type BestResult =
  | { ok: true }
  | { ok: false; conflictingCnId: string };

/** Drafts for one evaluation item, persisted so annotators can pause. */
export class ItemSession {
  private drafts = new Map<string, CnDraft>();

  constructor(
    private annotator: string,
    private hsId: string,
    cnIds: string[],
    private storage: StorageLike
  ) {
    for (const cnId of cnIds) {
      this.drafts.set(cnId, this.restore(cnId));
    }
  }

  private storageKey(cnId: string): string {
    return `cnkit-draft:${this.annotator}:${this.hsId}:${cnId}`;
  }

  private restore(cnId: string): CnDraft {
    const raw = this.storage.getItem(this.storageKey(cnId));
    if (raw) {
      try {
        return JSON.parse(raw) as CnDraft;
      } catch {
        // fall through to a fresh draft
      }
    }
    return { best: 0 };
  }

  private persist(cnId: string): void {
    const draft = this.drafts.get(cnId);
    this.storage.setItem(this.storageKey(cnId), JSON.stringify(draft));
  }

  cnIds(): string[] {
    return [...this.drafts.keys()];
  }

  draft(cnId: string): CnDraft {
    const draft = this.drafts.get(cnId);
    if (!draft) {
      throw new Error(`unknown cn ${cnId}`);
    }
    return draft;
  }

  setRating(cnId: string, field: 'sui' | 'spe' | 'grm', value: number): void {
    this.draft(cnId)[field] = value;
    this.persist(cnId);
  }

  setCho(cnId: string, value: 0 | 1): void {
    this.draft(cnId).cho = value;
    this.persist(cnId);
  }

  bestCn(): string | null {
    for (const [cnId, draft] of this.drafts) {
      if (draft.best === 1) {
        return cnId;
      }
    }
    return null;
  }

  /** Only one CN per item may carry is-best; a second selection is blocked. */
  setBest(cnId: string): BestResult {
    const current = this.bestCn();
    if (current !== null && current !== cnId) {
      return { ok: false, conflictingCnId: current };
    }
    this.draft(cnId).best = 1;
    this.persist(cnId);
    return { ok: true };
  }

  clearBest(cnId: string): void {
    this.draft(cnId).best = 0;
    this.persist(cnId);
  }

  complete(): boolean {
    return [...this.drafts.values()].every(draftComplete);
  }

  clearStored(): void {
    for (const cnId of this.drafts.keys()) {
      this.storage.removeItem(this.storageKey(cnId));
    }
  }
}
