/** Wire types mirroring the annotation service payloads. */

export interface CandidatePayload {
  cn_id: string;
  text: string;
}

export interface ItemPayload {
  hs_id: string;
  hs: string;
  candidates: CandidatePayload[];
}

export interface QueueEntry {
  hs_id: string;
  done: boolean;
}

export interface QueuePage {
  annotator: string;
  items: QueueEntry[];
  /** Present only when the server paginates the queue. */
  next_offset?: number;
}

export interface ComparisonEntry {
  comparison_id: string;
  done: boolean;
}

export interface ComparisonPayload {
  comparison_id: string;
  hs_id: string;
  hs: string;
  first: string;
  second: string;
}

export type Verdict = 'FIRST' | 'SECOND' | 'TIE';

export interface AnnotationBody {
  cn_id: string;
  sui: number;
  spe: number;
  grm: number;
  cho: number;
  best: number;
}

export interface ProgressPayload {
  annotator: string;
  items_done: number;
  items_total: number;
  comparisons_done: number;
  comparisons_total: number;
}
