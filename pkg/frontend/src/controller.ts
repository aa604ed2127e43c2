/**
 * Glue between the API client, session state, and the views: submission
 * flows with inline conflict handling and draft retention.
 */

import { ApiClient, ConflictError } from './api';
import { ItemSession } from './state';
import type { AnnotationBody, ItemPayload } from './types';

export interface SubmitOutcome {
  ok: boolean;
  conflictingCnId?: string;
}

export function annotationBodies(
  item: ItemPayload,
  session: ItemSession
): AnnotationBody[] {
  return item.candidates.map((candidate) => {
    const draft = session.draft(candidate.cn_id);
    if (
      draft.sui === undefined ||
      draft.spe === undefined ||
      draft.grm === undefined ||
      draft.cho === undefined
    ) {
      throw new Error(`incomplete draft for ${candidate.cn_id}`);
    }
    return {
      cn_id: candidate.cn_id,
      sui: draft.sui,
      spe: draft.spe,
      grm: draft.grm,
      cho: draft.cho,
      best: draft.best,
    };
  });
}

/**
 * Submit one AnnotationRecord per CN. On an is-best conflict the server
 * state wins: the outcome carries the conflicting cn so the view can show
 * it inline; local drafts stay untouched for the other CNs.
 */
export async function submitItem(
  client: ApiClient,
  item: ItemPayload,
  session: ItemSession
): Promise<SubmitOutcome> {
  for (const body of annotationBodies(item, session)) {
    try {
      await client.submitAnnotation(item.hs_id, body);
    } catch (err) {
      if (err instanceof ConflictError) {
        await client.listItems(true); // reload queue state from the server
        return { ok: false, conflictingCnId: err.conflictingCnId };
      }
      throw err;
    }
  }
  session.clearStored();
  return { ok: true };
}
