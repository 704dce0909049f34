/** Label assignment bookkeeping and response submission. */

import type { GatewayClient } from "./api.js";
import type { PanelView } from "./panels.js";
import type { ResponseBody } from "./types.js";

export interface Assignment {
  category?: string;
  freeText?: string;
}

export type AssignmentMap = Record<string, Assignment>;

/** Items still lacking a category (free text alone does not complete an item). */
export function missingAssignments(view: PanelView, assignments: AssignmentMap): string[] {
  return view.items
    .filter((item) => !assignments[item.uuid]?.category)
    .map((item) => item.uuid);
}

export function buildResponseBody(view: PanelView, assignments: AssignmentMap): ResponseBody {
  if (view.requestId === null) {
    throw new Error("panel has no active request");
  }
  const labels = view.items.map((item) => {
    const assigned = assignments[item.uuid];
    if (!assigned?.category) {
      throw new Error(`no category assigned for ${item.uuid}`);
    }
    return {
      uuid: item.uuid,
      category: assigned.category,
      ...(assigned.freeText ? { freeText: assigned.freeText } : {}),
    };
  });
  return { requestId: view.requestId, outputs: { labels } };
}

export type SubmitOutcome =
  | { kind: "accepted" }
  | { kind: "incomplete"; missing: string[] }
  | { kind: "conflict" } // 409: already answered elsewhere
  | { kind: "validation"; detail: string } // 422: field errors, input kept
  | { kind: "unknownRequest" } // 404
  | { kind: "transportError"; status: number };

export function classifyStatus(status: number, body: unknown): SubmitOutcome {
  if (status === 200) return { kind: "accepted" };
  if (status === 409) return { kind: "conflict" };
  if (status === 404) return { kind: "unknownRequest" };
  if (status === 422) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : "response rejected";
    return { kind: "validation", detail };
  }
  return { kind: "transportError", status };
}

/**
 * Validate completeness locally, then POST. Server-side rejections never
 * clear the annotator's in-progress assignments; callers re-render from
 * the same map.
 */
export async function submitLabels(
  client: GatewayClient,
  sessionId: string,
  view: PanelView,
  assignments: AssignmentMap,
): Promise<SubmitOutcome> {
  const missing = missingAssignments(view, assignments);
  if (missing.length > 0) {
    return { kind: "incomplete", missing };
  }
  const result = await client.respond(sessionId, buildResponseBody(view, assignments));
  return classifyStatus(result.status, result.body);
}
