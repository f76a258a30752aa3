/** Render model for word-level tracked changes.
 *
 * The service sends Keep/Delete/Insert runs; the review panel shows
 * deletions struck through and insertions highlighted, each with its own
 * accept/reject toggle. `previewText` mirrors the service's resolve
 * semantics so the editor can show the outcome before committing.
 */
import type { RunDoc } from "./types.js";

export type RunDecision = "accept" | "reject" | undefined;

export interface RenderedRun {
  index: number;
  text: string;
  /** visual treatment for the run under the current decisions */
  state: "kept" | "struck" | "inserted" | "dropped" | "restored";
  decidable: boolean;
  decision: RunDecision;
}

export function renderRuns(
  runs: RunDoc[],
  decisions: Map<number, "accept" | "reject">,
): RenderedRun[] {
  return runs.map((run, index) => {
    if (run.op === "keep") {
      return { index, text: run.text, state: "kept", decidable: false, decision: undefined };
    }
    const decision = decisions.get(index);
    if (run.op === "delete") {
      // an accepted deletion disappears; a rejected one is restored as plain text
      const state = decision === "accept" ? "dropped" : decision === "reject" ? "restored" : "struck";
      return { index, text: run.text, state, decidable: true, decision };
    }
    const state = decision === "reject" ? "dropped" : "inserted";
    return { index, text: run.text, state, decidable: true, decision };
  });
}

/** The text the story will have once the given decisions are applied. */
export function previewText(
  runs: RunDoc[],
  decisions: Map<number, "accept" | "reject">,
  fallback: "accept" | "reject" = "accept",
): string {
  const parts: string[] = [];
  runs.forEach((run, index) => {
    const decision = decisions.get(index) ?? fallback;
    if (run.op === "keep") {
      parts.push(run.text);
    } else if (run.op === "delete") {
      if (decision === "reject") parts.push(run.text);
    } else if (decision === "accept") {
      parts.push(run.text);
    }
  });
  return parts.join("");
}

export function allDecisions(
  runs: RunDoc[],
  decision: "accept" | "reject",
): Map<number, "accept" | "reject"> {
  const out = new Map<number, "accept" | "reject">();
  runs.forEach((run, index) => {
    if (run.op !== "keep") out.set(index, decision);
  });
  return out;
}

/** Wire form of a decisions map, as the resolve endpoint expects it. */
export function decisionsPayload(
  decisions: Map<number, "accept" | "reject">,
): Record<number, "accept" | "reject"> {
  const out: Record<number, "accept" | "reject"> = {};
  for (const [index, decision] of decisions) out[index] = decision;
  return out;
}
