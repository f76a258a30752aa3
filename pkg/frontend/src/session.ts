/** Client-side session state.
 *
 * A session tracks which events are selected on the timeline and where the
 * caret sits in the editor. At most one of the two drives the edit scope:
 * selecting events clears the caret scope and vice versa.
 */
import type { ScopeDoc, StoryModelDoc } from "./types.js";

export type Tab = "entities" | "locations";

export interface UiSession {
  projectId: string;
  selectedEventIds: string[];
  caretRange: ScopeDoc | null;
  activeTab: Tab;
  liveJobId: string | null;
}

export function newSession(projectId: string): UiSession {
  return {
    projectId,
    selectedEventIds: [],
    caretRange: null,
    activeTab: "entities",
    liveJobId: null,
  };
}

export function selectEvents(session: UiSession, eventIds: string[]): UiSession {
  return { ...session, selectedEventIds: [...eventIds], caretRange: null };
}

export function clearSelection(session: UiSession): UiSession {
  return { ...session, selectedEventIds: [] };
}

export function setCaret(session: UiSession, range: ScopeDoc): UiSession {
  return { ...session, caretRange: { ...range }, selectedEventIds: [] };
}

export function clearCaret(session: UiSession): UiSession {
  return { ...session, caretRange: null };
}

/** The character scope future edits target, if any.
 *
 * Selected events scope to the union of their sentences; otherwise the
 * caret's own range applies (the service snaps it to whole sentences).
 */
export function editScope(session: UiSession, model: StoryModelDoc): ScopeDoc | null {
  if (session.selectedEventIds.length > 0) {
    const sentenceIndices = new Set<number>();
    for (const event of model.events) {
      if (session.selectedEventIds.includes(event.id)) {
        sentenceIndices.add(event.sentenceIndex);
      }
    }
    const spans = model.sentences.filter((s) => sentenceIndices.has(s.index));
    if (spans.length === 0) return null;
    return {
      start: Math.min(...spans.map((s) => s.charStart)),
      end: Math.max(...spans.map((s) => s.charEnd)),
    };
  }
  return session.caretRange;
}
