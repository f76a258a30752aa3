/** Interaction controllers: each view manipulation posts exactly one intent.
 *
 * The controllers are pure with respect to the DOM — views call them with
 * ids they already know — so the service contract can be tested headlessly.
 * No text is ever mutated client-side.
 */
import type { WorkspaceClient } from "./api.js";
import type { UiSession } from "./session.js";
import { editScope } from "./session.js";
import type { EditIntentDoc, ScopeDoc, StoryModelDoc } from "./types.js";

export interface EditStarted {
  jobId: string;
  intent: EditIntentDoc;
  scope: ScopeDoc | null;
}

async function post(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  intent: EditIntentDoc,
): Promise<EditStarted> {
  const scope = editScope(session, model);
  const { jobId } = await client.postEdit(session.projectId, intent, scope ?? undefined);
  return { jobId, intent, scope };
}

/** Releasing an entity over a location bubble moves it there. */
export function dropEntityOnLocation(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  entityId: string,
  fromLocationId: string,
  toLocationId: string,
): Promise<EditStarted> {
  return post(client, session, model, {
    type: "move_entity",
    entityId,
    fromLocation: fromLocationId,
    toLocation: toLocationId,
  });
}

/** A horizontal drag on the timeline reorders the narrated events. */
export function reorderTimelineEvent(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  eventId: string,
  targetPosition: number,
): Promise<EditStarted> {
  const order = reorderedIds(model, eventId, targetPosition);
  return post(client, session, model, { type: "reorder_events", order });
}

/** The full narrated order with one event moved to a new position. */
export function reorderedIds(
  model: StoryModelDoc,
  eventId: string,
  targetPosition: number,
): string[] {
  const order = [...model.events]
    .sort((a, b) => a.narratedIndex - b.narratedIndex)
    .map((e) => e.id);
  const from = order.indexOf(eventId);
  if (from < 0) throw new Error(`unknown event id: ${eventId}`);
  const clamped = Math.max(0, Math.min(order.length - 1, targetPosition));
  order.splice(from, 1);
  order.splice(clamped, 0, eventId);
  return order;
}

/** Dragging an edge from one node to another creates a new labeled action. */
export function connectNodes(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  sourceEntityId: string,
  targetEntityId: string,
  actionName: string,
): Promise<EditStarted> {
  return post(client, session, model, {
    type: "add_action",
    source: sourceEntityId,
    target: targetEntityId,
    name: actionName,
  });
}

export function editActionLabel(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  eventId: string,
  newName: string,
): Promise<EditStarted> {
  return post(client, session, model, { type: "change_action", eventId, newName });
}

/** Delete/backspace on a selected action edge. */
export function removeAction(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  eventId: string,
): Promise<EditStarted> {
  return post(client, session, model, { type: "remove_action", eventId });
}

/** Delete/backspace on a selected entity node. */
export function removeEntity(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  entityId: string,
): Promise<EditStarted> {
  return post(client, session, model, { type: "remove_entity", entityId });
}

/** Double-click on the graph canvas: register a new entity (no prompt runs). */
export function addEntity(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  name: string,
): Promise<EditStarted> {
  return post(client, session, model, { type: "add_entity", name });
}

/** Double-click on the location canvas: register a new location. */
export function addLocation(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  name: string,
): Promise<EditStarted> {
  return post(client, session, model, { type: "add_location", name });
}

/** Moving a trait slider rewrites the story at the new intensity. */
export function setTrait(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
  entityId: string,
  traitName: string,
  newValue: number,
): Promise<EditStarted> {
  return post(client, session, model, {
    type: "set_trait",
    entityId,
    traitName,
    newValue,
  });
}

/** The arrows between the panes: regenerate the story from the visuals. */
export async function rewriteFromVisuals(
  client: WorkspaceClient,
  session: UiSession,
  model: StoryModelDoc,
): Promise<EditStarted> {
  const scope = editScope(session, model);
  const { jobId } = await client.rewriteFromVisuals(session.projectId, scope ?? undefined);
  return { jobId, intent: { type: "rewrite_from_visuals" }, scope };
}
