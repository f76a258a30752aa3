/** Wires the panes to the workspace service.
 *
 * All story state lives server-side; this file only fetches, renders, and
 * posts intents. One mutating request is in flight at a time, and job
 * progress arrives over the job's SSE stream.
 */
import { WorkspaceClient } from "./api.js";
import * as controllers from "./controllers.js";
import { clearCaret, editScope, newSession, selectEvents, setCaret, type UiSession } from "./session.js";
import type { Decisions, StoryModelDoc } from "./types.js";
import { EditorPane } from "./views/editor.js";
import { GraphView } from "./views/graph.js";
import { HistoryWidget } from "./views/historyView.js";
import { LocationsView } from "./views/locations.js";
import { TimelineView } from "./views/timeline.js";

const SERVICE_URL = (window as { STORYLOOM_URL?: string }).STORYLOOM_URL ?? "http://127.0.0.1:8765";

const client = new WorkspaceClient(SERVICE_URL);

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

let session: UiSession;
let model: StoryModelDoc | null = null;

const statusLine = el<HTMLDivElement>("status");
const refreshButton = el<HTMLButtonElement>("refresh");
const rewriteButton = el<HTMLButtonElement>("rewrite");
const tabEntities = el<HTMLButtonElement>("tab-entities");
const tabLocations = el<HTMLButtonElement>("tab-locations");
const graphPane = el<HTMLDivElement>("graph");
const locationsPane = el<HTMLDivElement>("locations");
const timelinePane = el<HTMLDivElement>("timeline");
const traitsPane = el<HTMLDivElement>("traits");

function setStatus(text: string): void {
  statusLine.textContent = text;
}

async function runJob(jobId: string): Promise<void> {
  session.liveJobId = jobId;
  await new Promise<void>((resolve) => {
    const source = new EventSource(client.jobEventsUrl(session.projectId, jobId));
    source.addEventListener("progress", (event) => {
      const data = JSON.parse((event as MessageEvent).data) as {
        completed: number;
        total: number;
      };
      setStatus(`working… ${data.completed}/${data.total}`);
    });
    const finish = () => {
      source.close();
      session.liveJobId = null;
      resolve();
    };
    source.addEventListener("done", finish);
    source.addEventListener("failed", (event) => {
      const data = JSON.parse((event as MessageEvent).data) as { error: string };
      setStatus(`failed: ${data.error}`);
      finish();
    });
    source.onerror = finish;
  });
}

const editor = new EditorPane(el("editor"), {
  onManualEdit: (text) => {
    void (async () => {
      await client.putText(session.projectId, text);
      await refreshAll();
    })();
  },
  onCaret: (range) => {
    session = range ? setCaret(session, range) : clearCaret(session);
    setStatus(range ? "edits scoped to the caret's sentence" : "");
  },
  onHoverSentence: (range) => {
    void hoverRange(range);
  },
  onResolve: (decisions) => {
    void resolvePending(decisions);
  },
});

const graph = new GraphView(graphPane, {
  onConnect: (source, target, name) => startEdit(() =>
    controllers.connectNodes(client, session, model!, source, target, name)),
  onRemoveEntity: (entityId) => startEdit(() =>
    controllers.removeEntity(client, session, model!, entityId)),
  onRemoveAction: (eventId) => startEdit(() =>
    controllers.removeAction(client, session, model!, eventId)),
  onEditAction: (eventId, newName) => startEdit(() =>
    controllers.editActionLabel(client, session, model!, eventId, newName)),
  onAddEntity: (name) => startEdit(() =>
    controllers.addEntity(client, session, model!, name)),
  onSelectEntity: (entityId) => renderTraits(entityId),
  onHoverEvent: (eventId) => {
    void hoverEvent(eventId);
  },
});

const locations = new LocationsView(locationsPane, {
  onMoveEntity: (entityId, fromLocation, toLocation) => startEdit(() =>
    controllers.dropEntityOnLocation(client, session, model!, entityId, fromLocation, toLocation)),
  onAddLocation: (name) => startEdit(() =>
    controllers.addLocation(client, session, model!, name)),
  onHoverEntity: (entityId) => {
    graph.setHighlight(entityId ? new Set([entityId]) : new Set());
  },
});

const timeline = new TimelineView(timelinePane, {
  onSelect: (eventIds) => {
    session = selectEvents(session, eventIds);
    setStatus(eventIds.length ? `${eventIds.length} event(s) selected; edits are scoped` : "");
    void highlightSelection(eventIds);
  },
  onReorder: (eventId, targetPosition) => startEdit(() =>
    controllers.reorderTimelineEvent(client, session, model!, eventId, targetPosition)),
  onHoverEvent: (eventId) => {
    void hoverEvent(eventId);
  },
});

const historyWidget = new HistoryWidget(el("history"), (snapshotId) => {
  void (async () => {
    await client.checkout(session.projectId, snapshotId);
    await refreshAll();
  })();
});

function startEdit(run: () => Promise<controllers.EditStarted>): void {
  void (async () => {
    try {
      const { jobId } = await run();
      await runJob(jobId);
      const { pendingChange } = await client.getChanges(session.projectId);
      if (pendingChange) {
        editor.setPendingRuns(pendingChange.runs);
        setStatus(`review the ${pendingChange.label} changes`);
      } else {
        await refreshAll();
      }
    } catch (error) {
      setStatus(String(error));
    }
  })();
}

async function resolvePending(decisions: Decisions): Promise<void> {
  await client.resolveChanges(session.projectId, decisions);
  editor.setPendingRuns(null);
  await refreshAll();
}

async function hoverEvent(eventId: string | null): Promise<void> {
  if (!eventId) {
    editor.setHighlightedSentences(new Set());
    return;
  }
  const mapping = await client.mapEvent(session.projectId, eventId);
  editor.setHighlightedSentences(new Set([mapping.sentenceIndex]));
}

async function hoverRange(range: { start: number; end: number } | null): Promise<void> {
  if (!range) {
    graph.setHighlight(new Set());
    timeline.setHighlight(new Set());
    locations.setHighlight(new Set());
    return;
  }
  const mapping = await client.mapRange(session.projectId, range.start, range.end);
  graph.setHighlight(new Set([...mapping.entities, ...mapping.events]));
  timeline.setHighlight(new Set(mapping.events));
  locations.setHighlight(new Set([...mapping.entities, ...mapping.locations]));
}

async function highlightSelection(eventIds: string[]): Promise<void> {
  timeline.setSelection(eventIds);
  if (!model) return;
  const involved = new Set<string>();
  for (const event of model.events) {
    if (eventIds.includes(event.id)) {
      involved.add(event.id);
      involved.add(event.source);
      involved.add(event.target);
      if (event.location) involved.add(event.location);
    }
  }
  graph.setHighlight(new Set(involved));
  locations.setHighlight(new Set(involved));
}

function renderTraits(entityId: string | null): void {
  traitsPane.replaceChildren();
  if (!entityId || !model) return;
  const entity = model.entities.find((e) => e.id === entityId);
  if (!entity) return;
  const title = document.createElement("div");
  title.className = "traits-title";
  title.textContent = `${entity.emoji} ${entity.name}`;
  traitsPane.appendChild(title);
  for (const trait of entity.traits) {
    const row = document.createElement("label");
    row.className = "trait-row";
    const name = document.createElement("span");
    name.textContent = `${trait.name} (${trait.value}/10)`;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "1";
    slider.max = "10";
    slider.value = String(trait.value);
    slider.addEventListener("change", () => {
      startEdit(() =>
        controllers.setTrait(
          client, session, model!, entityId, trait.name, Number(slider.value),
        ),
      );
    });
    row.append(name, slider);
    traitsPane.appendChild(row);
  }
}

function setTab(tab: "entities" | "locations"): void {
  session = { ...session, activeTab: tab };
  graphPane.style.display = tab === "entities" ? "" : "none";
  traitsPane.style.display = tab === "entities" ? "" : "none";
  locationsPane.style.display = tab === "locations" ? "" : "none";
  tabEntities.classList.toggle("active", tab === "entities");
  tabLocations.classList.toggle("active", tab === "locations");
}

async function refreshAll(): Promise<void> {
  model = await client.getModel(session.projectId);
  editor.setStory(model.text, model.sentences);
  // a stale model turns the refresh affordance into its alert state
  refreshButton.classList.toggle("alert", model.stale);
  graph.render(await client.getBuiltinView(session.projectId, "entities_actions", true));
  locations.render(await client.getBuiltinView(session.projectId, "locations_entities"));
  timeline.render(await client.getBuiltinView(session.projectId, "timeline"));
  historyWidget.render(await client.getHistory(session.projectId));
  setStatus(model.stale ? "text changed since the last extraction" : "");
}

refreshButton.addEventListener("click", () => {
  void (async () => {
    const scope = model ? editScope(session, model) : null;
    void scope; // refresh always re-extracts; scope applies to edits only
    const { jobId } = await client.refresh(session.projectId, false);
    await runJob(jobId);
    await refreshAll();
  })();
});

rewriteButton.addEventListener("click", () =>
  startEdit(() => controllers.rewriteFromVisuals(client, session, model!)),
);

tabEntities.addEventListener("click", () => setTab("entities"));
tabLocations.addEventListener("click", () => setTab("locations"));

async function boot(): Promise<void> {
  const existing = window.location.hash.slice(1);
  if (existing) {
    session = newSession(existing);
  } else {
    const created = await client.createProject("untitled story", "");
    window.location.hash = created.id;
    session = newSession(created.id);
  }
  setTab("entities");
  await refreshAll();
}

void boot();
