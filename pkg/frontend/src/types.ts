/** Wire types of the workspace service. Field names mirror the JSON exactly. */

export interface TraitDoc {
  name: string;
  value: number;
}

export interface EntityDoc {
  id: string;
  name: string;
  emoji: string;
  traits: TraitDoc[];
}

export interface LocationDoc {
  id: string;
  name: string;
  emoji: string;
}

export interface SentenceDoc {
  index: number;
  charStart: number;
  charEnd: number;
  textHash: string;
}

export interface EventDoc {
  id: string;
  name: string;
  source: string;
  target: string;
  location: string | null;
  sentenceIndex: number;
  ordinalInSentence: number;
  narratedIndex: number;
}

export interface StoryModelDoc {
  text: string;
  sentences: SentenceDoc[];
  entities: EntityDoc[];
  locations: LocationDoc[];
  events: EventDoc[];
  stale: boolean;
}

export interface NodeDoc {
  key: string;
  kind: string;
  refId: string;
  label: string;
  emoji: string;
  laneKey: string | null;
  anchorKey: string | null;
  order: number | null;
}

export interface EdgeMemberDoc {
  label: string;
  eventId: string | null;
  srcKey: string;
  dstKey: string;
}

export interface EdgeDoc {
  key: string;
  srcKey: string;
  dstKey: string;
  label: string;
  eventId: string | null;
  count: number;
  members: EdgeMemberDoc[];
}

export interface AnchorDoc {
  key: string;
  refId: string;
  label: string;
  emoji: string;
}

export interface LaneDoc {
  key: string;
  refId: string;
  label: string;
}

export interface ViewModelDoc {
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  anchors: AnchorDoc[];
  lanes: LaneDoc[];
  annotations: Record<string, { kind: string; refId: string; label: string }[]>;
}

export type RunOp = "keep" | "delete" | "insert";

export interface RunDoc {
  op: RunOp;
  text: string;
}

export interface PendingChangeDoc {
  runs: RunDoc[];
  label: string;
  recommendedRefresh: string;
}

export type EditIntentDoc =
  | { type: "reorder_events"; order: string[] }
  | { type: "add_action"; source: string; target: string; name: string }
  | { type: "change_action"; eventId: string; newName: string }
  | { type: "remove_action"; eventId: string }
  | { type: "add_entity"; name: string }
  | { type: "remove_entity"; entityId: string }
  | { type: "add_location"; name: string }
  | { type: "move_entity"; entityId: string; fromLocation: string; toLocation: string }
  | { type: "set_trait"; entityId: string; traitName: string; newValue: number }
  | { type: "rewrite_from_visuals" };

export interface ScopeDoc {
  start: number;
  end: number;
}

export interface JobDoc {
  id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  progress: { completed: number; total: number };
  result: Record<string, unknown> | null;
  error: string | null;
}

export interface SnapshotDoc {
  id: string;
  parentId: string | null;
  label: string;
  createdAt: number;
}

export interface HistoryDoc {
  snapshots: SnapshotDoc[];
  currentId: string | null;
}

export type Decisions = "accept_all" | "reject_all" | Record<number, "accept" | "reject">;

export interface EventMappingDoc {
  sentenceIndex: number;
  charStart: number;
  charEnd: number;
}

export interface RangeMappingDoc {
  events: string[];
  entities: string[];
  locations: string[];
  sentences: number[];
}
