import { describe, expect, it } from "vitest";

import { layoutHistory } from "../src/history.js";
import { hashKey, layoutAnchored, layoutGraph, layoutLanes } from "../src/layout.js";
import type { ViewModelDoc } from "../src/types.js";

function view(partial: Partial<ViewModelDoc>): ViewModelDoc {
  return { nodes: [], edges: [], anchors: [], lanes: [], annotations: {}, ...partial };
}

const timelineView = view({
  lanes: [
    { key: "lane:character:ent-1", refId: "ent-1", label: "Alice" },
    { key: "lane:character:ent-2", refId: "ent-2", label: "Rabbit" },
  ],
  nodes: [
    { key: "a", kind: "time", refId: "evt-1", label: "notices", emoji: "",
      laneKey: "lane:character:ent-1", anchorKey: null, order: 0 },
    { key: "b", kind: "time", refId: "evt-1", label: "notices", emoji: "",
      laneKey: "lane:character:ent-2", anchorKey: null, order: 0 },
    { key: "c", kind: "time", refId: "evt-2", label: "follows", emoji: "",
      laneKey: "lane:character:ent-2", anchorKey: null, order: 1 },
  ],
});

describe("deterministic placement", () => {
  it("identical inputs produce identical positions", () => {
    const first = layoutGraph(timelineView, 400, 300);
    const second = layoutGraph(timelineView, 400, 300);
    expect([...first.nodes.entries()]).toEqual([...second.nodes.entries()]);
    expect(hashKey("stable")).toBe(hashKey("stable"));
  });

  it("lane layout puts replicas on their lane row and ordinal column", () => {
    const placement = layoutLanes(timelineView, 400, 160);
    const a = placement.nodes.get("a")!;
    const b = placement.nodes.get("b")!;
    const c = placement.nodes.get("c")!;
    expect(a.x).toBe(b.x); // same event, same column
    expect(a.y).not.toBe(b.y); // different lanes
    expect(c.x).toBeGreaterThan(a.x); // later ordinal further right
    expect(c.y).toBe(b.y); // same lane row
  });

  it("anchored layout clusters nodes at their anchor", () => {
    const anchored = view({
      anchors: [
        { key: "anchor:location:loc-1", refId: "loc-1", label: "bank", emoji: "🏞️" },
        { key: "anchor:location:loc-2", refId: "loc-2", label: "field", emoji: "🌾" },
      ],
      nodes: [
        { key: "n1", kind: "character", refId: "ent-1", label: "Alice", emoji: "👧",
          laneKey: null, anchorKey: "anchor:location:loc-1", order: null },
        { key: "free", kind: "character", refId: "ent-9", label: "Ghost", emoji: "👻",
          laneKey: null, anchorKey: null, order: null },
      ],
    });
    const placement = layoutAnchored(anchored, 400, 300);
    const anchor = placement.anchors.get("anchor:location:loc-1")!;
    const node = placement.nodes.get("n1")!;
    const distance = Math.hypot(node.x - anchor.x, node.y - anchor.y);
    expect(distance).toBeLessThan(60);
    expect(placement.nodes.has("free")).toBe(true); // unanchored nodes still placed
  });
});

describe("history layout", () => {
  it("branches stack on separate rows, shared prefix on one", () => {
    const layout = layoutHistory({
      snapshots: [
        { id: "snap-1", parentId: null, label: "created", createdAt: 1 },
        { id: "snap-2", parentId: "snap-1", label: "edit", createdAt: 2 },
        { id: "snap-3", parentId: "snap-1", label: "branch", createdAt: 3 },
      ],
      currentId: "snap-3",
    });
    const byId = new Map(layout.map((n) => [n.snapshot.id, n]));
    expect(byId.get("snap-1")!.column).toBe(0);
    expect(byId.get("snap-2")!.column).toBe(1);
    expect(byId.get("snap-3")!.column).toBe(1);
    expect(byId.get("snap-2")!.row).toBe(byId.get("snap-1")!.row);
    expect(byId.get("snap-3")!.row).toBeGreaterThan(byId.get("snap-2")!.row);
    expect(byId.get("snap-3")!.isCurrent).toBe(true);
  });
});
