/** Deterministic placement of view-model elements.
 *
 * The service ships anchors, lanes, and ordinals but no coordinates; this
 * module turns them into stable pixel positions so visual snapshots never
 * wobble. Free (unanchored, laneless) nodes fall back to a seeded ring, and
 * the renderers add any manual drag offsets on top.
 */
import type { NodeDoc, ViewModelDoc } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export interface Placement {
  nodes: Map<string, Point>;
  anchors: Map<string, Point>;
  laneRows: Map<string, number>;
}

/** Small deterministic hash for seeded jitter. */
export function hashKey(key: string): number {
  let h = 2166136261;
  for (let i = 0; i < key.length; i++) {
    h ^= key.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return (h >>> 0) / 0xffffffff;
}

function ringPosition(index: number, count: number, width: number, height: number): Point {
  const angle = (2 * Math.PI * index) / Math.max(count, 1) - Math.PI / 2;
  const radius = Math.min(width, height) * 0.36;
  return {
    x: width / 2 + radius * Math.cos(angle),
    y: height / 2 + radius * Math.sin(angle),
  };
}

/** Free graph layout: nodes on a ring in list order, jittered by key. */
export function layoutGraph(view: ViewModelDoc, width: number, height: number): Placement {
  const nodes = new Map<string, Point>();
  view.nodes.forEach((node, index) => {
    const base = ringPosition(index, view.nodes.length, width, height);
    nodes.set(node.key, {
      x: base.x + (hashKey(node.key) - 0.5) * 24,
      y: base.y + (hashKey(node.key + "#y") - 0.5) * 24,
    });
  });
  return { nodes, anchors: new Map(), laneRows: new Map() };
}

/** Location view: anchors on a ring, anchored nodes clustered around them. */
export function layoutAnchored(view: ViewModelDoc, width: number, height: number): Placement {
  const anchors = new Map<string, Point>();
  view.anchors.forEach((anchor, index) => {
    anchors.set(anchor.key, ringPosition(index, view.anchors.length, width, height));
  });

  const nodes = new Map<string, Point>();
  const perAnchor = new Map<string, NodeDoc[]>();
  const free: NodeDoc[] = [];
  for (const node of view.nodes) {
    if (node.anchorKey && anchors.has(node.anchorKey)) {
      const bucket = perAnchor.get(node.anchorKey) ?? [];
      bucket.push(node);
      perAnchor.set(node.anchorKey, bucket);
    } else {
      free.push(node);
    }
  }
  for (const [anchorKey, members] of perAnchor) {
    const center = anchors.get(anchorKey)!;
    members.forEach((node, index) => {
      const angle = (2 * Math.PI * index) / members.length + hashKey(node.key) * 0.5;
      nodes.set(node.key, {
        x: center.x + 46 * Math.cos(angle),
        y: center.y + 46 * Math.sin(angle),
      });
    });
  }
  free.forEach((node, index) => {
    nodes.set(node.key, {
      x: 40 + (index % 6) * 52,
      y: height - 36 - Math.floor(index / 6) * 44,
    });
  });
  return { nodes, anchors, laneRows: new Map() };
}

/** Timeline: one row per lane, one column per ordinal. */
export function layoutLanes(
  view: ViewModelDoc,
  width: number,
  height: number,
): Placement & { columnX: (order: number) => number } {
  const laneRows = new Map<string, number>();
  view.lanes.forEach((lane, index) => laneRows.set(lane.key, index));

  const orders = view.nodes
    .map((n) => n.order)
    .filter((o): o is number => o !== null);
  const maxOrder = orders.length ? Math.max(...orders) : 0;
  const left = 56;
  const step = maxOrder > 0 ? (width - left - 32) / maxOrder : 0;
  const columnX = (order: number) => left + order * step;

  const rowY = (row: number) =>
    view.lanes.length > 1
      ? 28 + (row * (height - 56)) / (view.lanes.length - 1)
      : height / 2;

  const nodes = new Map<string, Point>();
  for (const node of view.nodes) {
    const row = node.laneKey !== null ? laneRows.get(node.laneKey) ?? 0 : 0;
    nodes.set(node.key, {
      x: columnX(node.order ?? 0),
      y: rowY(row),
    });
  }
  return { nodes, anchors: new Map(), laneRows, columnX };
}
