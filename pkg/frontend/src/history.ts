/** Row/column layout of the branching history tree.
 *
 * Depth-first placement: a snapshot's column is its depth, its row is
 * assigned in visit order so sibling branches stack below one another.
 */
import type { HistoryDoc, SnapshotDoc } from "./types.js";

export interface HistoryNodeLayout {
  snapshot: SnapshotDoc;
  row: number;
  column: number;
  isCurrent: boolean;
}

export function layoutHistory(history: HistoryDoc): HistoryNodeLayout[] {
  const children = new Map<string | null, SnapshotDoc[]>();
  for (const snapshot of history.snapshots) {
    const bucket = children.get(snapshot.parentId) ?? [];
    bucket.push(snapshot);
    children.set(snapshot.parentId, bucket);
  }
  const out: HistoryNodeLayout[] = [];
  let nextRow = 0;

  const visit = (snapshot: SnapshotDoc, column: number, row: number) => {
    out.push({
      snapshot,
      row,
      column,
      isCurrent: snapshot.id === history.currentId,
    });
    const kids = children.get(snapshot.id) ?? [];
    kids.forEach((kid, index) => {
      const kidRow = index === 0 ? row : ++nextRow;
      visit(kid, column + 1, kidRow);
    });
  };

  for (const root of children.get(null) ?? []) {
    visit(root, 0, nextRow);
  }
  return out;
}
