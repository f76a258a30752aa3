/** History tree widget: click a node to revert; the current one is marked. */
import { layoutHistory } from "../history.js";
import type { HistoryDoc } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const STEP_X = 46;
const STEP_Y = 34;

export class HistoryWidget {
  constructor(
    private readonly root: HTMLElement,
    private readonly onCheckout: (snapshotId: string) => void,
  ) {}

  render(history: HistoryDoc): void {
    const nodes = layoutHistory(history);
    const width = Math.max(...nodes.map((n) => n.column), 0) * STEP_X + 48;
    const height = Math.max(...nodes.map((n) => n.row), 0) * STEP_Y + 40;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));

    const positions = new Map(
      nodes.map((n) => [n.snapshot.id, { x: 22 + n.column * STEP_X, y: 20 + n.row * STEP_Y }]),
    );

    for (const node of nodes) {
      const parent = node.snapshot.parentId;
      if (!parent) continue;
      const from = positions.get(parent);
      const to = positions.get(node.snapshot.id);
      if (!from || !to) continue;
      const line = document.createElementNS(SVG_NS, "path");
      line.setAttribute(
        "d",
        `M ${from.x} ${from.y} C ${(from.x + to.x) / 2} ${from.y}, ${(from.x + to.x) / 2} ${to.y}, ${to.x} ${to.y}`,
      );
      line.setAttribute("class", "history-link");
      line.setAttribute("fill", "none");
      svg.appendChild(line);
    }

    for (const node of nodes) {
      const at = positions.get(node.snapshot.id)!;
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(at.x));
      circle.setAttribute("cy", String(at.y));
      circle.setAttribute("r", "9");
      circle.setAttribute(
        "class",
        node.isCurrent ? "history-node current" : "history-node",
      );
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${node.snapshot.id}: ${node.snapshot.label}`;
      circle.appendChild(title);
      circle.addEventListener("click", () => this.onCheckout(node.snapshot.id));
      svg.appendChild(circle);
    }

    this.root.replaceChildren(svg);
  }
}
