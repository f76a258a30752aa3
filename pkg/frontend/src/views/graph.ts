/** Entities-and-actions graph: nodes with emoji and name, directed labeled
 * edges, grouped-edge cycling, drag to rearrange, connect-to-create,
 * double-click to add an entity, delete key to remove.
 */
import type { EdgeDoc, NodeDoc, ViewModelDoc } from "../types.js";
import { layoutGraph, type Point } from "../layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphCallbacks {
  onConnect(sourceEntityId: string, targetEntityId: string, name: string): void;
  onRemoveEntity(entityId: string): void;
  onRemoveAction(eventId: string): void;
  onEditAction(eventId: string, newName: string): void;
  onAddEntity(name: string): void;
  onSelectEntity(entityId: string | null): void;
  onHoverEvent(eventId: string | null): void;
}

interface GraphState {
  dragOffsets: Map<string, Point>;
  cycleIndex: Map<string, number>;
  selectedNodeKey: string | null;
  selectedEdgeKey: string | null;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) el.setAttribute(name, value);
  return el;
}

export class GraphView {
  private state: GraphState = {
    dragOffsets: new Map(),
    cycleIndex: new Map(),
    selectedNodeKey: null,
    selectedEdgeKey: null,
  };
  private view: ViewModelDoc | null = null;
  private highlighted = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: GraphCallbacks,
  ) {
    this.root.tabIndex = 0;
    this.root.addEventListener("keydown", (event) => {
      if (event.key !== "Delete" && event.key !== "Backspace") return;
      if (this.state.selectedEdgeKey && this.view) {
        const edge = this.view.edges.find((e) => e.key === this.state.selectedEdgeKey);
        const member = edge && this.currentMember(edge);
        if (member?.eventId) this.callbacks.onRemoveAction(member.eventId);
      } else if (this.state.selectedNodeKey && this.view) {
        const node = this.view.nodes.find((n) => n.key === this.state.selectedNodeKey);
        if (node) this.callbacks.onRemoveEntity(node.refId);
      }
    });
  }

  /** Fade everything except the given entity/event ids (empty = show all). */
  setHighlight(ids: Set<string>): void {
    this.highlighted = ids;
    if (this.view) this.render(this.view);
  }

  private currentMember(edge: EdgeDoc) {
    if (edge.members.length === 0) {
      return { label: edge.label, eventId: edge.eventId, srcKey: edge.srcKey, dstKey: edge.dstKey };
    }
    const index = (this.state.cycleIndex.get(edge.key) ?? 0) % edge.members.length;
    return edge.members[index]!;
  }

  private position(node: NodeDoc, placed: Map<string, Point>): Point {
    const base = placed.get(node.key) ?? { x: 0, y: 0 };
    const offset = this.state.dragOffsets.get(node.key);
    return offset ? { x: base.x + offset.x, y: base.y + offset.y } : base;
  }

  render(view: ViewModelDoc): void {
    this.view = view;
    const width = this.root.clientWidth || 480;
    const height = this.root.clientHeight || 360;
    const placement = layoutGraph(view, width, height);
    const positions = new Map<string, Point>();
    for (const node of view.nodes) positions.set(node.key, this.position(node, placement.nodes));

    const svg = svgEl("svg", { width: String(width), height: String(height) });
    const defs = svgEl("defs", {});
    const marker = svgEl("marker", {
      id: "arrow",
      viewBox: "0 0 10 10",
      refX: "22",
      refY: "5",
      markerWidth: "7",
      markerHeight: "7",
      orient: "auto-start-reverse",
    });
    marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#667" }));
    defs.appendChild(marker);
    svg.appendChild(defs);

    for (const edge of view.edges) {
      const src = positions.get(edge.srcKey);
      const dst = positions.get(edge.dstKey);
      if (!src || !dst) continue;
      const member = this.currentMember(edge);
      const group = svgEl("g", { class: "edge" });
      const dimmed =
        this.highlighted.size > 0 &&
        !(member.eventId !== null && this.highlighted.has(member.eventId));
      if (dimmed) group.classList.add("dimmed");

      if (edge.srcKey === edge.dstKey) {
        const loop = svgEl("path", {
          d: `M ${src.x} ${src.y - 18} C ${src.x - 42} ${src.y - 58}, ${src.x + 42} ${src.y - 58}, ${src.x} ${src.y - 18}`,
          class: "edge-line",
          "marker-end": "url(#arrow)",
          fill: "none",
        });
        group.appendChild(loop);
      } else {
        group.appendChild(
          svgEl("line", {
            x1: String(src.x),
            y1: String(src.y),
            x2: String(dst.x),
            y2: String(dst.y),
            class: "edge-line",
            "marker-end": "url(#arrow)",
          }),
        );
      }

      const midX = edge.srcKey === edge.dstKey ? src.x : (src.x + dst.x) / 2;
      const midY = edge.srcKey === edge.dstKey ? src.y - 52 : (src.y + dst.y) / 2 - 6;
      const label = svgEl("text", { x: String(midX), y: String(midY), class: "edge-label" });
      label.textContent = edge.count > 1 ? `${member.label} (${edge.count})` : member.label;
      group.appendChild(label);

      if (edge.count > 1) {
        const next = svgEl("text", {
          x: String(midX + 8 + label.textContent.length * 4),
          y: String(midY),
          class: "edge-cycle",
        });
        next.textContent = "›";
        next.addEventListener("click", (event) => {
          event.stopPropagation();
          const index = this.state.cycleIndex.get(edge.key) ?? 0;
          this.state.cycleIndex.set(edge.key, index + 1);
          this.render(view);
        });
        const prev = svgEl("text", {
          x: String(midX - 14 - label.textContent.length * 4),
          y: String(midY),
          class: "edge-cycle",
        });
        prev.textContent = "‹";
        prev.addEventListener("click", (event) => {
          event.stopPropagation();
          const index = this.state.cycleIndex.get(edge.key) ?? 0;
          this.state.cycleIndex.set(edge.key, index + edge.members.length - 1);
          this.render(view);
        });
        group.appendChild(prev);
        group.appendChild(next);
      }

      group.addEventListener("click", () => {
        this.state.selectedEdgeKey = edge.key;
        this.state.selectedNodeKey = null;
        this.render(view);
      });
      group.addEventListener("dblclick", () => {
        const current = this.currentMember(edge);
        if (!current.eventId) return;
        const name = window.prompt("New action label:", current.label);
        if (name) this.callbacks.onEditAction(current.eventId, name);
      });
      group.addEventListener("mouseenter", () =>
        this.callbacks.onHoverEvent(member.eventId),
      );
      group.addEventListener("mouseleave", () => this.callbacks.onHoverEvent(null));
      if (edge.key === this.state.selectedEdgeKey) group.classList.add("selected");
      svg.appendChild(group);
    }

    for (const node of view.nodes) {
      const at = positions.get(node.key)!;
      const group = svgEl("g", { class: "node", transform: `translate(${at.x}, ${at.y})` });
      if (this.highlighted.size > 0 && !this.highlighted.has(node.refId)) {
        group.classList.add("dimmed");
      }
      if (node.key === this.state.selectedNodeKey) group.classList.add("selected");
      group.appendChild(svgEl("circle", { r: "20", class: "node-bubble" }));
      const emoji = svgEl("text", { y: "5", class: "node-emoji", "text-anchor": "middle" });
      emoji.textContent = node.emoji;
      group.appendChild(emoji);
      const label = svgEl("text", { y: "34", class: "node-label", "text-anchor": "middle" });
      label.textContent = node.label;
      group.appendChild(label);

      group.addEventListener("click", (event) => {
        event.stopPropagation();
        this.state.selectedNodeKey = node.key;
        this.state.selectedEdgeKey = null;
        this.callbacks.onSelectEntity(node.refId);
        this.render(view);
      });
      this.attachNodeDrag(group, node, view);
      svg.appendChild(group);
    }

    svg.addEventListener("dblclick", (event) => {
      if (event.target !== svg) return;
      const name = window.prompt("New entity name:");
      if (name) this.callbacks.onAddEntity(name);
    });
    svg.addEventListener("click", (event) => {
      if (event.target !== svg) return;
      this.state.selectedNodeKey = null;
      this.state.selectedEdgeKey = null;
      this.callbacks.onSelectEntity(null);
      this.render(view);
    });

    this.root.replaceChildren(svg);
  }

  /** Plain drag repositions; dragging with Shift held connects two nodes. */
  private attachNodeDrag(group: SVGGElement, node: NodeDoc, view: ViewModelDoc): void {
    group.addEventListener("mousedown", (event) => {
      event.preventDefault();
      const connectMode = event.shiftKey;
      const startX = event.clientX;
      const startY = event.clientY;
      const initial = this.state.dragOffsets.get(node.key) ?? { x: 0, y: 0 };

      const onMove = (move: MouseEvent) => {
        if (connectMode) return;
        this.state.dragOffsets.set(node.key, {
          x: initial.x + (move.clientX - startX),
          y: initial.y + (move.clientY - startY),
        });
        this.render(view);
      };
      const onUp = (up: MouseEvent) => {
        window.removeEventListener("mousemove", onMove);
        window.removeEventListener("mouseup", onUp);
        if (!connectMode) return;
        const target = document
          .elementFromPoint(up.clientX, up.clientY)
          ?.closest("g.node");
        if (!target) return;
        const targetLabel = target.querySelector(".node-label")?.textContent;
        const targetNode = view.nodes.find((n) => n.label === targetLabel);
        if (!targetNode) return;
        const name = window.prompt("Action (one or two words):");
        if (name) this.callbacks.onConnect(node.refId, targetNode.refId, name);
      };
      window.addEventListener("mousemove", onMove);
      window.addEventListener("mouseup", onUp);
    });
  }
}
