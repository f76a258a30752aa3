/** Event timeline: one vertical line per event connecting the source and
 * target lanes, with the entity emojis on either side. Click selects,
 * shift-click extends the selection, a horizontal drag reorders.
 */
import type { EdgeDoc, ViewModelDoc } from "../types.js";
import { layoutLanes } from "../layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface TimelineCallbacks {
  onSelect(eventIds: string[]): void;
  onReorder(eventId: string, targetPosition: number): void;
  onHoverEvent(eventId: string | null): void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) el.setAttribute(name, value);
  return el;
}

export class TimelineView {
  private view: ViewModelDoc | null = null;
  private selected: string[] = [];
  private highlighted = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: TimelineCallbacks,
  ) {}

  setHighlight(ids: Set<string>): void {
    this.highlighted = ids;
    if (this.view) this.render(this.view);
  }

  setSelection(eventIds: string[]): void {
    this.selected = [...eventIds];
    if (this.view) this.render(this.view);
  }

  render(view: ViewModelDoc): void {
    this.view = view;
    const width = this.root.clientWidth || 640;
    const height = this.root.clientHeight || 180;
    const placement = layoutLanes(view, width, height);

    const svg = svgEl("svg", { width: String(width), height: String(height) });

    for (const lane of view.lanes) {
      const row = placement.laneRows.get(lane.key) ?? 0;
      const y =
        view.lanes.length > 1 ? 28 + (row * (height - 56)) / (view.lanes.length - 1) : height / 2;
      const label = svgEl("text", { x: "4", y: String(y + 4), class: "lane-label" });
      label.textContent = lane.label;
      svg.appendChild(label);
      svg.appendChild(
        svgEl("line", {
          x1: "48",
          y1: String(y),
          x2: String(width - 16),
          y2: String(y),
          class: "lane-line",
        }),
      );
    }

    // the per-event vertical lines come from the connect edges
    const byOrder = [...view.edges].sort((a, b) => {
      const orderOf = (edge: EdgeDoc) =>
        view.nodes.find((n) => n.key === edge.srcKey)?.order ?? 0;
      return orderOf(a) - orderOf(b);
    });

    byOrder.forEach((edge, position) => {
      const src = placement.nodes.get(edge.srcKey);
      const dst = placement.nodes.get(edge.dstKey);
      if (!src || !dst) return;
      const eventId = edge.eventId;
      const group = svgEl("g", { class: "timeline-event" });
      if (eventId && this.selected.includes(eventId)) group.classList.add("selected");
      if (
        this.highlighted.size > 0 &&
        !(eventId !== null && this.highlighted.has(eventId))
      ) {
        group.classList.add("dimmed");
      }

      const top = Math.min(src.y, dst.y);
      const bottom = Math.max(src.y, dst.y);
      group.appendChild(
        svgEl("line", {
          x1: String(src.x),
          y1: String(top === bottom ? top - 12 : top),
          x2: String(src.x),
          y2: String(bottom === top ? bottom + 12 : bottom),
          class: "event-line",
        }),
      );
      const srcNode = view.nodes.find((n) => n.key === edge.srcKey);
      const dstNode = view.nodes.find((n) => n.key === edge.dstKey);
      const srcEmoji = svgEl("text", {
        x: String(src.x),
        y: String(src.y - 6),
        class: "event-emoji",
        "text-anchor": "middle",
      });
      srcEmoji.textContent = srcNode?.emoji ?? "";
      group.appendChild(srcEmoji);
      const dstEmoji = svgEl("text", {
        x: String(dst.x),
        y: String(dst.y + 14),
        class: "event-emoji",
        "text-anchor": "middle",
      });
      dstEmoji.textContent = dstNode?.emoji ?? "";
      group.appendChild(dstEmoji);
      const label = svgEl("text", {
        x: String(src.x),
        y: String(height - 6),
        class: "event-label",
        "text-anchor": "middle",
      });
      label.textContent = edge.label;
      group.appendChild(label);

      group.addEventListener("mouseenter", () => this.callbacks.onHoverEvent(eventId));
      group.addEventListener("mouseleave", () => this.callbacks.onHoverEvent(null));
      this.attachDrag(group, eventId, position, placement.columnX, byOrder.length);
      svg.appendChild(group);
    });

    svg.addEventListener("click", (event) => {
      if (event.target !== svg) return;
      this.selected = [];
      this.callbacks.onSelect([]);
      this.render(view);
    });

    this.root.replaceChildren(svg);
  }

  /** A press is a click-select unless it travels horizontally, in which case
   * releasing commits a reorder to the nearest column. */
  private attachDrag(
    group: SVGGElement,
    eventId: string | null,
    position: number,
    columnX: (order: number) => number,
    count: number,
  ): void {
    if (!eventId) return;
    group.addEventListener("mousedown", (event) => {
      event.preventDefault();
      const startX = event.clientX;
      let moved = false;

      const onMove = (move: MouseEvent) => {
        if (Math.abs(move.clientX - startX) > 4) {
          moved = true;
          group.setAttribute("transform", `translate(${move.clientX - startX}, 0)`);
        }
      };
      const onUp = (up: MouseEvent) => {
        window.removeEventListener("mousemove", onMove);
        window.removeEventListener("mouseup", onUp);
        group.removeAttribute("transform");
        if (!moved) {
          const next = up.shiftKey
            ? [...new Set([...this.selected, eventId])]
            : [eventId];
          this.selected = next;
          this.callbacks.onSelect(next);
          return;
        }
        const delta = up.clientX - startX;
        let best = position;
        let bestDistance = Infinity;
        for (let slot = 0; slot < count; slot++) {
          const distance = Math.abs(columnX(position) + delta - columnX(slot));
          if (distance < bestDistance) {
            bestDistance = distance;
            best = slot;
          }
        }
        if (best !== position) this.callbacks.onReorder(eventId, best);
      };
      window.addEventListener("mousemove", onMove);
      window.addEventListener("mouseup", onUp);
    });
  }
}
