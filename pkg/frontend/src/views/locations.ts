/** Locations-and-entities view: location bubbles with smaller entity nodes
 * clustered at them; dragging an entity onto another bubble moves it, a
 * double-click on empty canvas creates a new location.
 */
import type { NodeDoc, ViewModelDoc } from "../types.js";
import { layoutAnchored } from "../layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface LocationCallbacks {
  onMoveEntity(entityId: string, fromLocationId: string, toLocationId: string): void;
  onAddLocation(name: string): void;
  onHoverEntity(entityId: string | null): void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) el.setAttribute(name, value);
  return el;
}

export class LocationsView {
  private view: ViewModelDoc | null = null;
  private highlighted = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: LocationCallbacks,
  ) {}

  setHighlight(ids: Set<string>): void {
    this.highlighted = ids;
    if (this.view) this.render(this.view);
  }

  render(view: ViewModelDoc): void {
    this.view = view;
    const width = this.root.clientWidth || 480;
    const height = this.root.clientHeight || 360;
    const placement = layoutAnchored(view, width, height);

    const svg = svgEl("svg", { width: String(width), height: String(height) });

    const anchorAt = new Map<string, { x: number; y: number }>();
    for (const anchor of view.anchors) {
      const at = placement.anchors.get(anchor.key)!;
      anchorAt.set(anchor.key, at);
      const group = svgEl("g", {
        class: "location-bubble",
        transform: `translate(${at.x}, ${at.y})`,
        "data-anchor": anchor.key,
        "data-location": anchor.refId,
      });
      if (this.highlighted.size > 0 && !this.highlighted.has(anchor.refId)) {
        group.classList.add("dimmed");
      }
      group.appendChild(svgEl("circle", { r: "64", class: "location-circle" }));
      const emoji = svgEl("text", { y: "-40", class: "location-emoji", "text-anchor": "middle" });
      emoji.textContent = anchor.emoji;
      group.appendChild(emoji);
      const label = svgEl("text", { y: "-22", class: "location-label", "text-anchor": "middle" });
      label.textContent = anchor.label;
      group.appendChild(label);
      svg.appendChild(group);
    }

    for (const node of view.nodes) {
      const at = placement.nodes.get(node.key)!;
      const group = svgEl("g", {
        class: "entity-chip",
        transform: `translate(${at.x}, ${at.y})`,
      });
      if (this.highlighted.size > 0 && !this.highlighted.has(node.refId)) {
        group.classList.add("dimmed");
      }
      group.appendChild(svgEl("circle", { r: "13", class: "chip-bubble" }));
      const emoji = svgEl("text", { y: "4", class: "chip-emoji", "text-anchor": "middle" });
      emoji.textContent = node.emoji;
      group.appendChild(emoji);
      const label = svgEl("text", { y: "24", class: "chip-label", "text-anchor": "middle" });
      label.textContent = node.label;
      group.appendChild(label);
      group.addEventListener("mouseenter", () => this.callbacks.onHoverEntity(node.refId));
      group.addEventListener("mouseleave", () => this.callbacks.onHoverEntity(null));
      this.attachDrag(group, node, at);
      svg.appendChild(group);
    }

    svg.addEventListener("dblclick", (event) => {
      if (event.target !== svg) return;
      const name = window.prompt("New location name:");
      if (name) this.callbacks.onAddLocation(name);
    });

    this.root.replaceChildren(svg);
  }

  /** Dropping the chip over a different bubble moves the entity; anywhere
   * else snaps it back. */
  private attachDrag(
    group: SVGGElement,
    node: NodeDoc,
    home: { x: number; y: number },
  ): void {
    group.addEventListener("mousedown", (event) => {
      event.preventDefault();
      const startX = event.clientX;
      const startY = event.clientY;

      const onMove = (move: MouseEvent) => {
        group.setAttribute(
          "transform",
          `translate(${home.x + move.clientX - startX}, ${home.y + move.clientY - startY})`,
        );
      };
      const onUp = (up: MouseEvent) => {
        window.removeEventListener("mousemove", onMove);
        window.removeEventListener("mouseup", onUp);
        group.setAttribute("transform", `translate(${home.x}, ${home.y})`);
        group.style.display = "none";
        const target = document
          .elementFromPoint(up.clientX, up.clientY)
          ?.closest("g.location-bubble");
        group.style.display = "";
        const toLocation = target?.getAttribute("data-location");
        const fromAnchor = node.anchorKey;
        const fromLocation = fromAnchor ? fromAnchor.split(":").pop() ?? null : null;
        if (toLocation && fromLocation && toLocation !== fromLocation) {
          this.callbacks.onMoveEntity(node.refId, fromLocation, toLocation);
        }
      };
      window.addEventListener("mousemove", onMove);
      window.addEventListener("mouseup", onUp);
    });
  }
}
