/** Text pane: sentence-aware reading view with hover sync and caret scoping,
 * a plain textarea for manual edits, and the tracked-changes review overlay.
 */
import type { RunDoc, SentenceDoc } from "../types.js";
import {
  allDecisions,
  decisionsPayload,
  renderRuns,
  type RunDecision,
} from "../trackChanges.js";

export interface EditorCallbacks {
  onManualEdit(text: string): void;
  onCaret(range: { start: number; end: number } | null): void;
  onHoverSentence(range: { start: number; end: number } | null): void;
  onResolve(decisions: "accept_all" | "reject_all" | Record<number, "accept" | "reject">): void;
}

export class EditorPane {
  private mode: "read" | "edit" | "review" = "read";
  private text = "";
  private sentences: SentenceDoc[] = [];
  private runs: RunDoc[] | null = null;
  private decisions = new Map<number, "accept" | "reject">();
  private highlightedSentences = new Set<number>();

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: EditorCallbacks,
  ) {}

  setStory(text: string, sentences: SentenceDoc[]): void {
    this.text = text;
    this.sentences = sentences;
    if (this.mode !== "review") this.mode = "read";
    this.render();
  }

  setPendingRuns(runs: RunDoc[] | null): void {
    this.runs = runs;
    this.decisions = new Map();
    this.mode = runs ? "review" : "read";
    this.render();
  }

  setHighlightedSentences(indices: Set<number>): void {
    this.highlightedSentences = indices;
    if (this.mode === "read") this.render();
  }

  private render(): void {
    if (this.mode === "review" && this.runs) {
      this.renderReview(this.runs);
    } else if (this.mode === "edit") {
      this.renderTextarea();
    } else {
      this.renderRead();
    }
  }

  private renderRead(): void {
    const container = document.createElement("div");
    container.className = "editor-read";
    let cursor = 0;
    for (const sentence of this.sentences) {
      if (sentence.charStart > cursor) {
        container.appendChild(
          document.createTextNode(this.text.slice(cursor, sentence.charStart)),
        );
      }
      const span = document.createElement("span");
      span.className = "sentence";
      if (this.highlightedSentences.has(sentence.index)) span.classList.add("highlight");
      span.textContent = this.text.slice(sentence.charStart, sentence.charEnd);
      span.addEventListener("mouseenter", () =>
        this.callbacks.onHoverSentence({ start: sentence.charStart, end: sentence.charEnd }),
      );
      span.addEventListener("mouseleave", () => this.callbacks.onHoverSentence(null));
      span.addEventListener("click", () =>
        this.callbacks.onCaret({
          start: sentence.charStart + 1,
          end: sentence.charStart + 1,
        }),
      );
      container.appendChild(span);
      cursor = sentence.charEnd;
    }
    if (cursor < this.text.length) {
      container.appendChild(document.createTextNode(this.text.slice(cursor)));
    }
    if (!this.sentences.length && this.text) {
      container.textContent = this.text;
    }

    const editButton = document.createElement("button");
    editButton.textContent = "edit text";
    editButton.addEventListener("click", () => {
      this.mode = "edit";
      this.render();
    });

    this.root.replaceChildren(container, editButton);
  }

  private renderTextarea(): void {
    const area = document.createElement("textarea");
    area.className = "editor-area";
    area.value = this.text;
    area.addEventListener("select", () => {
      this.callbacks.onCaret({ start: area.selectionStart, end: area.selectionEnd });
    });
    area.addEventListener("keyup", () => {
      this.callbacks.onCaret({ start: area.selectionStart, end: area.selectionEnd });
    });

    const done = document.createElement("button");
    done.textContent = "done";
    done.addEventListener("click", () => {
      this.mode = "read";
      if (area.value !== this.text) {
        this.callbacks.onManualEdit(area.value);
      } else {
        this.render();
      }
    });
    this.root.replaceChildren(area, done);
  }

  private renderReview(runs: RunDoc[]): void {
    const container = document.createElement("div");
    container.className = "editor-review";
    for (const rendered of renderRuns(runs, this.decisions)) {
      const span = document.createElement("span");
      span.textContent = rendered.text;
      span.className = `run run-${rendered.state}`;
      if (rendered.decidable) {
        span.title = "click to toggle accept/reject";
        span.addEventListener("click", () => {
          const current: RunDecision = this.decisions.get(rendered.index);
          this.decisions.set(rendered.index, current === "reject" ? "accept" : "reject");
          this.render();
        });
      }
      container.appendChild(span);
    }

    const acceptAll = document.createElement("button");
    acceptAll.textContent = "accept all";
    acceptAll.addEventListener("click", () => this.callbacks.onResolve("accept_all"));
    const rejectAll = document.createElement("button");
    rejectAll.textContent = "reject all";
    rejectAll.addEventListener("click", () => this.callbacks.onResolve("reject_all"));
    const applyMixed = document.createElement("button");
    applyMixed.textContent = "apply decisions";
    applyMixed.addEventListener("click", () => {
      const full = allDecisions(runs, "accept");
      for (const [index, decision] of this.decisions) full.set(index, decision);
      this.callbacks.onResolve(decisionsPayload(full));
    });

    this.root.replaceChildren(container, acceptAll, rejectAll, applyMixed);
  }
}
