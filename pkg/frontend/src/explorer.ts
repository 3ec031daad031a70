// Policy explorer: per-segment label chips (gated labels only, straight
// from the labels endpoint) and the five-icon panel with a strategy
// toggle. Clicking an icon highlights exactly its evidence segments.

import { ApiClient, ApiRequestError } from "./api";
import type { IconAssignment, LabelRow, Strategy } from "./types";

export class ExplorerView {
  private strategy: Strategy = "conservative";
  private labelRows: LabelRow[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly policyId: string,
    private readonly container: HTMLElement,
  ) {}

  async load(): Promise<void> {
    this.container.replaceChildren();
    try {
      this.labelRows = await this.client.labels(this.policyId);
      const icons = await this.client.icons(this.policyId, this.strategy);
      this.render(icons);
    } catch (err) {
      this.renderError(err);
    }
  }

  async setStrategy(strategy: Strategy): Promise<void> {
    this.strategy = strategy;
    try {
      const icons = await this.client.icons(this.policyId, this.strategy);
      this.renderIconPanel(icons);
      this.clearHighlights();
    } catch (err) {
      this.renderError(err);
    }
  }

  highlight(evidence: number[]): void {
    const wanted = new Set(evidence);
    for (const el of this.segmentElements()) {
      const idx = Number(el.dataset.segmentIndex);
      el.classList.toggle("evidence-highlight", wanted.has(idx));
    }
  }

  clearHighlights(): void {
    this.highlight([]);
  }

  private segmentElements(): HTMLElement[] {
    return Array.from(this.container.querySelectorAll<HTMLElement>(".segment"));
  }

  private render(icons: IconAssignment[]): void {
    const doc = this.container.ownerDocument;

    const toggle = doc.createElement("select");
    toggle.className = "strategy-toggle";
    for (const s of ["conservative", "permissive", "very_permissive"] as Strategy[]) {
      const opt = doc.createElement("option");
      opt.value = s;
      opt.textContent = s.replace(/_/g, " ");
      toggle.appendChild(opt);
    }
    toggle.value = this.strategy;
    toggle.addEventListener("change", () => {
      void this.setStrategy(toggle.value as Strategy);
    });
    this.container.appendChild(toggle);

    const panel = doc.createElement("div");
    panel.className = "icon-panel";
    this.container.appendChild(panel);
    this.renderIconPanel(icons);

    const list = doc.createElement("div");
    list.className = "segment-list";
    for (const row of this.labelRows) {
      const seg = doc.createElement("article");
      seg.className = "segment";
      seg.dataset.segmentIndex = String(row.segment_index);

      const chips = doc.createElement("div");
      chips.className = "label-chips";
      for (const category of row.categories) {
        const chip = doc.createElement("span");
        chip.className = "chip chip-category";
        chip.textContent = category;
        chips.appendChild(chip);
      }
      for (const av of row.attribute_values) {
        const chip = doc.createElement("span");
        chip.className = "chip chip-value";
        chip.textContent = `${av.attribute}: ${av.value}`;
        chips.appendChild(chip);
      }
      seg.appendChild(chips);

      const text = doc.createElement("p");
      text.className = "segment-text";
      text.textContent = row.text;
      seg.appendChild(text);
      list.appendChild(seg);
    }
    this.container.appendChild(list);
  }

  private renderIconPanel(icons: IconAssignment[]): void {
    const panel = this.container.querySelector<HTMLElement>(".icon-panel");
    if (!panel) return;
    const doc = panel.ownerDocument;
    panel.replaceChildren();
    for (const assignment of icons) {
      const badge = doc.createElement("button");
      badge.className = `icon icon-${assignment.color.toLowerCase()}`;
      badge.dataset.icon = assignment.icon;
      badge.dataset.color = assignment.color;
      badge.dataset.evidence = assignment.evidence.join(",");
      badge.textContent = `${assignment.icon}: ${assignment.color}`;
      badge.addEventListener("click", () => this.highlight(assignment.evidence));
      panel.appendChild(badge);
    }
  }

  private renderError(err: unknown): void {
    const doc = this.container.ownerDocument;
    const box = doc.createElement("div");
    if (err instanceof ApiRequestError) {
      box.className = `explorer-error error-${err.code.replace(/_/g, "-")}`;
      box.dataset.errorCode = err.code;
      box.textContent = err.message;
    } else {
      box.className = "explorer-error error-network";
      box.dataset.errorCode = "network";
      box.textContent = "Could not reach the server.";
    }
    this.container.appendChild(box);
  }
}
