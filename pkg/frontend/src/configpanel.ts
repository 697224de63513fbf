/**
 * Configuration window: the live tree of data settings and per-category
 * functions with enable/priority/parameter editors. All edits go through
 * the session (validation, optimistic apply, server reconciliation).
 */

import { UiSession } from "./session.js";

const CATEGORIES = ["pre", "lidar", "camera", "calib", "label", "post"];

export class ConfigPanel {
  constructor(private root: HTMLElement, private session: UiSession) {
    session.onChange("config", () => this.render());
  }

  render(): void {
    const config = this.session.config;
    this.root.textContent = "";
    if (config === null) {
      this.root.textContent = "waiting for config...";
      return;
    }

    this.root.appendChild(this.sectionHeader("data"));
    const dataBox = document.createElement("div");
    dataBox.className = "fn-params";
    for (const [key, value] of Object.entries(config.data)) {
      dataBox.appendChild(this.editorRow(`data.${key}`, key, value));
    }
    this.root.appendChild(dataBox);

    this.root.appendChild(this.sectionHeader("proc"));
    for (const category of CATEGORIES) {
      const fns = config.proc[category] ?? {};
      const catEl = document.createElement("details");
      catEl.open = Object.values(fns).some((f) => (f as any).enabled);
      const summary = document.createElement("summary");
      summary.textContent = category;
      catEl.appendChild(summary);
      for (const [name, fields] of Object.entries(fns)) {
        catEl.appendChild(this.functionBlock(category, name, fields));
      }
      this.root.appendChild(catEl);
    }

    this.root.appendChild(this.sectionHeader("visualization"));
    const visBox = document.createElement("div");
    visBox.className = "fn-params";
    for (const [key, value] of Object.entries(config.visualization)) {
      visBox.appendChild(this.editorRow(`visualization.${key}`, key, value));
    }
    this.root.appendChild(visBox);
  }

  private sectionHeader(text: string): HTMLElement {
    const el = document.createElement("h3");
    el.textContent = text;
    return el;
  }

  private functionBlock(
    category: string, name: string, fields: Record<string, unknown>,
  ): HTMLElement {
    const block = document.createElement("div");
    block.className = "fn-block";

    const head = document.createElement("div");
    head.className = "fn-head";
    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = Boolean(fields.enabled);
    toggle.addEventListener("change", () => {
      void this.session.editParam(`proc.${category}.${name}.enabled`, toggle.checked);
    });
    const title = document.createElement("span");
    title.textContent = name;
    head.append(toggle, title);
    block.appendChild(head);

    const params = document.createElement("div");
    params.className = "fn-params";
    for (const [key, value] of Object.entries(fields)) {
      if (key === "enabled") continue;
      params.appendChild(this.editorRow(`proc.${category}.${name}.${key}`, key, value));
    }
    block.appendChild(params);
    return block;
  }

  private editorRow(path: string, label: string, value: unknown): HTMLElement {
    const row = document.createElement("label");
    row.className = "param-row";
    const caption = document.createElement("span");
    caption.textContent = label;
    row.appendChild(caption);

    if (typeof value === "boolean") {
      const input = document.createElement("input");
      input.type = "checkbox";
      input.checked = value;
      input.addEventListener("change", () => {
        void this.session.editParam(path, input.checked);
      });
      row.appendChild(input);
      return row;
    }

    const input = document.createElement("input");
    input.type = "text";
    input.value = Array.isArray(value) ? JSON.stringify(value) : String(value);
    input.addEventListener("change", () => {
      void this.session.editParam(path, this.parseInput(input.value, value));
    });
    row.appendChild(input);
    return row;
  }

  /**
   * Parse the text field against the current value's type; a non-numeric
   * string for a numeric param yields NaN, which validateEdit blocks
   * before anything is sent.
   */
  private parseInput(text: string, current: unknown): unknown {
    if (typeof current === "number") {
      return Number.isInteger(current) && !text.includes(".")
        ? parseInt(text, 10)
        : parseFloat(text);
    }
    if (Array.isArray(current)) {
      try {
        return JSON.parse(text);
      } catch {
        return text; // wrong type, blocked client-side
      }
    }
    return text;
  }
}
