/** Log window: server emission order, newest at the bottom. */

import { UiSession } from "./session.js";

export class LogWindow {
  constructor(private root: HTMLElement, private session: UiSession) {
    session.onChange("log", () => this.render());
  }

  render(): void {
    const entries = this.session.logs.last(200);
    this.root.textContent = "";
    for (const entry of entries) {
      const line = document.createElement("div");
      line.className = `log-line log-${entry.level}`;
      line.textContent = `[${entry.level}] ${entry.source}: ${entry.message}`;
      this.root.appendChild(line);
    }
    this.root.scrollTop = this.root.scrollHeight;
  }
}
