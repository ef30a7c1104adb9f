// Output pane: the prover/linter feedback list on the right-hand side.

import type { Diagnostic } from "./api";

export class OutputPane {
  constructor(
    private root: HTMLElement,
    private onJump?: (line: number, col: number) => void,
  ) {
    this.root.classList.add("output-pane");
  }

  showStatus(text: string): void {
    let status = this.root.querySelector<HTMLElement>(".output-status");
    if (!status) {
      status = document.createElement("div");
      status.className = "output-status";
      this.root.prepend(status);
    }
    status.textContent = text;
  }

  render(diagnostics: Diagnostic[], summary: string): void {
    this.root.replaceChildren();
    this.showStatus(summary);
    const list = document.createElement("ul");
    list.className = "output-list";
    for (const diagnostic of diagnostics) {
      const item = document.createElement("li");
      item.className = `output-entry output-${diagnostic.severity}`;
      const where = diagnostic.range
        ? `${diagnostic.theory_name || "theory"} ${diagnostic.range.line}:${diagnostic.range.col}`
        : diagnostic.theory_name || "";
      item.textContent = where ? `${where} — ${diagnostic.message}` : diagnostic.message;
      if (diagnostic.range && this.onJump) {
        const { line, col } = diagnostic.range;
        item.addEventListener("click", () => this.onJump!(line, col));
      }
      list.appendChild(item);
    }
    this.root.appendChild(list);
  }

  clear(): void {
    this.root.replaceChildren();
  }
}
