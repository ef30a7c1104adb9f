// Symbol keyboard. Lives in its own dock below the editor/output row, so
// opening it reflows the page instead of floating over other panes (the
// overlap bugs came from an absolutely positioned panel).

import type { SymbolKey } from "./api";

export class SymbolKeyboard {
  readonly panel: HTMLDivElement;
  private visible = false;

  constructor(
    private dock: HTMLElement,
    private onInsert: (text: string) => void,
  ) {
    this.panel = document.createElement("div");
    this.panel.className = "symbol-keyboard";
    this.panel.hidden = true;
    this.dock.appendChild(this.panel);
  }

  setLayout(keys: SymbolKey[]): void {
    this.panel.replaceChildren();
    for (const key of keys) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "symbol-key";
      button.textContent = key.glyph;
      button.dataset.insert = key.insert;
      button.title = key.insert;
      button.addEventListener("click", () => this.onInsert(key.insert));
      this.panel.appendChild(button);
    }
  }

  toggle(): boolean {
    this.visible = !this.visible;
    this.panel.hidden = !this.visible;
    return this.visible;
  }

  isVisible(): boolean {
    return this.visible;
  }
}
