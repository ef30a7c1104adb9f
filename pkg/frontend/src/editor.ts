// Textarea-based theory editor with a diagnostics layer.
//
// Diagnostic popups live in an overlay owned by the editor wrapper and are
// addressed by (line, column) in character-grid units, so they track the
// monospace text without measuring pixels. Rendering diagnostics never
// touches the textarea value or selection: the cursor stays where it is.

import type { Diagnostic } from "./api";

export interface CursorPosition {
  start: number;
  end: number;
}

export class TextEditor {
  readonly textarea: HTMLTextAreaElement;
  readonly overlay: HTMLDivElement;
  private diagnostics: Diagnostic[] = [];
  private changeHandlers: (() => void)[] = [];
  dirty = false;

  constructor(root: HTMLElement) {
    root.classList.add("editor-wrap");
    this.textarea = document.createElement("textarea");
    this.textarea.className = "editor-input";
    this.textarea.spellcheck = false;
    this.overlay = document.createElement("div");
    this.overlay.className = "editor-overlay";
    root.append(this.textarea, this.overlay);

    this.textarea.addEventListener("input", () => {
      this.dirty = true;
      // ranges are stale the moment the text changes underneath them
      this.clearDiagnostics();
      this.changeHandlers.forEach((h) => h());
    });
  }

  onChange(handler: () => void): void {
    this.changeHandlers.push(handler);
  }

  get value(): string {
    return this.textarea.value;
  }

  setValue(content: string, markClean = true): void {
    this.textarea.value = content;
    if (markClean) this.dirty = false;
    this.clearDiagnostics();
  }

  get cursor(): CursorPosition {
    return { start: this.textarea.selectionStart, end: this.textarea.selectionEnd };
  }

  setCursor(start: number, end = start): void {
    this.textarea.selectionStart = start;
    this.textarea.selectionEnd = end;
  }

  /** Insert at the cursor (replacing any selection); cursor lands after the text. */
  insertAtCursor(text: string): void {
    const { start, end } = this.cursor;
    const value = this.textarea.value;
    this.textarea.value = value.slice(0, start) + text + value.slice(end);
    const after = start + text.length;
    this.setCursor(after);
    this.dirty = true;
    this.clearDiagnostics();
    this.changeHandlers.forEach((h) => h());
  }

  clearDiagnostics(): void {
    this.diagnostics = [];
    this.overlay.replaceChildren();
  }

  getDiagnostics(): Diagnostic[] {
    return this.diagnostics.slice();
  }

  /**
   * Render popups "directly at the point where the failure occurs".
   * Must never move the cursor or modify the buffer.
   */
  setDiagnostics(diagnostics: Diagnostic[]): void {
    this.diagnostics = diagnostics.slice();
    this.overlay.replaceChildren();
    for (const diagnostic of this.diagnostics) {
      if (!diagnostic.range) continue;
      const popup = document.createElement("div");
      popup.className = `lint-popup lint-${diagnostic.severity} lint-src-${diagnostic.source}`;
      popup.dataset.line = String(diagnostic.range.line);
      popup.dataset.col = String(diagnostic.range.col);
      if (diagnostic.rule_id) popup.dataset.ruleId = diagnostic.rule_id;
      popup.textContent = diagnostic.message;
      // character-grid placement: one row per line, one ch per column
      popup.style.top = `calc(${diagnostic.range.line} * var(--line-height))`;
      popup.style.left = `${diagnostic.range.col}ch`;
      this.overlay.appendChild(popup);
    }
  }

  /** 0-based character offset of a 1-based line / 0-based column. */
  offsetOf(line: number, col: number): number {
    const lines = this.textarea.value.split("\n");
    let offset = 0;
    for (let i = 0; i < line - 1 && i < lines.length; i += 1) {
      offset += lines[i].length + 1;
    }
    return offset + col;
  }

  focusPosition(line: number, col: number): void {
    const offset = this.offsetOf(line, col);
    this.setCursor(offset);
    this.textarea.focus();
  }
}
