// Keyword and rule-name completion. Term-level completion is out of scope:
// the prover runs server-side only, so there is no semantic context here.

import type { TextEditor } from "./editor";

export const ISAR_KEYWORDS = [
  "theory",
  "imports",
  "begin",
  "end",
  "lemma",
  "theorem",
  "corollary",
  "definition",
  "fun",
  "datatype",
  "proof",
  "qed",
  "by",
  "apply",
  "done",
  "assume",
  "assumes",
  "shows",
  "show",
  "have",
  "from",
  "then",
  "thus",
  "hence",
  "with",
  "fix",
  "obtain",
  "where",
  "next",
  "using",
  "unfolding",
];

const WORD = /[A-Za-z0-9_']/;

export class CompletionMenu {
  readonly menu: HTMLUListElement;
  private words: string[] = [...ISAR_KEYWORDS];
  private ruleNames: string[] = [];
  private items: string[] = [];
  private selected = 0;
  private prefixLength = 0;

  constructor(
    host: HTMLElement,
    private editor: TextEditor,
    private maxItems = 8,
  ) {
    this.menu = document.createElement("ul");
    this.menu.className = "completion-menu";
    this.menu.hidden = true;
    host.appendChild(this.menu);

    this.editor.textarea.addEventListener("input", () => this.refresh());
    this.editor.textarea.addEventListener("keydown", (event) => this.onKey(event));
    this.editor.textarea.addEventListener("blur", () => this.hide());
  }

  setRuleNames(names: string[]): void {
    this.ruleNames = names.slice();
    this.words = [...ISAR_KEYWORDS, ...this.ruleNames];
  }

  isOpen(): boolean {
    return !this.menu.hidden;
  }

  suggestions(): string[] {
    return this.items.slice();
  }

  private currentPrefix(): string {
    const { start, end } = this.editor.cursor;
    if (start !== end) return "";
    const text = this.editor.value;
    let begin = start;
    while (begin > 0 && WORD.test(text[begin - 1])) begin -= 1;
    return text.slice(begin, start);
  }

  refresh(): void {
    const prefix = this.currentPrefix();
    if (prefix.length < 2) {
      this.hide();
      return;
    }
    const matches = this.words
      .filter((w) => w.startsWith(prefix) && w !== prefix)
      .slice(0, this.maxItems);
    if (!matches.length) {
      this.hide();
      return;
    }
    this.prefixLength = prefix.length;
    this.items = matches;
    this.selected = 0;
    this.menu.replaceChildren(
      ...matches.map((word, index) => {
        const item = document.createElement("li");
        item.className = index === this.selected ? "completion-item selected" : "completion-item";
        item.dataset.word = word;
        item.textContent = word;
        item.addEventListener("mousedown", (event) => {
          event.preventDefault();
          this.accept(word);
        });
        return item;
      }),
    );
    this.menu.hidden = false;
  }

  private onKey(event: KeyboardEvent): void {
    if (this.menu.hidden) return;
    if (event.key === "ArrowDown" || event.key === "ArrowUp") {
      event.preventDefault();
      const delta = event.key === "ArrowDown" ? 1 : -1;
      this.selected = (this.selected + delta + this.items.length) % this.items.length;
      [...this.menu.children].forEach((node, index) =>
        (node as HTMLElement).classList.toggle("selected", index === this.selected),
      );
    } else if (event.key === "Tab" || event.key === "Enter") {
      event.preventDefault();
      this.accept(this.items[this.selected]);
    } else if (event.key === "Escape") {
      this.hide();
    }
  }

  accept(word: string): void {
    this.editor.insertAtCursor(word.slice(this.prefixLength));
    this.hide();
  }

  hide(): void {
    this.menu.hidden = true;
    this.items = [];
  }
}
