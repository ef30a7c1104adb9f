// Application shell: login, toolbar, sidebar file browser, editor, output
// pane, symbol keyboard and PDF viewer, wired to the backend API and the
// realtime channel.

import {
  ApiClient,
  type ActivityConfig,
  type Channel,
  type ChannelMessage,
  type CheckResult,
  type Diagnostic,
  openChannel,
} from "./api";
import { CompletionMenu } from "./completion";
import { TextEditor } from "./editor";
import { SymbolKeyboard } from "./keyboard";
import { OutputPane } from "./output";
import { BufferStore } from "./state";

export interface AppOptions {
  channelFactory?: (token: string) => Channel;
  bufferStore?: BufferStore;
  lintDebounceMs?: number;
}

const DEFAULT_THEORY = "Scratch";

export class ProofBenchApp {
  readonly editor: TextEditor;
  readonly output: OutputPane;
  readonly keyboard: SymbolKeyboard;
  readonly completion: CompletionMenu;
  readonly banner: HTMLDivElement;

  activity: ActivityConfig | null = null;
  theoryName = DEFAULT_THEORY;
  linterEnabled = true;

  private channel: Channel | null = null;
  private activeCheckId: string | null = null;
  private runQueued = false;
  private buffers: BufferStore;
  private lintTimer: ReturnType<typeof setTimeout> | null = null;
  private lintDebounceMs: number;
  private channelFactory: (token: string) => Channel;

  // layout nodes the tests inspect
  readonly panes: {
    toolbar: HTMLElement;
    sidebar: HTMLElement;
    editorPane: HTMLElement;
    outputPane: HTMLElement;
    keyboardDock: HTMLElement;
    pdfPane: HTMLElement;
    login: HTMLElement;
  };

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
    options: AppOptions = {},
  ) {
    this.buffers = options.bufferStore ?? new BufferStore();
    this.lintDebounceMs = options.lintDebounceMs ?? 300;
    this.channelFactory = options.channelFactory ?? ((token) => openChannel(token));

    this.root.innerHTML = `
      <div class="login-screen">
        <form class="login-form">
          <input name="name" placeholder="user name" autocomplete="username">
          <input name="password" type="password" placeholder="password">
          <button type="submit" class="login-button">Log in</button>
          <button type="button" class="guest-button">Continue as guest</button>
          <div class="login-error" hidden></div>
        </form>
      </div>
      <div class="workbench" hidden>
        <div class="banner" hidden></div>
        <header class="toolbar">
          <select class="activity-select"></select>
          <button type="button" class="run-button">Run</button>
          <span class="rule-dropdowns"></span>
          <label class="linter-toggle"><input type="checkbox" checked> linter</label>
          <a class="download-button" download>Download</a>
          <label class="upload-button">Upload<input type="file" hidden accept=".zip"></label>
          <button type="button" class="pdf-button" hidden>Exercise sheet</button>
        </header>
        <div class="main-row">
          <aside class="sidebar">
            <div class="file-browser"></div>
            <div class="profile"></div>
          </aside>
          <section class="editor-pane"></section>
          <section class="output-pane-host"></section>
          <section class="pdf-pane" hidden>
            <button type="button" class="pdf-close">close</button>
            <iframe class="pdf-frame" title="exercise sheet"></iframe>
          </section>
        </div>
        <footer class="bottom-row">
          <span class="status-line"></span>
          <div class="keyboard-dock"></div>
          <button type="button" class="keyboard-button" title="symbol keyboard">⌨</button>
        </footer>
      </div>
    `;

    this.panes = {
      toolbar: this.query(".toolbar"),
      sidebar: this.query(".sidebar"),
      editorPane: this.query(".editor-pane"),
      outputPane: this.query(".output-pane-host"),
      keyboardDock: this.query(".keyboard-dock"),
      pdfPane: this.query(".pdf-pane"),
      login: this.query(".login-screen"),
    };
    this.banner = this.query(".banner");

    this.editor = new TextEditor(this.panes.editorPane);
    this.output = new OutputPane(this.panes.outputPane, (line, col) =>
      this.editor.focusPosition(line, col),
    );
    this.keyboard = new SymbolKeyboard(this.panes.keyboardDock, (text) =>
      this.editor.insertAtCursor(text),
    );
    this.completion = new CompletionMenu(this.panes.editorPane, this.editor);

    this.wireEvents();
  }

  private query<T extends HTMLElement = HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing layout node: ${selector}`);
    return node;
  }

  private wireEvents(): void {
    const form = this.query<HTMLFormElement>(".login-form");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      void this.login(String(data.get("name") ?? ""), String(data.get("password") ?? ""));
    });
    this.query(".guest-button").addEventListener("click", () => void this.login(null, null));

    this.query(".run-button").addEventListener("click", () => void this.runCheck());
    this.query(".keyboard-button").addEventListener("click", () => this.keyboard.toggle());
    this.query<HTMLSelectElement>(".activity-select").addEventListener("change", (event) => {
      const id = (event.target as HTMLSelectElement).value;
      void this.switchActivity(id);
    });
    this.query(".pdf-button").addEventListener("click", () => {
      this.panes.pdfPane.hidden = false;
    });
    this.query(".pdf-close").addEventListener("click", () => {
      this.panes.pdfPane.hidden = true;
    });
    this.query<HTMLInputElement>(".linter-toggle input").addEventListener("change", (event) => {
      this.linterEnabled = (event.target as HTMLInputElement).checked;
    });
    const upload = this.query<HTMLInputElement>(".upload-button input");
    upload.addEventListener("change", async () => {
      const file = upload.files?.[0];
      if (file && this.activity) {
        await this.api.uploadArchive(this.activity.id, file);
        await this.refreshFileBrowser();
      }
    });

    this.editor.onChange(() => {
      this.persistBuffer();
      this.scheduleLint();
    });
  }

  // -- session ----------------------------------------------------------

  async login(name: string | null, password: string | null): Promise<void> {
    const errorBox = this.query(".login-error");
    errorBox.hidden = true;
    try {
      if (name === null) await this.api.guestLogin();
      else await this.api.login(name, password ?? "");
    } catch (error) {
      errorBox.textContent = `login failed: ${(error as Error).message}`;
      errorBox.hidden = false;
      return;
    }
    this.panes.login.hidden = true;
    this.query(".workbench").hidden = false;
    this.query(".profile").textContent = `${this.api.user?.name} (${this.api.user?.role})`;
    this.connectChannel();
    const activities = await this.api.activities();
    const select = this.query<HTMLSelectElement>(".activity-select");
    select.replaceChildren(
      ...activities.map((activity) => {
        const option = document.createElement("option");
        option.value = activity.id;
        option.textContent = activity.title;
        return option;
      }),
    );
    if (activities.length) await this.applyActivity(activities[0]);
  }

  private connectChannel(): void {
    this.channel = this.channelFactory(this.api.token);
    this.channel.onMessage((message) => this.handleChannelMessage(message));
    this.channel.onClose(() => {
      // drop mid-check: fall back to re-fetching the final result
      if (this.activeCheckId) void this.pollResult(this.activeCheckId);
    });
  }

  // -- activities ---------------------------------------------------------

  /** Auto-saves the buffer, then loads the new activity's configuration. */
  async switchActivity(id: string): Promise<boolean> {
    if (this.activity && this.activity.id !== id) {
      const saved = await this.saveCurrent();
      if (!saved) {
        this.showBanner("switch blocked: could not save your current theory");
        this.query<HTMLSelectElement>(".activity-select").value = this.activity.id;
        return false;
      }
    }
    const activity = await this.api.activity(id);
    await this.applyActivity(activity);
    return true;
  }

  private async applyActivity(activity: ActivityConfig): Promise<void> {
    this.activity = activity;
    this.query<HTMLSelectElement>(".activity-select").value = activity.id;

    const dropdowns = this.query(".rule-dropdowns");
    dropdowns.replaceChildren();
    for (const group of activity.rule_reference) {
      const details = document.createElement("details");
      details.className = "rule-group";
      const summary = document.createElement("summary");
      summary.textContent = group.group;
      details.appendChild(summary);
      const list = document.createElement("ul");
      for (const entry of group.entries) {
        const item = document.createElement("li");
        const button = document.createElement("button");
        button.type = "button";
        button.className = "rule-entry";
        button.dataset.rule = entry.name;
        button.textContent = entry.name;
        button.title = entry.statement;
        button.addEventListener("click", () => this.insertRule(entry.name));
        item.appendChild(button);
        list.appendChild(item);
      }
      details.appendChild(list);
      dropdowns.appendChild(details);
    }

    this.keyboard.setLayout(activity.symbol_keyboard);
    this.completion.setRuleNames(
      activity.rule_reference.flatMap((group) => group.entries.map((entry) => entry.name)),
    );
    this.query<HTMLElement>(".linter-toggle").hidden = !activity.linter_toggle_allowed;

    const pdfButton = this.query<HTMLButtonElement>(".pdf-button");
    const frame = this.query<HTMLIFrameElement>(".pdf-frame");
    if (activity.pdf) {
      pdfButton.hidden = false;
      frame.src = activity.pdf;
    } else {
      pdfButton.hidden = true;
      this.panes.pdfPane.hidden = true;
    }

    const download = this.query<HTMLAnchorElement>(".download-button");
    download.href = this.api.archiveUrl(activity.id);

    await this.refreshFileBrowser();
    await this.openTheory(this.theoryName);
  }

  async refreshFileBrowser(): Promise<void> {
    if (!this.activity) return;
    const browser = this.query(".file-browser");
    const docs = await this.api.listTheories(this.activity.id);
    browser.replaceChildren(
      ...docs.map((doc) => {
        const entry = document.createElement("button");
        entry.type = "button";
        entry.className = "file-entry";
        entry.dataset.name = doc.name;
        entry.textContent = doc.name;
        entry.addEventListener("click", () => void this.openTheory(doc.name));
        return entry;
      }),
    );
  }

  // -- documents ------------------------------------------------------------

  async openTheory(name: string): Promise<void> {
    if (!this.activity) return;
    this.theoryName = name;
    const local = this.buffers.load(this.activity.id, name);
    let serverContent: string | null = null;
    try {
      serverContent = (await this.api.loadTheory(this.activity.id, name)).content;
    } catch {
      serverContent = null; // not saved yet
    }
    // prefer the local snapshot when it is the newer, unsaved edit
    if (local && local.content !== serverContent) {
      this.editor.setValue(local.content, false);
      this.editor.dirty = true;
      this.editor.setCursor(local.cursor);
    } else {
      this.editor.setValue(serverContent ?? "", true);
    }
  }

  /** Persist the buffer to the server; false (and a banner) on failure. */
  async saveCurrent(): Promise<boolean> {
    if (!this.activity) return true;
    this.persistBuffer();
    try {
      await this.api.saveTheory(this.activity.id, this.theoryName, this.editor.value);
      this.editor.dirty = false;
      return true;
    } catch (error) {
      this.showBanner(`save failed: ${(error as Error).message}`);
      return false;
    }
  }

  private persistBuffer(): void {
    if (!this.activity) return;
    this.buffers.save(
      this.activity.id,
      this.theoryName,
      this.editor.value,
      this.editor.cursor.start,
    );
  }

  insertRule(name: string): void {
    this.editor.insertAtCursor(name);
    this.editor.textarea.focus();
  }

  // -- checking ------------------------------------------------------------

  /** Send the buffer for checking; a second request queues, never duplicates. */
  async runCheck(): Promise<void> {
    if (this.activeCheckId) {
      this.runQueued = true;
      return;
    }
    if (!this.activity) return;
    this.hideBanner();
    const saved = await this.saveCurrent();
    if (!saved) return; // buffer intact, error already visible
    let checkId: string;
    try {
      const out = await this.api.submitCheck(
        this.activity.id,
        [this.theoryName],
        this.linterEnabled,
      );
      checkId = out.check_id;
    } catch (error) {
      this.showBanner(`check failed to start: ${(error as Error).message}`);
      return;
    }
    this.activeCheckId = checkId;
    this.setStatus("checking…");
  }

  private handleChannelMessage(message: ChannelMessage): void {
    if (message.type === "progress" && message.check_id === this.activeCheckId) {
      this.setStatus(`⏳ ${message.text}`);
    } else if (message.type === "result" && message.check_id === this.activeCheckId) {
      this.finishCheck(message);
    }
  }

  private async pollResult(checkId: string): Promise<void> {
    for (let attempt = 0; attempt < 100; attempt += 1) {
      const record = await this.api.fetchCheck(checkId);
      if (record.status === "done" && record.result) {
        this.finishCheck({ check_id: checkId, ...record.result });
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }

  private finishCheck(result: { check_id: string } & CheckResult): void {
    this.activeCheckId = null;
    const diagnostics: Diagnostic[] = result.diagnostics;
    const errors = diagnostics.filter((d) => d.severity === "error").length;
    const summary =
      result.verdict === "no-changes"
        ? "no changes since the last check"
        : errors === 0
          ? `✓ ${result.verdict}`
          : `${result.verdict}: ${errors} error(s)`;
    this.output.render(diagnostics, summary);
    // popups at the failure positions; the cursor must not move
    this.editor.setDiagnostics(diagnostics);
    this.setStatus(summary);
    if (this.runQueued) {
      this.runQueued = false;
      void this.runCheck();
    }
  }

  private scheduleLint(): void {
    if (!this.activity) return;
    if (this.lintTimer) clearTimeout(this.lintTimer);
    this.lintTimer = setTimeout(async () => {
      if (!this.activity || !this.linterEnabled) return;
      try {
        const { diagnostics } = await this.api.lint(this.activity.id, this.editor.value);
        this.editor.setDiagnostics(diagnostics);
      } catch {
        // lint feedback is best-effort; checking still works
      }
    }, this.lintDebounceMs);
  }

  // -- chrome ------------------------------------------------------------

  setStatus(text: string): void {
    this.query(".status-line").textContent = text;
  }

  showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.hidden = false;
  }

  hideBanner(): void {
    this.banner.hidden = true;
  }
}
