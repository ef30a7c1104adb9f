// Scripted backend double + channel for driving the app in jsdom.

import type {
  ActivityConfig,
  ApiClient,
  Channel,
  ChannelMessage,
  CheckResult,
  Diagnostic,
  TheoryDocument,
  User,
} from "../src/api";

export function demoActivity(overrides: Partial<ActivityConfig> = {}): ActivityConfig {
  return {
    id: "demo",
    title: "Demo activity",
    exercises: [{ pattern: "Ex*", title: "Exercises" }],
    rule_reference: [
      {
        group: "Propositional",
        entries: [
          { name: "conjI", statement: "A ⟹ B ⟹ A ∧ B" },
          { name: "impI", statement: "(A ⟹ B) ⟹ A ⟶ B" },
        ],
      },
    ],
    symbol_keyboard: [
      { glyph: "∧", insert: "\\<and>" },
      { glyph: "⟹", insert: "\\<Longrightarrow>" },
      { glyph: "¬", insert: "¬" }, // direct-unicode configuration
    ],
    pdf: null,
    linter_toggle_allowed: true,
    ...overrides,
  };
}

export class FakeChannel implements Channel {
  private handlers: ((m: ChannelMessage) => void)[] = [];
  private closers: (() => void)[] = [];

  onMessage(handler: (m: ChannelMessage) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    this.closers.forEach((h) => h());
  }

  push(message: ChannelMessage): void {
    this.handlers.forEach((h) => h(message));
  }
}

export class FakeApi {
  token = "tok";
  user: User | null = null;
  offline = false;
  lintDiagnostics: Diagnostic[] = [];
  checkCalls: { activity: string; names: string[]; linter_enabled: boolean }[] = [];
  saveCalls = 0;
  private checkCounter = 0;
  readonly docs = new Map<string, string>();
  activitiesList: ActivityConfig[] = [demoActivity()];
  results = new Map<string, { status: string; result: CheckResult | null }>();

  private key(activity: string, name: string): string {
    return `${activity}/${name}`;
  }

  async guestLogin(): Promise<User> {
    this.user = { id: "guest-1", name: "guest-1", role: "guest" };
    return this.user;
  }

  async login(name: string, _password: string): Promise<User> {
    this.user = { id: `u-${name}`, name, role: "student" };
    return this.user;
  }

  async activities(): Promise<ActivityConfig[]> {
    return this.activitiesList;
  }

  async activity(id: string): Promise<ActivityConfig> {
    const found = this.activitiesList.find((a) => a.id === id);
    if (!found) throw new Error(`no activity ${id}`);
    return found;
  }

  async listTheories(activity: string): Promise<TheoryDocument[]> {
    return [...this.docs.entries()]
      .filter(([k]) => k.startsWith(`${activity}/`))
      .map(([k, content]) => ({
        name: k.split("/")[1],
        content,
        activity_id: activity,
        modified_ms: 0,
      }));
  }

  async loadTheory(activity: string, name: string): Promise<TheoryDocument> {
    const content = this.docs.get(this.key(activity, name));
    if (content === undefined) throw new Error("404 no such theory");
    return { name, content, activity_id: activity, modified_ms: 0 };
  }

  async saveTheory(activity: string, name: string, content: string): Promise<TheoryDocument> {
    if (this.offline) throw new Error("network unreachable");
    this.saveCalls += 1;
    this.docs.set(this.key(activity, name), content);
    return { name, content, activity_id: activity, modified_ms: 1 };
  }

  async lint(_activity: string, _content: string): Promise<{ diagnostics: Diagnostic[] }> {
    if (this.offline) throw new Error("network unreachable");
    return { diagnostics: this.lintDiagnostics };
  }

  async submitCheck(
    activity: string,
    names: string[],
    linter_enabled: boolean,
  ): Promise<{ check_id: string }> {
    if (this.offline) throw new Error("network unreachable");
    this.checkCalls.push({ activity, names, linter_enabled });
    this.checkCounter += 1;
    return { check_id: `C${this.checkCounter}` };
  }

  async fetchCheck(checkId: string): Promise<{ status: string; result: CheckResult | null }> {
    return this.results.get(checkId) ?? { status: "pending", result: null };
  }

  archiveUrl(activity: string): string {
    return `/archive/${activity}`;
  }

  async uploadArchive(): Promise<{ imported: string[] }> {
    return { imported: [] };
  }

  asClient(): ApiClient {
    return this as unknown as ApiClient;
  }
}

export function cleanResult(overrides: Partial<CheckResult> = {}): CheckResult {
  return {
    verdict: "finished",
    diagnostics: [],
    durations: { server_handling: 0.01, prover_wait: 0.1 },
    checked: ["Scratch"],
    skipped: [],
    ...overrides,
  };
}

export function proverError(line: number, message: string, theory = "Scratch"): Diagnostic {
  return {
    source: "prover",
    severity: "error",
    message,
    range: { line, col: 0, end_line: line, end_col: 5 },
    rule_id: null,
    theory_name: theory,
  };
}
