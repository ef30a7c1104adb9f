// Typed client for the backend HTTP routes and the realtime channel.
// fetch and WebSocket factories are injectable so tests can script them.

export interface SourceRange {
  line: number;
  col: number;
  end_line: number;
  end_col: number;
}

export interface Diagnostic {
  source: "linter" | "structure" | "prover";
  severity: "error" | "warning" | "info";
  message: string;
  range: SourceRange | null;
  rule_id: string | null;
  theory_name: string;
}

export interface RuleEntry {
  name: string;
  statement: string;
}

export interface RuleGroup {
  group: string;
  entries: RuleEntry[];
}

export interface SymbolKey {
  glyph: string;
  insert: string;
}

export interface ActivityConfig {
  id: string;
  title: string;
  exercises: { pattern: string; title: string }[];
  rule_reference: RuleGroup[];
  symbol_keyboard: SymbolKey[];
  pdf: string | null;
  linter_toggle_allowed: boolean;
}

export interface TheoryDocument {
  name: string;
  content: string;
  activity_id: string;
  modified_ms: number;
}

export interface CheckResult {
  verdict: string;
  diagnostics: Diagnostic[];
  durations: { server_handling: number; prover_wait: number };
  checked: string[];
  skipped: string[];
  note?: string;
}

export type ChannelMessage =
  | { type: "hello"; user_id: string }
  | { type: "progress"; check_id: string; text: string; theory_name: string }
  | ({ type: "result"; check_id: string } & CheckResult)
  | { type: "pong" };

export interface User {
  id: string;
  name: string;
  role: "student" | "instructor" | "guest";
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  token = "";
  user: User | null = null;

  constructor(
    private base = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = (await response.json()).detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    if (response.status === 204) return null;
    return response.json();
  }

  async login(name: string, password: string): Promise<User> {
    const out = await this.request("POST", "/login", { name, password });
    this.token = out.token;
    this.user = out.user;
    return out.user;
  }

  async guestLogin(): Promise<User> {
    const out = await this.request("POST", "/guest");
    this.token = out.token;
    this.user = out.user;
    return out.user;
  }

  activities(): Promise<ActivityConfig[]> {
    return this.request("GET", "/activities");
  }

  activity(id: string): Promise<ActivityConfig> {
    return this.request("GET", `/activities/${encodeURIComponent(id)}`);
  }

  listTheories(activity: string): Promise<TheoryDocument[]> {
    return this.request("GET", `/theories/${encodeURIComponent(activity)}`);
  }

  loadTheory(activity: string, name: string): Promise<TheoryDocument> {
    return this.request(
      "GET",
      `/theories/${encodeURIComponent(activity)}/${encodeURIComponent(name)}`,
    );
  }

  saveTheory(activity: string, name: string, content: string): Promise<TheoryDocument> {
    return this.request(
      "PUT",
      `/theories/${encodeURIComponent(activity)}/${encodeURIComponent(name)}`,
      { content },
    );
  }

  lint(activity: string, content: string): Promise<{ diagnostics: Diagnostic[] }> {
    return this.request("POST", "/lint", { activity, content });
  }

  submitCheck(
    activity: string,
    names: string[],
    linterEnabled: boolean,
  ): Promise<{ check_id: string }> {
    return this.request("POST", "/check", {
      activity,
      names,
      linter_enabled: linterEnabled,
    });
  }

  fetchCheck(checkId: string): Promise<{ status: string; result: CheckResult | null }> {
    return this.request("GET", `/check/${encodeURIComponent(checkId)}`);
  }

  archiveUrl(activity: string): string {
    return `${this.base}/archive/${encodeURIComponent(activity)}`;
  }

  async uploadArchive(activity: string, data: Blob): Promise<{ imported: string[] }> {
    const response = await this.fetchFn(this.archiveUrl(activity), {
      method: "POST",
      headers: { Authorization: `Bearer ${this.token}` },
      body: data,
    });
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.json();
  }
}

// Realtime channel with the documented long-polling fallback: when the
// websocket drops mid-check, callers re-fetch results via fetchCheck().
export interface Channel {
  onMessage(handler: (message: ChannelMessage) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export function openChannel(
  token: string,
  base = "",
  socketFactory: (url: string) => WebSocket = (url) => new WebSocket(url),
): Channel {
  const scheme = base.startsWith("https") ? "wss" : "ws";
  const host = base.replace(/^https?:\/\//, "") || window.location.host;
  const socket = socketFactory(`${scheme}://${host}/ws?token=${encodeURIComponent(token)}`);
  const handlers: ((m: ChannelMessage) => void)[] = [];
  const closers: (() => void)[] = [];
  socket.addEventListener("message", (event) => {
    const message = JSON.parse((event as MessageEvent).data) as ChannelMessage;
    handlers.forEach((h) => h(message));
  });
  socket.addEventListener("close", () => closers.forEach((h) => h()));
  return {
    onMessage: (h) => handlers.push(h),
    onClose: (h) => closers.push(h),
    close: () => socket.close(),
  };
}
