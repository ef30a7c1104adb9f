// Local buffer persistence: every edit is mirrored into localStorage, so a
// reload (or crash) never loses editor content. The server copy is the
// durable one; this is the safety net between explicit saves.

export interface BufferSnapshot {
  content: string;
  cursor: number;
  savedAt: number;
}

const PREFIX = "proofbench:buffer:";

export class BufferStore {
  constructor(private storage: Storage = window.localStorage) {}

  private key(activity: string, name: string): string {
    return `${PREFIX}${activity}:${name}`;
  }

  save(activity: string, name: string, content: string, cursor: number): void {
    const snapshot: BufferSnapshot = { content, cursor, savedAt: Date.now() };
    this.storage.setItem(this.key(activity, name), JSON.stringify(snapshot));
  }

  load(activity: string, name: string): BufferSnapshot | null {
    const raw = this.storage.getItem(this.key(activity, name));
    if (!raw) return null;
    try {
      return JSON.parse(raw) as BufferSnapshot;
    } catch {
      return null;
    }
  }

  drop(activity: string, name: string): void {
    this.storage.removeItem(this.key(activity, name));
  }
}
