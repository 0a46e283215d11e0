import type { EmotionPrediction, EmotionLabel, ReviewReport, SessionRecord } from "./types.js";

// Browser-local mirror of recent backend state. The backend store is
// authoritative: everything here is rebuildable from GET /api/sessions and
// is reconciled (dropped) whenever the backend no longer knows an entry.

const NS = "mindmirror.v1.";

const KEY_RECORDS = NS + "records";
const KEY_REPORT = NS + "lastReport";
const KEY_PENDING = NS + "pendingCheck";

/** State-check result handed off to the reflection page. */
export interface PendingCheck {
  confirmed_state: EmotionLabel;
  detected_emotion?: EmotionPrediction;
}

export class SessionCache {
  constructor(private storage: Storage = window.localStorage) {}

  private read<T>(key: string): T | null {
    const raw = this.storage.getItem(key);
    if (raw === null) return null;
    try {
      return JSON.parse(raw) as T;
    } catch {
      this.storage.removeItem(key);
      return null;
    }
  }

  cachedRecords(): SessionRecord[] {
    return this.read<SessionRecord[]>(KEY_RECORDS) ?? [];
  }

  rememberRecords(records: SessionRecord[]): void {
    this.storage.setItem(KEY_RECORDS, JSON.stringify(records));
  }

  /** Keep only entries the backend still reports; returns the kept list. */
  reconcile(backendRecords: SessionRecord[]): SessionRecord[] {
    this.rememberRecords(backendRecords);
    return backendRecords;
  }

  dropRecord(id: string): void {
    this.rememberRecords(this.cachedRecords().filter((r) => r.id !== id));
  }

  lastReport(): ReviewReport | null {
    return this.read<ReviewReport>(KEY_REPORT);
  }

  rememberReport(report: ReviewReport): void {
    this.storage.setItem(KEY_REPORT, JSON.stringify(report));
  }

  pendingCheck(): PendingCheck | null {
    return this.read<PendingCheck>(KEY_PENDING);
  }

  setPendingCheck(pending: PendingCheck | null): void {
    if (pending === null) {
      this.storage.removeItem(KEY_PENDING);
    } else {
      this.storage.setItem(KEY_PENDING, JSON.stringify(pending));
    }
  }

  /** Every key this app owns carries the mindmirror.v1. namespace. */
  ownKeys(): string[] {
    const keys: string[] = [];
    for (let i = 0; i < this.storage.length; i += 1) {
      const key = this.storage.key(i);
      if (key !== null && key.startsWith(NS)) keys.push(key);
    }
    return keys;
  }
}
