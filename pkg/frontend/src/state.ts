// Review-flow state machine, DOM-free so it is testable headless.
//
// The session walks the annotator's unlabeled queue. A submission keeps
// its pending label (with a fixed request id) until the service
// acknowledges it: a network failure flips the session into a retry
// state and resubmitting reuses the same request id, so flaky clicks and
// reconnects cannot double-journal. Payload hashes are recorded when an
// entry is loaded so renderers can prove they did not mutate the code.

import { ApiError, EntryPacket, KappaStats, ReviewApi, newRequestId } from "./api.js";
import { fnv1a } from "./diff.js";

export type Phase = "loading" | "reviewing" | "retry" | "done" | "error";

export interface PendingLabel {
  entryId: string;
  relevant: boolean;
  note: string;
  requestId: string;
}

export interface Progress {
  assigned: number;
  labeled: number;
  relevantCount: number;
}

export interface PayloadHashes {
  origin: string;
  fix: string;
}

export class ReviewSession {
  phase: Phase = "loading";
  current: EntryPacket | null = null;
  pending: PendingLabel | null = null;
  progress: Progress = { assigned: 0, labeled: 0, relevantCount: 0 };
  lastError = "";
  hashes: PayloadHashes | null = null;
  private queue: EntryPacket[] = [];

  constructor(private readonly api: ReviewApi) {}

  async start(): Promise<void> {
    this.phase = "loading";
    try {
      const page = await this.api.listEntries(0, 200, true);
      this.progress.assigned = page.assigned;
      this.progress.labeled = page.labeled;
      this.queue = page.entries.filter((e) => !e.my_label);
      this.advance();
    } catch (err) {
      this.fail(err);
    }
  }

  private advance(): void {
    this.pending = null;
    const next = this.queue.shift() ?? null;
    this.current = next;
    if (next === null) {
      this.phase = "done";
      this.hashes = null;
      return;
    }
    this.hashes = { origin: fnv1a(next.origin_code), fix: fnv1a(next.accepted_fix) };
    this.phase = "reviewing";
  }

  /** Defer the current entry to the end of the local queue, unlabeled. */
  skip(): void {
    if (this.current === null || this.phase !== "reviewing") return;
    this.queue.push(this.current);
    this.advance();
  }

  async label(relevant: boolean, note = ""): Promise<void> {
    if (this.current === null || this.phase === "retry") return;
    this.pending = {
      entryId: this.current.id,
      relevant,
      note,
      requestId: newRequestId(),
    };
    await this.flushPending();
  }

  /** Resubmit the pending label after a connectivity failure. */
  async retry(): Promise<void> {
    if (this.pending === null) return;
    await this.flushPending();
  }

  private async flushPending(): Promise<void> {
    const pending = this.pending;
    if (pending === null) return;
    try {
      await this.api.submitLabel(
        pending.entryId,
        pending.relevant,
        pending.note,
        pending.requestId
      );
      this.progress.labeled += 1;
      if (pending.relevant) this.progress.relevantCount += 1;
      this.advance();
    } catch (err) {
      if (err instanceof ApiError) {
        // a definite server verdict: surface it, drop the pending label
        this.fail(err);
        this.pending = null;
        return;
      }
      // connectivity problem: keep the pending label for retry
      this.phase = "retry";
      this.lastError = err instanceof Error ? err.message : String(err);
    }
  }

  /** Fraction of this annotator's labels marked relevant, for the
   * completion screen's retention preview. */
  retentionPreview(): number | null {
    if (this.progress.labeled === 0) return null;
    return this.progress.relevantCount / this.progress.labeled;
  }

  private fail(err: unknown): void {
    this.phase = "error";
    this.lastError = err instanceof Error ? err.message : String(err);
  }
}

export class KappaPanel {
  stats: KappaStats | null = null;

  constructor(private readonly api: ReviewApi) {}

  async refresh(): Promise<KappaStats | null> {
    try {
      this.stats = await this.api.kappa();
    } catch {
      this.stats = null;
    }
    return this.stats;
  }

  display(): string {
    if (this.stats === null || this.stats.kappa === null) {
      return "kappa: n/a";
    }
    return `kappa: ${this.stats.kappa.toFixed(3)} (n=${this.stats.n})`;
  }
}
