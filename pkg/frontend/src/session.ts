import { ApiError, type AnnotationApi } from "./api.js";
import { MemoryStorage, OfflineQueue, type KVStorage } from "./queue.js";
import type { Answer, Question, Stats } from "./types.js";

export type SessionEvents = {
  onQuestion?: (q: Question | null, position: number, batchSize: number) => void;
  onProgress?: (submitted: number, queued: number) => void;
  onOffline?: (offline: boolean) => void;
  onStats?: (stats: Stats) => void;
};

export type SessionOptions = {
  batchSize?: number;
  storage?: KVStorage;
  events?: SessionEvents;
};

/**
 * One annotator's flow: fetch a batch, answer question by question,
 * auto-fetch the next batch on exhaustion. Failed submissions are queued
 * with an idempotency key (question id + worker id) and replayed in order
 * before anything new is sent, so no answer is lost or double-counted.
 */
export class AnnotationSession {
  readonly submitted = new Map<string, string>();
  offline = false;
  exhausted = false;
  lastStats: Stats | null = null;

  private batch: Question[] = [];
  private index = 0;
  private readonly batchSize: number;
  private readonly queue: OfflineQueue;
  private readonly events: SessionEvents;

  constructor(
    private readonly api: AnnotationApi,
    readonly worker: string,
    opts: SessionOptions = {},
  ) {
    this.batchSize = opts.batchSize ?? 10;
    this.queue = new OfflineQueue(opts.storage ?? new MemoryStorage());
    this.events = opts.events ?? {};
  }

  current(): Question | null {
    return this.index < this.batch.length ? this.batch[this.index] : null;
  }

  queued(): number {
    return this.queue.size();
  }

  async start(): Promise<void> {
    await this.retryPending();
    await this.fetchNext();
  }

  /** Submit one choice for the current card and advance. */
  async answer(choice: string): Promise<void> {
    const q = this.current();
    if (!q) throw new Error("no question to answer");
    if (!q.options.includes(choice)) {
      throw new Error(`choice ${JSON.stringify(choice)} not among ${q.options.join("/")}`);
    }
    const answer: Answer = { question_id: q.id, worker_id: this.worker, choice };
    this.submitted.set(q.id, choice);
    this.index += 1;
    try {
      if (this.queue.size() > 0) {
        await this.queue.drain((a) => this.api.submit(a));
      }
      await this.api.submit(answer);
      this.setOffline(false);
    } catch (err) {
      if (err instanceof ApiError) throw err; // server rejected: a real bug
      this.queue.enqueue(answer);
      this.setOffline(true);
    }
    this.events.onProgress?.(this.submitted.size, this.queue.size());
    if (this.index >= this.batch.length) {
      await this.fetchNext();
    } else {
      this.events.onQuestion?.(this.current(), this.index, this.batch.length);
    }
  }

  /** Replay queued answers (reconnect path). */
  async retryPending(): Promise<number> {
    if (this.queue.size() === 0) return 0;
    try {
      const delivered = await this.queue.drain((a) => this.api.submit(a));
      this.setOffline(false);
      this.events.onProgress?.(this.submitted.size, this.queue.size());
      return delivered;
    } catch (err) {
      if (err instanceof ApiError) throw err;
      this.setOffline(true);
      return 0;
    }
  }

  async refreshStats(): Promise<Stats | null> {
    try {
      this.lastStats = await this.api.stats();
      this.events.onStats?.(this.lastStats);
      return this.lastStats;
    } catch {
      return null;
    }
  }

  private async fetchNext(): Promise<void> {
    try {
      this.batch = await this.api.nextBatch(this.worker, this.batchSize);
      this.index = 0;
      this.exhausted = this.batch.length === 0;
      this.setOffline(false);
    } catch (err) {
      if (err instanceof ApiError) throw err;
      this.batch = [];
      this.index = 0;
      this.setOffline(true);
    }
    this.events.onQuestion?.(this.current(), this.index, this.batch.length);
  }

  private setOffline(offline: boolean): void {
    if (this.offline !== offline) {
      this.offline = offline;
      this.events.onOffline?.(offline);
    }
  }
}
