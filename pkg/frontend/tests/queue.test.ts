import { describe, expect, it } from "vitest";

import { MemoryStorage, OfflineQueue } from "../src/queue.js";
import type { Answer } from "../src/types.js";

const answer = (qid: string, choice = "yes", worker = "w1"): Answer => ({
  question_id: qid,
  worker_id: worker,
  choice,
});

describe("OfflineQueue", () => {
  it("persists across instances sharing a storage", () => {
    const storage = new MemoryStorage();
    const q1 = new OfflineQueue(storage);
    q1.enqueue(answer("a"));
    q1.enqueue(answer("b"));
    const q2 = new OfflineQueue(storage);
    expect(q2.items().map((a) => a.question_id)).toEqual(["a", "b"]);
  });

  it("re-answering the same question replaces the queued entry", () => {
    const q = new OfflineQueue(new MemoryStorage());
    q.enqueue(answer("a", "yes"));
    q.enqueue(answer("a", "no"));
    expect(q.size()).toBe(1);
    expect(q.items()[0].choice).toBe("no");
    // same question from another worker is a distinct key
    q.enqueue(answer("a", "yes", "w2"));
    expect(q.size()).toBe(2);
  });

  it("drains in order and clears on success", async () => {
    const q = new OfflineQueue(new MemoryStorage());
    q.enqueue(answer("a"));
    q.enqueue(answer("b"));
    const sent: string[] = [];
    const n = await q.drain(async (a) => {
      sent.push(a.question_id);
    });
    expect(n).toBe(2);
    expect(sent).toEqual(["a", "b"]);
    expect(q.size()).toBe(0);
  });

  it("stops at the first failure and keeps the remainder", async () => {
    const q = new OfflineQueue(new MemoryStorage());
    q.enqueue(answer("a"));
    q.enqueue(answer("b"));
    q.enqueue(answer("c"));
    let calls = 0;
    await expect(
      q.drain(async (a) => {
        calls += 1;
        if (a.question_id === "b") throw new TypeError("network down");
      }),
    ).rejects.toThrow("network down");
    expect(calls).toBe(2);
    expect(q.items().map((a) => a.question_id)).toEqual(["b", "c"]);
  });

  it("a delivered answer is removed even if a later one fails", async () => {
    const q = new OfflineQueue(new MemoryStorage());
    q.enqueue(answer("a"));
    q.enqueue(answer("b"));
    await expect(
      q.drain(async (a) => {
        if (a.question_id === "b") throw new TypeError("down");
      }),
    ).rejects.toThrow();
    // replay after reconnect must not resend "a"
    const sent: string[] = [];
    await q.drain(async (a) => {
      sent.push(a.question_id);
    });
    expect(sent).toEqual(["b"]);
  });

  it("tolerates corrupted storage", () => {
    const storage = new MemoryStorage();
    storage.setItem("senscommon.pending", "{not json");
    const q = new OfflineQueue(storage);
    expect(q.items()).toEqual([]);
  });
});
