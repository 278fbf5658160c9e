import { ApiClient } from "./api.js";
import { highlightContext } from "./highlight.js";
import { keyLabels, keymapFor } from "./keymap.js";
import { AnnotationSession } from "./session.js";
import type { Question, Stats } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient("");
let session: AnnotationSession | null = null;

function renderQuestion(q: Question | null, position: number, batchSize: number): void {
  const card = $("card");
  const options = $("options");
  options.innerHTML = "";
  if (!q) {
    $("prompt").textContent = session?.exhausted
      ? "All served questions answered. Thank you!"
      : "Waiting for questions…";
    $("context").innerHTML = "";
    $("batch-pos").textContent = "";
    card.classList.toggle("done", session?.exhausted ?? false);
    return;
  }
  card.classList.remove("done");
  $("prompt").textContent = q.prompt;
  $("context").innerHTML = highlightContext(q);
  $("batch-pos").textContent = `question ${position + 1} of ${batchSize} in this batch`;
  const labels = keyLabels(q.options);
  for (const opt of q.options) {
    const btn = document.createElement("button");
    btn.className = "option";
    btn.dataset.choice = opt;
    btn.innerHTML = `<kbd>${labels[opt]}</kbd> ${opt}`;
    btn.addEventListener("click", () => void answer(opt));
    options.appendChild(btn);
  }
}

async function answer(choice: string): Promise<void> {
  if (!session || !session.current()) return;
  const buttons = document.querySelectorAll<HTMLButtonElement>("button.option");
  buttons.forEach((b) => (b.disabled = true)); // one selectable at a time
  try {
    await session.answer(choice);
  } finally {
    buttons.forEach((b) => (b.disabled = false));
  }
}

function renderProgress(submitted: number, queued: number): void {
  $("submitted-count").textContent = String(submitted);
  $("queued-count").textContent = String(queued);
  $("queued-note").style.display = queued > 0 ? "inline" : "none";
}

function renderOffline(offline: boolean): void {
  $("offline-banner").style.display = offline ? "block" : "none";
}

function renderStats(stats: Stats): void {
  const rows = Object.entries(stats.relations).map(([rel, s]) => {
    const kappa = s.kappa === null ? "n/a" : s.kappa.toFixed(3);
    return `<tr><td>${rel}</td><td>${s.fully_answered}/${s.questions}</td><td>${kappa}</td></tr>`;
  });
  $("stats-body").innerHTML = rows.join("");
  $("total-responses").textContent = String(stats.total_responses);
}

async function start(): Promise<void> {
  const worker = ($("worker-input") as HTMLInputElement).value.trim();
  if (!worker) return;
  localStorage.setItem("senscommon.worker", worker);
  $("login").style.display = "none";
  $("workbench").style.display = "block";
  $("worker-name").textContent = worker;

  session = new AnnotationSession(api, worker, {
    batchSize: 10,
    storage: localStorage,
    events: {
      onQuestion: renderQuestion,
      onProgress: renderProgress,
      onOffline: renderOffline,
      onStats: renderStats,
    },
  });
  await session.start();
  await session.refreshStats();
  setInterval(() => void session?.refreshStats(), 5000);
  setInterval(() => void session?.retryPending(), 3000);
}

function onKeydown(event: KeyboardEvent): void {
  if (!session) return;
  const q = session.current();
  if (!q) return;
  if (event.target instanceof HTMLInputElement) return;
  const choice = keymapFor(q.options)[event.key.toLowerCase()];
  if (choice) {
    event.preventDefault();
    void answer(choice);
  }
}

window.addEventListener("DOMContentLoaded", () => {
  const saved = localStorage.getItem("senscommon.worker");
  if (saved) ($("worker-input") as HTMLInputElement).value = saved;
  $("start-button").addEventListener("click", () => void start());
  ($("worker-input") as HTMLInputElement).addEventListener("keydown", (e) => {
    if (e.key === "Enter") void start();
  });
  window.addEventListener("keydown", onKeydown);
});
