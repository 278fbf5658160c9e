import type { Answer, FetchLike, Question, Stats } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly allowed?: string[]) {
    super(message);
    this.name = "ApiError";
  }
}

/** What a session needs from the service; ApiClient is the HTTP implementation. */
export interface AnnotationApi {
  nextBatch(worker: string, n: number): Promise<Question[]>;
  submit(answer: Answer): Promise<{ ok: boolean; response_count: number }>;
  stats(): Promise<Stats>;
}

/** Typed client for the three annotation endpoints. */
export class ApiClient implements AnnotationApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(body.error ?? `HTTP ${resp.status}`, resp.status, body.allowed);
    }
    return body as T;
  }

  async nextBatch(worker: string, n: number): Promise<Question[]> {
    const params = new URLSearchParams({ worker, n: String(n) });
    const body = await this.request<{ questions: Question[] }>(
      `/api/questions/next?${params}`,
    );
    return body.questions;
  }

  async submit(answer: Answer): Promise<{ ok: boolean; response_count: number }> {
    return this.request(`/api/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(answer),
    });
  }

  async stats(): Promise<Stats> {
    return this.request<Stats>(`/api/stats`);
  }
}
