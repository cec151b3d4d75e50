/** Typed client for the audit service. Transient network failures on reads
 * retry with backoff; HTTP-level errors surface as ApiError immediately. */

import type {
  DecisionReply,
  HealthInfo,
  ItemDetail,
  ReviewItem,
  RoundSummary,
  SpanEdit,
  SweepPoint,
  Verdict,
  VersionInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly code: string,
  ) {
    super(message);
  }

  get isStaleItem(): boolean {
    return this.code === "stale-item";
  }
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
    private readonly token: string | null = null,
    private readonly retryDelaysMs: number[] = [150, 600],
  ) {}

  private headers(json: boolean): Record<string, string> {
    const out: Record<string, string> = {};
    if (json) out["Content-Type"] = "application/json";
    if (this.token) out["Authorization"] = `Bearer ${this.token}`;
    return out;
  }

  private async parse<T>(resp: Response): Promise<T> {
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const code = typeof body?.error === "string" ? body.error : "http-error";
      const message =
        typeof body?.message === "string" ? body.message : `HTTP ${resp.status}`;
      throw new ApiError(message, resp.status, code);
    }
    return body as T;
  }

  /** GET with backoff on network failure only (server answers are final). */
  private async get<T>(path: string): Promise<T> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retryDelaysMs.length; attempt++) {
      try {
        const resp = await this.fetchFn(this.base + path, {
          headers: this.headers(false),
        });
        return await this.parse<T>(resp);
      } catch (err) {
        if (err instanceof ApiError) throw err;
        lastError = err;
        if (attempt < this.retryDelaysMs.length) {
          await sleep(this.retryDelaysMs[attempt]);
        }
      }
    }
    throw lastError;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(payload ?? {}),
    });
    return this.parse<T>(resp);
  }

  health(): Promise<HealthInfo> {
    return this.get("/api/health");
  }

  async items(status: "pending" | "closed" | "all" = "pending"): Promise<ReviewItem[]> {
    const reply = await this.get<{ items: ReviewItem[] }>(
      `/api/items?status=${status}`,
    );
    return reply.items;
  }

  itemDetail(itemId: string): Promise<ItemDetail> {
    return this.get(`/api/items/${encodeURIComponent(itemId)}`);
  }

  claim(itemId: string, reviewerId: string): Promise<ReviewItem> {
    return this.post(`/api/items/${encodeURIComponent(itemId)}/claim`, {
      reviewer_id: reviewerId,
    });
  }

  decide(
    itemId: string,
    verdict: Verdict,
    reviewerId: string,
    edits?: SpanEdit[],
  ): Promise<DecisionReply> {
    const payload: Record<string, unknown> = { verdict, reviewer_id: reviewerId };
    if (edits !== undefined) payload.edits = edits;
    return this.post(`/api/items/${encodeURIComponent(itemId)}/decision`, payload);
  }

  documentText(docId: string): Promise<{ doc_id: string; text: string }> {
    return this.get(`/api/documents/${encodeURIComponent(docId)}`);
  }

  triggerRound(): Promise<{ round: number; status: string }> {
    return this.post("/api/rounds", {});
  }

  async rounds(): Promise<RoundSummary[]> {
    const reply = await this.get<{ rounds: RoundSummary[] }>("/api/rounds");
    return reply.rounds;
  }

  async versions(): Promise<VersionInfo[]> {
    const reply = await this.get<{ versions: VersionInfo[] }>("/api/versions");
    return reply.versions;
  }

  async sweep(round?: number): Promise<SweepPoint[]> {
    const suffix = round === undefined ? "" : `?round=${round}`;
    const reply = await this.get<{ series: SweepPoint[] }>(`/api/sweep${suffix}`);
    return reply.series;
  }

  converged(): Promise<{ converged: boolean }> {
    return this.get("/api/converged");
  }
}
