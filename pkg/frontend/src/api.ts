// REST client. The UI never computes statistics or distances itself;
// every number rendered comes out of one of these responses.

import type {
  EvaluateVariantsResponse,
  QueryJson,
  SearchResponse,
  SpaceDetail,
  SpaceSummary,
  StatsResponse,
  SuggestIntervalsResponse,
} from "./types";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** A response that arrived after a newer request for the same slot. */
export interface MaybeStale<T> {
  stale: boolean;
  data: T;
}

export class ApiClient {
  private searchSeq = 0;

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    const text = await response.text();
    let parsed: unknown;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(response.status, `unparseable response from ${path}`);
    }
    if (!response.ok) {
      const message =
        parsed && typeof parsed === "object" && "error" in parsed
          ? String((parsed as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return parsed as T;
  }

  listSpaces(): Promise<SpaceSummary[]> {
    return this.request("GET", "/spaces");
  }

  getSpace(id: string | number): Promise<SpaceDetail> {
    return this.request("GET", `/spaces/${encodeURIComponent(String(id))}`);
  }

  /**
   * Runs a search; a response superseded by a newer search resolves with
   * `stale: true` so the caller can discard it without racing the UI.
   */
  async search(id: string | number, query: QueryJson): Promise<MaybeStale<SearchResponse>> {
    const seq = ++this.searchSeq;
    const data = await this.request<SearchResponse>(
      "POST",
      `/spaces/${encodeURIComponent(String(id))}/search`,
      query,
    );
    return { stale: seq !== this.searchSeq, data };
  }

  stats(id: string | number, body: unknown): Promise<StatsResponse> {
    return this.request("POST", `/spaces/${encodeURIComponent(String(id))}/stats`, body);
  }

  suggestIntervals(id: string | number, body: unknown): Promise<SuggestIntervalsResponse> {
    return this.request(
      "POST",
      `/spaces/${encodeURIComponent(String(id))}/suggest-intervals`,
      body,
    );
  }

  evaluateVariants(id: string | number, body: unknown): Promise<EvaluateVariantsResponse> {
    return this.request(
      "POST",
      `/spaces/${encodeURIComponent(String(id))}/evaluate-variants`,
      body,
    );
  }
}
