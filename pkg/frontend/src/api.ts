import type {
  BaselineResponse,
  PoliciesResponse,
  PredictResponse,
  SearchRequest,
  SearchResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`service error ${status}: ${detail}`);
  }
}

/** Thin typed client over the service endpoints; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  getPolicies(): Promise<PoliciesResponse> {
    return this.request<PoliciesResponse>("/policies");
  }

  getBaseline(): Promise<BaselineResponse> {
    return this.request<BaselineResponse>("/baseline");
  }

  predict(policy: Record<string, number>): Promise<PredictResponse> {
    return this.request<PredictResponse>("/predict", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ policy }),
    });
  }

  search(req: SearchRequest): Promise<SearchResponse> {
    return this.request<SearchResponse>("/search", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
