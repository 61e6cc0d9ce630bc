// Client for the read-only HTTP API. Responses are matched to requests
// by id so concurrent in-flight queries cannot clobber newer results.

import type { ApiErrorBody, ModelGraph, QueryBody, ResultRelation } from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

type Fetcher = (url: string, init?: RequestInit) => Promise<Response>;

async function unwrap<T>(response: Response, field: string): Promise<T> {
  const payload = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, payload.error ?? { code: "unknown", message: response.statusText });
  }
  return payload[field] as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetcher: Fetcher = (url, init) => fetch(url, init),
  ) {}

  model(): Promise<ModelGraph> {
    return this.fetcher(`${this.baseUrl}/model`).then((r) => unwrap<ModelGraph>(r, "graph"));
  }

  members(level: string): Promise<ResultRelation> {
    return this.fetcher(`${this.baseUrl}/levels/${encodeURIComponent(level)}/members`).then((r) =>
      unwrap<ResultRelation>(r, "members"),
    );
  }

  query(body: QueryBody): Promise<ResultRelation> {
    return this.fetcher(`${this.baseUrl}/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => unwrap<ResultRelation>(r, "result"));
  }
}

/** Keeps only the latest query relevant: stale responses are dropped. */
export class LatestWins {
  private current = 0;

  next(): number {
    return ++this.current;
  }

  isCurrent(id: number): boolean {
    return id === this.current;
  }
}
