import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, LatestWins } from "../src/api";

const jsonResponse = (status: number, body: unknown): Response =>
  new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });

describe("api client", () => {
  it("unwraps the envelope on success", async () => {
    const client = new ApiClient("", async (url) => {
      expect(url).toBe("/model");
      return jsonResponse(200, { apiVersion: 1, graph: { formatVersion: 1, nodes: [], edges: [] } });
    });
    const graph = await client.model();
    expect(graph.nodes).toEqual([]);
  });

  it("surfaces structured errors with status and code", async () => {
    const client = new ApiClient("", async () =>
      jsonResponse(409, { apiVersion: 1, error: { code: "unmapped-level", message: "no view" } }),
    );
    await expect(client.members("Weekend")).rejects.toSatisfy(
      (error: unknown) =>
        error instanceof ApiError && error.status === 409 && error.body.code === "unmapped-level",
    );
  });

  it("posts query bodies as JSON", async () => {
    const client = new ApiClient("http://x", async (url, init) => {
      expect(url).toBe("http://x/query");
      expect(init?.method).toBe("POST");
      expect(JSON.parse(String(init?.body)).factRelationship).toBe("Attends");
      return jsonResponse(200, { apiVersion: 1, result: { columns: [], types: [], rows: [] } });
    });
    const result = await client.query({
      factRelationship: "Attends",
      rollups: {},
      conditions: [],
      aggregation: { function: "count" },
    });
    expect(result.rows).toEqual([]);
  });
});

describe("latest-wins request matching", () => {
  it("keeps only the newest in-flight query relevant", () => {
    const tracker = new LatestWins();
    const first = tracker.next();
    const second = tracker.next();
    expect(tracker.isCurrent(first)).toBe(false);
    expect(tracker.isCurrent(second)).toBe(true);
    const third = tracker.next();
    expect(tracker.isCurrent(second)).toBe(false);
    expect(tracker.isCurrent(third)).toBe(true);
  });
});
