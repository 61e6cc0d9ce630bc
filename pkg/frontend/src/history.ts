// Session query history so the analyst can revisit and refine.

import type { QueryBody } from "./types";

export interface HistoryEntry {
  body: QueryBody;
  summary: string;
  rowCount: number;
  at: number;
}

const LIMIT = 50;

export function summarize(body: QueryBody): string {
  const fn = body.aggregation.measure
    ? `${body.aggregation.function}(${body.aggregation.measure})`
    : `${body.aggregation.function}()`;
  const rollups = Object.entries(body.rollups)
    .map(([dimension, level]) => `${dimension}→${level}`)
    .join(", ");
  const conditions = body.conditions.length ? ` | ${body.conditions.length} condition(s)` : "";
  return `${fn} from ${body.factRelationship}${rollups ? ` by ${rollups}` : ""}${conditions}`;
}

export class QueryHistory {
  private entries: HistoryEntry[] = [];

  push(body: QueryBody, rowCount: number, at: number = Date.now()): HistoryEntry {
    const entry = { body, summary: summarize(body), rowCount, at };
    this.entries = [entry, ...this.entries].slice(0, LIMIT);
    return entry;
  }

  list(): HistoryEntry[] {
    return [...this.entries];
  }

  get(index: number): HistoryEntry | undefined {
    return this.entries[index];
  }
}
