// Level-member browsing: client-side paging plus the click-to-filter
// handoff that pre-fills an equality condition in the query form.

import type { ConditionRow } from "./queryForm";
import type { Cell, ModelGraph, ResultRelation } from "./types";

export const PAGE_SIZE = 25;

export interface MemberPage {
  rows: Cell[][];
  pageIndex: number;
  pageCount: number;
}

export function pageOf(relation: ResultRelation, pageIndex: number, pageSize: number = PAGE_SIZE): MemberPage {
  const pageCount = Math.max(1, Math.ceil(relation.rows.length / pageSize));
  const clamped = Math.min(Math.max(pageIndex, 0), pageCount - 1);
  return {
    rows: relation.rows.slice(clamped * pageSize, (clamped + 1) * pageSize),
    pageIndex: clamped,
    pageCount,
  };
}

/** An equality condition pinning the clicked member by its first key property. */
export function conditionForMember(
  graph: ModelGraph,
  level: string,
  relation: ResultRelation,
  row: Cell[],
): ConditionRow | null {
  const node = graph.nodes.find((n) => n.id === `level:${level}`);
  const keyProp = node?.key?.[0];
  if (!keyProp) return null;
  const column = relation.columns.indexOf(keyProp);
  if (column < 0 || row[column] === null) return null;
  return { level, property: keyProp, operator: "equals", input: String(row[column]) };
}
