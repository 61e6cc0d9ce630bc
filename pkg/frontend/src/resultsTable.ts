// Result rendering: a sortable table model over the service's
// {columns, types, rows} relation, plus an HTML string renderer.

import type { Cell, ResultRelation } from "./types";

export interface TableModel {
  columns: string[];
  types: string[];
  rows: Cell[][];
  sort: { column: number; descending: boolean } | null;
}

export function tableModel(result: ResultRelation): TableModel {
  return { columns: result.columns, types: result.types, rows: result.rows, sort: null };
}

export function cellText(value: Cell): string {
  if (value === null) return "";
  if (typeof value === "boolean") return value ? "true" : "false";
  return String(value);
}

function comparable(value: Cell, type: string): number | string {
  if (value === null) return Number.NEGATIVE_INFINITY;
  if (type === "integer" || type === "decimal") return Number(value);
  if (typeof value === "boolean") return value ? 1 : 0;
  return String(value);
}

/** Click-to-sort: first click ascending, second descending. */
export function sortBy(model: TableModel, column: number): TableModel {
  const descending = model.sort?.column === column ? !model.sort.descending : false;
  const type = model.types[column] ?? "string";
  const rows = [...model.rows].sort((a, b) => {
    const left = comparable(a[column], type);
    const right = comparable(b[column], type);
    const order = left < right ? -1 : left > right ? 1 : 0;
    return descending ? -order : order;
  });
  return { ...model, rows, sort: { column, descending } };
}

export function renderTableHtml(model: TableModel): string {
  const arrow = (i: number) =>
    model.sort?.column === i ? (model.sort.descending ? " ▾" : " ▴") : "";
  const head = model.columns
    .map((c, i) => `<th data-column="${i}">${escapeHtml(c)}${arrow(i)}</th>`)
    .join("");
  const body = model.rows
    .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(cellText(cell))}</td>`).join("")}</tr>`)
    .join("\n");
  return `<table class="results"><thead><tr>${head}</tr></thead><tbody>\n${body}\n</tbody></table>`;
}

export function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}
