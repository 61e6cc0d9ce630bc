import { describe, expect, it } from "vitest";

import { cellText, renderTableHtml, sortBy, tableModel } from "../src/resultsTable";
import type { ResultRelation } from "../src/types";
import resultFixture from "./fixtures/weekend-sales-result.json";

const relation = (resultFixture as { result: ResultRelation }).result;

describe("results table", () => {
  it("presents cells as text, nulls blank, decimals verbatim", () => {
    expect(cellText(null)).toBe("");
    expect(cellText("768.35")).toBe("768.35");
    expect(cellText(6)).toBe("6");
    expect(cellText(false)).toBe("false");
  });

  it("renders a header cell per column and a row per result row", () => {
    const html = renderTableHtml(tableModel(relation));
    for (const column of relation.columns) expect(html).toContain(column);
    expect(html.match(/<tr>/g)!.length).toBe(relation.rows.length + 1);
  });

  it("sorts numerically on decimal columns and toggles direction", () => {
    const model = tableModel(relation);
    const priceColumn = relation.columns.indexOf("sum(TicketPrice)");
    const ascending = sortBy(model, priceColumn);
    const values = ascending.rows.map((r) => Number(r[priceColumn]));
    expect(values).toEqual([...values].sort((a, b) => a - b));
    const descending = sortBy(ascending, priceColumn);
    expect(descending.rows.map((r) => Number(r[priceColumn]))).toEqual(
      [...values].sort((a, b) => b - a),
    );
    expect(descending.sort).toEqual({ column: priceColumn, descending: true });
  });

  it("does not mutate the source rows when sorting", () => {
    const model = tableModel(relation);
    const before = [...model.rows];
    sortBy(model, 0);
    expect(model.rows).toEqual(before);
  });
});
