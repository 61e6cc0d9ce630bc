// The frontend acceptance check: the Olympic diagram carries all 14
// conceptual entities and the labeled S2 mapping edge, and the query
// console reproduces the weekend ticket-sales query exactly, rendering
// rows identical to the CLI's CSV output. The fixture files are
// generated by the backend (test/fixtures/regenerate.py).

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { emptyForm, toQueryBody } from "../src/queryForm";
import { renderGraphSvg } from "../src/renderSvg";
import { cellText, renderTableHtml, tableModel } from "../src/resultsTable";
import type { ModelGraph, QueryBody, ResultRelation } from "../src/types";
import { buildViewModel, entityNames } from "../src/viewModel";
import graphFixture from "./fixtures/olympic-graph.json";
import queryFixture from "./fixtures/weekend-sales-query.json";
import resultFixture from "./fixtures/weekend-sales-result.json";

const graph = graphFixture as ModelGraph;
const weekendSales = queryFixture as QueryBody;
const result = (resultFixture as { result: ResultRelation }).result;

const ENTITIES = [
  "Attends",
  "Location", "Date", "Event", "Attendee",
  "Venue", "City", "Country",
  "Day", "Weekday", "Weekend", "Week", "Month", "Year",
];

describe("acceptance: model rendering", () => {
  it("shows all 14 conceptual entities as nodes", () => {
    expect(ENTITIES.length).toBe(14);
    const names = entityNames(graph);
    for (const entity of ENTITIES) expect(names).toContain(entity);
    const vm = buildViewModel(graph);
    const svg = renderGraphSvg(vm);
    for (const entity of ENTITIES) expect(svg).toContain(`>${entity}<`);
  });

  it("labels the S2 mapping edge with its condition", () => {
    const edge = graph.edges.find((e) => e.kind === "mapping" && e.fragment === "S2");
    expect(edge).toBeDefined();
    expect(edge!.from).toBe("level:Weekend");
    expect(edge!.to).toBe("table:Day");
    expect(edge!.label).toBe("DayOfWeek ∈ {Sat,Sun}");
    const svg = renderGraphSvg(buildViewModel(graph));
    expect(svg).toContain("DayOfWeek ∈ {Sat,Sun}");
  });
});

describe("acceptance: query console", () => {
  it("reproduces the weekend ticket-sales query body exactly", () => {
    const form = emptyForm();
    form.factRelationship = "Attends";
    form.rollups = { Date: "Weekend" };
    form.conditions = [
      { level: "Venue", property: "Name", operator: "equals", input: "Whistler Olympic Park" },
    ];
    form.aggregation = { function: "sum", measure: "TicketPrice" };
    expect(toQueryBody(form, graph)).toEqual(weekendSales);
  });

  it("displays rows identical to the CLI output", () => {
    const csv = readFileSync(new URL("./fixtures/weekend-sales-cli.csv", import.meta.url), "utf-8");
    const lines = csv.split("\r\n").filter((line) => line.length > 0);
    const [header, ...rows] = lines.map((line) => line.split(","));
    expect(header).toEqual(result.columns);
    const rendered = tableModel(result).rows.map((row) => row.map(cellText));
    expect(rendered).toEqual(rows);
    const html = renderTableHtml(tableModel(result));
    for (const row of rows) for (const cell of row) expect(html).toContain(cell);
  });
});
