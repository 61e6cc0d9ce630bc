// DOM wiring: load the model, draw the diagram, drive the query
// console and member browser. All state of record lives on the server;
// reloading re-fetches everything. Dragged node positions are the one
// client-side nicety, kept in session storage only.

import { ApiClient, ApiError, LatestWins } from "./api";
import { QueryHistory } from "./history";
import { conditionForMember, pageOf } from "./members";
import {
  FormError,
  conditionLevels,
  emptyForm,
  factRelationships,
  measuresOf,
  propertiesOf,
  reachableLevels,
  rolesOf,
  toQueryBody,
  type ConditionRow,
  type QueryFormState,
} from "./queryForm";
import { renderGraphSvg } from "./renderSvg";
import { renderTableHtml, sortBy, tableModel, type TableModel } from "./resultsTable";
import type { AggregateFunction, ConditionOperator, ModelGraph, ResultRelation } from "./types";
import { buildViewModel, type SavedPositions } from "./viewModel";

const API_BASE = (window as { CIM_API_BASE?: string }).CIM_API_BASE ?? "http://127.0.0.1:8787";
const POSITIONS_KEY = "cim.nodePositions";

const api = new ApiClient(API_BASE);
const latest = new LatestWins();
const history = new QueryHistory();

let graph: ModelGraph | null = null;
let form: QueryFormState = emptyForm();
let lastResult: TableModel | null = null;
let membersRelation: ResultRelation | null = null;
let membersLevel: string | null = null;
let membersPage = 0;

const el = (id: string) => document.getElementById(id)!;

function savedPositions(): SavedPositions {
  try {
    return JSON.parse(sessionStorage.getItem(POSITIONS_KEY) ?? "{}");
  } catch {
    return {};
  }
}

function banner(message: string | null) {
  const box = el("error-banner");
  if (message === null) {
    box.hidden = true;
    return;
  }
  box.hidden = false;
  el("error-message").textContent = message;
}

async function loadModel() {
  banner(null);
  el("diagram").innerHTML = "<p class='muted'>loading model…</p>";
  try {
    graph = await api.model();
  } catch (error) {
    graph = null;
    banner(`cannot load the model: ${error instanceof Error ? error.message : error}`);
    el("diagram").innerHTML = "";
    return;
  }
  form = emptyForm();
  const facts = factRelationships(graph);
  if (facts.length === 1) form.factRelationship = facts[0];
  renderDiagram();
  renderForm();
  renderMembersPanel();
}

function renderDiagram() {
  if (!graph) return;
  if (graph.nodes.length === 0) {
    el("diagram").innerHTML = "<p class='muted'>the model is empty</p>";
    return;
  }
  const vm = buildViewModel(graph, savedPositions());
  el("diagram").innerHTML = renderGraphSvg(vm);
  wireDragging();
}

function wireDragging() {
  const svg = el("diagram").querySelector("svg");
  if (!svg) return;
  let dragging: { id: string; startX: number; startY: number; baseX: number; baseY: number } | null = null;
  svg.querySelectorAll<SVGGElement>("g.node").forEach((node) => {
    node.addEventListener("pointerdown", (event) => {
      const id = node.dataset.id!;
      const positions = savedPositions();
      const vm = buildViewModel(graph!, positions);
      const placed = vm.byId.get(id)!;
      dragging = { id, startX: event.clientX, startY: event.clientY, baseX: placed.x, baseY: placed.y };
      event.preventDefault();
    });
  });
  window.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const positions = savedPositions();
    positions[dragging.id] = {
      x: dragging.baseX + event.clientX - dragging.startX,
      y: dragging.baseY + event.clientY - dragging.startY,
    };
    sessionStorage.setItem(POSITIONS_KEY, JSON.stringify(positions));
    renderDiagram();
  });
  window.addEventListener("pointerup", () => {
    dragging = null;
  });
}

function option(value: string, label = value, selected = false): string {
  return `<option value="${value}"${selected ? " selected" : ""}>${label}</option>`;
}

function renderForm() {
  if (!graph) return;
  const facts = factRelationships(graph);
  el("fact-select").innerHTML =
    option("", "— fact relationship —", !form.factRelationship) +
    facts.map((f) => option(f, f, form.factRelationship === f)).join("");

  const rollups = el("rollups");
  if (!form.factRelationship) {
    rollups.innerHTML = "";
    el("measure-select").innerHTML = "";
    return;
  }
  rollups.innerHTML = rolesOf(graph, form.factRelationship)
    .map((role) => {
      const levels = reachableLevels(graph!, role.dimension);
      const chosen = form.rollups[role.dimension] ?? "";
      return `<label>${role.dimension} <select data-dimension="${role.dimension}">
        ${option("", "(aggregate out)", chosen === "")}
        ${levels.map((l) => option(l, l, chosen === l)).join("")}
      </select></label>`;
    })
    .join("\n");
  rollups.querySelectorAll<HTMLSelectElement>("select").forEach((select) => {
    select.addEventListener("change", () => {
      const dimension = select.dataset.dimension!;
      if (select.value) form.rollups[dimension] = select.value;
      else delete form.rollups[dimension];
      renderForm();
    });
  });

  const fn = el("function-select") as HTMLSelectElement;
  fn.value = form.aggregation.function;
  const measures = measuresOf(graph, form.factRelationship);
  el("measure-select").innerHTML =
    (form.aggregation.function === "count" ? option("", "(rows)", !form.aggregation.measure) : "") +
    measures.map((m) => option(m, m, form.aggregation.measure === m)).join("");

  renderConditions();
}

function renderConditions() {
  if (!graph || !form.factRelationship) return;
  const levels = conditionLevels(form, graph);
  el("conditions").innerHTML = form.conditions
    .map((row, index) => {
      const properties = propertiesOf(graph!, row.level).map((p) => p.name);
      return `<div class="condition" data-index="${index}">
        <select class="cond-level">${levels.map((l) => option(l, l, row.level === l)).join("")}</select>
        <select class="cond-prop">${properties.map((p) => option(p, p, row.property === p)).join("")}</select>
        <select class="cond-op">${(["equals", "in", "less-than", "greater-than"] as ConditionOperator[])
          .map((op) => option(op, op, row.operator === op))
          .join("")}</select>
        <input class="cond-value" value="${row.input.replace(/"/g, "&quot;")}" placeholder="value(, value)"/>
        <button class="cond-remove" title="remove">×</button>
      </div>`;
    })
    .join("\n");
  el("conditions")
    .querySelectorAll<HTMLDivElement>(".condition")
    .forEach((box) => {
      const index = Number(box.dataset.index);
      const row = form.conditions[index];
      box.querySelector<HTMLSelectElement>(".cond-level")!.addEventListener("change", (e) => {
        row.level = (e.target as HTMLSelectElement).value;
        row.property = propertiesOf(graph!, row.level)[0]?.name ?? "";
        renderConditions();
      });
      box.querySelector<HTMLSelectElement>(".cond-prop")!.addEventListener("change", (e) => {
        row.property = (e.target as HTMLSelectElement).value;
      });
      box.querySelector<HTMLSelectElement>(".cond-op")!.addEventListener("change", (e) => {
        row.operator = (e.target as HTMLSelectElement).value as ConditionOperator;
      });
      box.querySelector<HTMLInputElement>(".cond-value")!.addEventListener("input", (e) => {
        row.input = (e.target as HTMLInputElement).value;
      });
      box.querySelector<HTMLButtonElement>(".cond-remove")!.addEventListener("click", () => {
        form.conditions.splice(index, 1);
        renderConditions();
      });
    });
}

function queryFeedback(message: string | null) {
  el("query-feedback").textContent = message ?? "";
}

async function runQuery() {
  if (!graph) return;
  queryFeedback(null);
  let body;
  try {
    body = toQueryBody(form, graph);
  } catch (error) {
    queryFeedback(error instanceof FormError ? error.message : String(error));
    return;
  }
  const id = latest.next();
  el("results").innerHTML = "<p class='muted'>running…</p>";
  try {
    const result = await api.query(body);
    if (!latest.isCurrent(id)) return; // a newer query superseded this one
    lastResult = tableModel(result);
    history.push(body, result.rows.length);
    renderResults();
    renderHistory();
  } catch (error) {
    if (!latest.isCurrent(id)) return;
    el("results").innerHTML = "";
    if (error instanceof ApiError) {
      const candidates = (error.body.details as { candidates?: string[] } | undefined)?.candidates;
      queryFeedback(candidates?.length ? `${error.message} (candidates: ${candidates.join(", ")})` : error.message);
    } else {
      queryFeedback(String(error));
    }
  }
}

function renderResults() {
  if (!lastResult) return;
  el("results").innerHTML = renderTableHtml(lastResult);
  el("results")
    .querySelectorAll<HTMLTableCellElement>("th")
    .forEach((th) => {
      th.addEventListener("click", () => {
        lastResult = sortBy(lastResult!, Number(th.dataset.column));
        renderResults();
      });
    });
}

function renderHistory() {
  el("history").innerHTML = history
    .list()
    .map((entry, i) => `<li data-index="${i}"><span>${entry.summary}</span> <em>${entry.rowCount} rows</em></li>`)
    .join("\n");
  el("history")
    .querySelectorAll<HTMLLIElement>("li")
    .forEach((item) => {
      item.addEventListener("click", () => {
        const entry = history.get(Number(item.dataset.index));
        if (!entry || !graph) return;
        form.factRelationship = entry.body.factRelationship;
        form.rollups = { ...entry.body.rollups };
        form.aggregation = {
          function: entry.body.aggregation.function,
          measure: entry.body.aggregation.measure ?? null,
        };
        form.conditions = entry.body.conditions.map((c) => ({
          level: c.level,
          property: c.property,
          operator: c.operator,
          input: c.values.join(", "),
        }));
        renderForm();
        void runQuery();
      });
    });
}

function renderMembersPanel() {
  if (!graph) return;
  const levels = graph.nodes.filter((n) => n.kind === "level").map((n) => n.name);
  el("members-level").innerHTML =
    option("", "— browse a level —", !membersLevel) +
    levels.map((l) => option(l, l, membersLevel === l)).join("");
  renderMembers();
}

async function browseMembers(level: string) {
  membersLevel = level;
  membersPage = 0;
  membersRelation = null;
  el("members-notice").textContent = "";
  if (!level) {
    renderMembers();
    return;
  }
  try {
    membersRelation = await api.members(level);
  } catch (error) {
    el("members-notice").textContent =
      error instanceof ApiError && error.status === 409
        ? `${level} is an unmapped level`
        : `cannot load members: ${error instanceof Error ? error.message : error}`;
  }
  renderMembers();
}

function renderMembers() {
  const box = el("members");
  if (!membersRelation || !membersLevel) {
    box.innerHTML = "";
    el("members-paging").textContent = "";
    return;
  }
  if (membersRelation.rows.length === 0) {
    box.innerHTML = "<p class='muted'>no members</p>";
    el("members-paging").textContent = "";
    return;
  }
  const page = pageOf(membersRelation, membersPage);
  membersPage = page.pageIndex;
  const head = membersRelation.columns.map((c) => `<th>${c}</th>`).join("");
  const rows = page.rows
    .map(
      (row, i) =>
        `<tr data-row="${i}">${row.map((cell) => `<td>${cell === null ? "" : String(cell)}</td>`).join("")}</tr>`,
    )
    .join("\n");
  box.innerHTML = `<table class="results"><thead><tr>${head}</tr></thead><tbody>${rows}</tbody></table>`;
  el("members-paging").textContent = `page ${page.pageIndex + 1} / ${page.pageCount}`;
  box.querySelectorAll<HTMLTableRowElement>("tbody tr").forEach((tr) => {
    tr.addEventListener("click", () => {
      if (!graph || !membersRelation || !membersLevel) return;
      const absolute = membersPage * 25 + Number(tr.dataset.row);
      const condition = conditionForMember(graph, membersLevel, membersRelation, membersRelation.rows[absolute]);
      if (condition) {
        form.conditions.push(condition);
        renderConditions();
      }
    });
  });
}

function wireStaticControls() {
  el("retry-load").addEventListener("click", () => void loadModel());
  el("fact-select").addEventListener("change", (e) => {
    form = emptyForm();
    form.factRelationship = (e.target as HTMLSelectElement).value || null;
    renderForm();
  });
  el("function-select").addEventListener("change", (e) => {
    form.aggregation.function = (e.target as HTMLSelectElement).value as AggregateFunction;
    if (form.aggregation.function !== "count" && !form.aggregation.measure && graph && form.factRelationship) {
      form.aggregation.measure = measuresOf(graph, form.factRelationship)[0] ?? null;
    }
    renderForm();
  });
  el("measure-select").addEventListener("change", (e) => {
    form.aggregation.measure = (e.target as HTMLSelectElement).value || null;
  });
  el("add-condition").addEventListener("click", () => {
    if (!graph || !form.factRelationship) return;
    const levels = conditionLevels(form, graph);
    if (!levels.length) return;
    const level = levels[0];
    const row: ConditionRow = {
      level,
      property: propertiesOf(graph, level)[0]?.name ?? "",
      operator: "equals",
      input: "",
    };
    form.conditions.push(row);
    renderConditions();
  });
  el("run-query").addEventListener("click", () => void runQuery());
  el("members-level").addEventListener("change", (e) => void browseMembers((e.target as HTMLSelectElement).value));
  el("members-prev").addEventListener("click", () => {
    membersPage -= 1;
    renderMembers();
  });
  el("members-next").addEventListener("click", () => {
    membersPage += 1;
    renderMembers();
  });
}

wireStaticControls();
void loadModel();
