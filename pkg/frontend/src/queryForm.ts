// Query console state: what the form offers is derived from the model
// graph (only reachable levels are roll-up targets), and a valid form
// state serializes to exactly the query JSON the service accepts.

import type {
  AggregateFunction,
  ConditionOperator,
  GraphNode,
  Literal,
  ModelGraph,
  QueryBody,
  QueryConditionBody,
} from "./types";

export interface RoleInfo {
  role: string;
  dimension: string;
  bottomLevel: string;
}

export interface ConditionRow {
  level: string;
  property: string;
  operator: ConditionOperator;
  /** Raw text as typed; `IN` lists are comma-separated. */
  input: string;
}

export interface QueryFormState {
  factRelationship: string | null;
  rollups: Record<string, string>;
  conditions: ConditionRow[];
  aggregation: { function: AggregateFunction; measure: string | null };
}

export function emptyForm(): QueryFormState {
  return {
    factRelationship: null,
    rollups: {},
    conditions: [],
    aggregation: { function: "count", measure: null },
  };
}

const node = (graph: ModelGraph, id: string): GraphNode | undefined =>
  graph.nodes.find((n) => n.id === id);

export function factRelationships(graph: ModelGraph): string[] {
  return graph.nodes.filter((n) => n.kind === "factRelationship").map((n) => n.name);
}

export function rolesOf(graph: ModelGraph, factRelationship: string): RoleInfo[] {
  const roles: RoleInfo[] = [];
  for (const edge of graph.edges) {
    if (edge.kind !== "role" || edge.from !== `factRelationship:${factRelationship}`) continue;
    const dimension = node(graph, edge.to);
    if (!dimension?.bottomLevel) continue;
    roles.push({ role: edge.role ?? dimension.name, dimension: dimension.name, bottomLevel: dimension.bottomLevel });
  }
  return roles;
}

export function measuresOf(graph: ModelGraph, factRelationship: string): string[] {
  return (node(graph, `factRelationship:${factRelationship}`)?.measures ?? []).map((m) => m.name);
}

export function propertiesOf(graph: ModelGraph, level: string): { name: string; type: string }[] {
  return node(graph, `level:${level}`)?.properties ?? [];
}

/** Bottom level plus everything reachable along parent-child edges.
 *  This is the full set of legal roll-up targets for the dimension. */
export function reachableLevels(graph: ModelGraph, dimension: string): string[] {
  const dim = node(graph, `dimension:${dimension}`);
  if (!dim?.bottomLevel) return [];
  const out = [dim.bottomLevel];
  const frontier = [`level:${dim.bottomLevel}`];
  const seen = new Set(frontier);
  while (frontier.length) {
    const current = frontier.pop()!;
    for (const edge of graph.edges) {
      if (edge.kind !== "parentChild" || edge.from !== current || seen.has(edge.to)) continue;
      seen.add(edge.to);
      frontier.push(edge.to);
      out.push(edge.to.slice("level:".length));
    }
  }
  return out;
}

export class FormError extends Error {}

export function parseLiteral(raw: string, type: string): Literal {
  const text = raw.trim();
  if (text === "") throw new FormError("a condition value is empty");
  switch (type) {
    case "integer": {
      if (!/^-?\d+$/.test(text)) throw new FormError(`${text} is not an integer`);
      return Number(text);
    }
    case "decimal": {
      if (!/^-?\d+(\.\d+)?$/.test(text)) throw new FormError(`${text} is not a decimal`);
      return text; // decimals travel as strings to stay exact
    }
    case "boolean": {
      if (text !== "true" && text !== "false") throw new FormError(`${text} is not true/false`);
      return text === "true";
    }
    default:
      return text; // strings and ISO dates
  }
}

export function conditionValues(row: ConditionRow, type: string): Literal[] {
  const raw = row.operator === "in" ? row.input.split(",") : [row.input];
  const values = raw.map((part) => parseLiteral(part, type));
  if (values.length === 0) throw new FormError("a condition needs at least one value");
  return values;
}

/** Serialize the form to the query JSON body, or raise FormError. */
export function toQueryBody(state: QueryFormState, graph: ModelGraph): QueryBody {
  if (!state.factRelationship) throw new FormError("pick a fact relationship");
  const roles = rolesOf(graph, state.factRelationship);
  const rollups: Record<string, string> = {};
  for (const [dimension, target] of Object.entries(state.rollups)) {
    if (!target) continue;
    if (!roles.some((r) => r.dimension === dimension)) {
      throw new FormError(`${dimension} is not a role of ${state.factRelationship}`);
    }
    if (!reachableLevels(graph, dimension).includes(target)) {
      throw new FormError(`${target} is not reachable in ${dimension}`);
    }
    rollups[dimension] = target;
  }

  const conditions: QueryConditionBody[] = state.conditions.map((row) => {
    const property = propertiesOf(graph, row.level).find((p) => p.name === row.property);
    if (!property) throw new FormError(`${row.level} has no property ${row.property}`);
    return {
      level: row.level,
      property: row.property,
      operator: row.operator,
      values: conditionValues(row, property.type),
    };
  });

  const aggregation: QueryBody["aggregation"] = { function: state.aggregation.function };
  if (state.aggregation.function !== "count") {
    if (!state.aggregation.measure) throw new FormError(`${state.aggregation.function} needs a measure`);
    aggregation.measure = state.aggregation.measure;
  } else if (state.aggregation.measure) {
    aggregation.measure = state.aggregation.measure;
  }

  return { factRelationship: state.factRelationship, rollups, conditions, aggregation };
}

/** Levels a condition may reference: role bottoms plus roll-up targets. */
export function conditionLevels(state: QueryFormState, graph: ModelGraph): string[] {
  if (!state.factRelationship) return [];
  const levels = rolesOf(graph, state.factRelationship).map((r) => r.bottomLevel);
  for (const target of Object.values(state.rollups)) {
    if (target && !levels.includes(target)) levels.push(target);
  }
  return levels;
}
