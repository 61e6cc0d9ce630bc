// Mirrors the server's graph, query, and result JSON one-to-one
// (docs/FORMATS.md in the repository root is the normative reference).

export type NodeKind = "level" | "dimension" | "factRelationship" | "hierarchy" | "table";

export interface PropertyInfo {
  name: string;
  type: string;
}

export interface GraphNode {
  id: string;
  kind: NodeKind;
  name: string;
  properties?: PropertyInfo[];
  key?: string[];
  measures?: PropertyInfo[];
  columns?: PropertyInfo[];
  primaryKey?: string[];
  bottomLevel?: string;
  dimension?: string;
  tableKind?: string;
}

export type EdgeKind = "parentChild" | "role" | "bottomLevel" | "hierarchy" | "mapping" | "foreignKey";

export interface GraphEdge {
  kind: EdgeKind;
  from: string;
  to: string;
  label?: string;
  childCard?: string;
  parentCard?: string;
  exclusiveGroup?: string;
  role?: string;
  fragment?: string;
}

export interface ModelGraph {
  formatVersion: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type ConditionOperator = "equals" | "in" | "less-than" | "greater-than";
export type AggregateFunction = "sum" | "count" | "avg" | "min" | "max";
export type Literal = string | number | boolean;

export interface QueryConditionBody {
  level: string;
  property: string;
  operator: ConditionOperator;
  values: Literal[];
}

export interface QueryBody {
  factRelationship: string;
  rollups: Record<string, string>;
  conditions: QueryConditionBody[];
  aggregation: { function: AggregateFunction; measure?: string };
  name?: string;
}

export type Cell = string | number | boolean | null;

export interface ResultRelation {
  columns: string[];
  types: string[];
  rows: Cell[][];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: unknown;
}
