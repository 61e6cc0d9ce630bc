// Automatic layered layout for the model diagram: fact relationships,
// then dimensions (with their hierarchy ovals), then levels by roll-up
// depth, then the store tables on the far right.

import type { GraphEdge, GraphNode } from "./types";

export interface Box {
  x: number;
  y: number;
  width: number;
  height: number;
}

const COLUMN_GAP = 60;
const ROW_GAP = 26;
const MARGIN = 30;

export function nodeSize(node: GraphNode): { width: number; height: number } {
  switch (node.kind) {
    case "factRelationship":
      return { width: 170, height: 80 };
    case "dimension":
      return { width: 150, height: 44 };
    case "hierarchy":
      return { width: 130, height: 38 };
    case "table":
      return { width: 190, height: 34 + 15 * (node.columns?.length ?? 0) };
    default:
      return { width: 160, height: 40 + 13 * (node.properties?.length ?? 0) };
  }
}

/** Roll-up depth per level: bottom levels at 0, parents one deeper. */
export function levelDepths(nodes: GraphNode[], edges: GraphEdge[]): Map<string, number> {
  const depths = new Map<string, number>();
  for (const edge of edges) {
    if (edge.kind === "bottomLevel") depths.set(edge.to, 0);
  }
  for (const node of nodes) {
    if (node.kind === "level" && !depths.has(node.id)) depths.set(node.id, 0);
  }
  const parentEdges = edges.filter((e) => e.kind === "parentChild");
  let changed = true;
  let guard = nodes.length + 1;
  while (changed && guard-- > 0) {
    changed = false;
    for (const edge of parentEdges) {
      const child = depths.get(edge.from) ?? 0;
      const proposed = child + 1;
      if ((depths.get(edge.to) ?? 0) < proposed) {
        depths.set(edge.to, proposed);
        changed = true;
      }
    }
  }
  return depths;
}

export function computeLayout(nodes: GraphNode[], edges: GraphEdge[]): Map<string, Box> {
  const depths = levelDepths(nodes, edges);
  const maxDepth = Math.max(0, ...[...depths.values()]);

  const columnOf = (node: GraphNode): number => {
    switch (node.kind) {
      case "factRelationship":
        return 0;
      case "dimension":
      case "hierarchy":
        return 1;
      case "level":
        return 2 + (depths.get(node.id) ?? 0);
      case "table":
        return 3 + maxDepth;
    }
  };

  const columns = new Map<number, GraphNode[]>();
  for (const node of nodes) {
    const column = columnOf(node);
    const bucket = columns.get(column) ?? [];
    bucket.push(node);
    columns.set(column, bucket);
  }

  const boxes = new Map<string, Box>();
  let x = MARGIN;
  for (const column of [...columns.keys()].sort((a, b) => a - b)) {
    const bucket = columns.get(column)!;
    let y = MARGIN;
    let widest = 0;
    for (const node of bucket) {
      const { width, height } = nodeSize(node);
      boxes.set(node.id, { x, y, width, height });
      y += height + ROW_GAP;
      widest = Math.max(widest, width);
    }
    x += widest + COLUMN_GAP;
  }
  return boxes;
}
