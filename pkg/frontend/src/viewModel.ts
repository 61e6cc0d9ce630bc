// The client-side picture of the /model graph: the server document
// plus layout positions. The model itself is never mutated here; a
// reload simply rebuilds everything from the server's truth.

import { computeLayout, nodeSize, type Box } from "./layout";
import type { GraphEdge, GraphNode, ModelGraph } from "./types";

export interface PlacedNode extends GraphNode, Box {}

export interface GraphViewModel {
  formatVersion: number;
  nodes: PlacedNode[];
  edges: GraphEdge[];
  byId: Map<string, PlacedNode>;
}

export type SavedPositions = Record<string, { x: number; y: number }>;

export function buildViewModel(graph: ModelGraph, saved: SavedPositions = {}): GraphViewModel {
  const boxes = computeLayout(graph.nodes, graph.edges);
  const nodes: PlacedNode[] = graph.nodes.map((node) => {
    const box = boxes.get(node.id) ?? { x: 0, y: 0, ...nodeSize(node) };
    const dragged = saved[node.id];
    return { ...node, ...box, ...(dragged ? { x: dragged.x, y: dragged.y } : {}) };
  });
  return {
    formatVersion: graph.formatVersion,
    nodes,
    edges: graph.edges,
    byId: new Map(nodes.map((node) => [node.id, node])),
  };
}

/** Distinct conceptual entity names: levels, dimensions, fact
 *  relationships, and hierarchy markers (tables are store objects). */
export function entityNames(graph: ModelGraph): string[] {
  const names = new Set<string>();
  for (const node of graph.nodes) {
    if (node.kind !== "table") names.add(node.name);
  }
  return [...names].sort();
}
