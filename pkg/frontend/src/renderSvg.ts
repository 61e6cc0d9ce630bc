// Pure SVG renderer for the model diagram. Styling follows the visual
// conventions: fact relationships as shadowed diamonds, dimensions as
// shaded rectangles, levels as plain rectangles, hierarchies as ovals,
// store tables as column boxes, mappings as dotted lines labeled with
// their conditions, and an encircled X badge on exclusive roll-ups.

import type { GraphViewModel, PlacedNode } from "./viewModel";
import type { GraphEdge } from "./types";

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function center(node: PlacedNode): { cx: number; cy: number } {
  return { cx: node.x + node.width / 2, cy: node.y + node.height / 2 };
}

function nodeSvg(node: PlacedNode): string {
  const { cx, cy } = center(node);
  const label = `<text class="label" x="${cx}" y="${node.y + 20}" text-anchor="middle">${escapeXml(node.name)}</text>`;
  switch (node.kind) {
    case "factRelationship": {
      const points = [
        `${cx},${node.y}`,
        `${node.x + node.width},${cy}`,
        `${cx},${node.y + node.height}`,
        `${node.x},${cy}`,
      ].join(" ");
      const measures = (node.measures ?? [])
        .map(
          (m, i) =>
            `<text class="detail" x="${cx}" y="${cy + 4 + i * 13}" text-anchor="middle">${escapeXml(m.name)}</text>`,
        )
        .join("");
      return `<g class="node fact" data-id="${escapeXml(node.id)}"><polygon class="shadow" points="${points}" transform="translate(4,4)"/><polygon points="${points}"/><text class="label" x="${cx}" y="${cy - 6}" text-anchor="middle">${escapeXml(node.name)}</text>${measures}</g>`;
    }
    case "dimension":
      return `<g class="node dimension" data-id="${escapeXml(node.id)}"><rect class="shadow" x="${node.x + 4}" y="${node.y + 4}" width="${node.width}" height="${node.height}" rx="3"/><rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}" rx="3"/><text class="label" x="${cx}" y="${cy + 4}" text-anchor="middle">${escapeXml(node.name)}</text></g>`;
    case "hierarchy":
      return `<g class="node hierarchy" data-id="${escapeXml(node.id)}"><ellipse cx="${cx}" cy="${cy}" rx="${node.width / 2}" ry="${node.height / 2}"/><text class="label" x="${cx}" y="${cy + 4}" text-anchor="middle">${escapeXml(node.name)}</text></g>`;
    case "table": {
      const columns = (node.columns ?? [])
        .map((column, i) => {
          const is_key = node.primaryKey?.includes(column.name);
          const text = `${column.name}: ${column.type}${is_key ? " \u{1f511}" : ""}`;
          return `<text class="detail" x="${node.x + 8}" y="${node.y + 42 + i * 15}">${escapeXml(text)}</text>`;
        })
        .join("");
      return `<g class="node table" data-id="${escapeXml(node.id)}"><rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}"/><line x1="${node.x}" y1="${node.y + 26}" x2="${node.x + node.width}" y2="${node.y + 26}"/>${label}${columns}</g>`;
    }
    default: {
      const properties = (node.properties ?? [])
        .map((p, i) => {
          const is_key = node.key?.includes(p.name);
          return `<text class="detail" x="${node.x + 8}" y="${node.y + 34 + i * 13}">${escapeXml(
            `${is_key ? "• " : ""}${p.name}`,
          )}</text>`;
        })
        .join("");
      return `<g class="node level" data-id="${escapeXml(node.id)}"><rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}"/>${label}${properties}</g>`;
    }
  }
}

function edgeSvg(edge: GraphEdge, vm: GraphViewModel): string {
  const from = vm.byId.get(edge.from);
  const to = vm.byId.get(edge.to);
  if (!from || !to) return "";
  const a = center(from);
  const b = center(to);
  const midX = (a.cx + b.cx) / 2;
  const midY = (a.cy + b.cy) / 2;
  const line = (cls: string) =>
    `<line class="${cls}" x1="${a.cx}" y1="${a.cy}" x2="${b.cx}" y2="${b.cy}"/>`;

  switch (edge.kind) {
    case "parentChild": {
      let extras = "";
      if (edge.label) {
        extras += `<text class="edge-label" x="${midX}" y="${midY - 8}" text-anchor="middle">${escapeXml(edge.label)}</text>`;
      }
      if (edge.exclusiveGroup) {
        extras += `<g class="exclusive-badge" data-group="${escapeXml(edge.exclusiveGroup)}"><circle cx="${midX}" cy="${midY + 10}" r="9"/><text x="${midX}" y="${midY + 14}" text-anchor="middle">X</text></g>`;
      }
      return `<g class="edge parent-child">${line("wire")}${extras}</g>`;
    }
    case "mapping": {
      const label = edge.label
        ? `<text class="edge-label" x="${midX}" y="${midY - 6}" text-anchor="middle">${escapeXml(edge.label)}</text>`
        : "";
      const fragment = edge.fragment
        ? `<text class="edge-label fragment" x="${midX}" y="${midY + 14}" text-anchor="middle">${escapeXml(edge.fragment)}</text>`
        : "";
      return `<g class="edge mapping" ${edge.fragment ? `data-fragment="${escapeXml(edge.fragment)}"` : ""}><line class="wire dotted" x1="${a.cx}" y1="${a.cy}" x2="${b.cx}" y2="${b.cy}" stroke-dasharray="5,4"/>${label}${fragment}</g>`;
    }
    case "role": {
      const label = edge.role
        ? `<text class="edge-label" x="${midX}" y="${midY - 4}" text-anchor="middle">${escapeXml(edge.role)}</text>`
        : "";
      return `<g class="edge role">${line("wire")}${label}</g>`;
    }
    case "foreignKey":
      return `<g class="edge foreign-key">${line("wire thin")}</g>`;
    default:
      return `<g class="edge ${edge.kind}">${line("wire thin")}</g>`;
  }
}

export function diagramExtent(vm: GraphViewModel): { width: number; height: number } {
  let width = 400;
  let height = 300;
  for (const node of vm.nodes) {
    width = Math.max(width, node.x + node.width + 40);
    height = Math.max(height, node.y + node.height + 40);
  }
  return { width, height };
}

export function renderGraphSvg(vm: GraphViewModel): string {
  const { width, height } = diagramExtent(vm);
  const edges = vm.edges.map((edge) => edgeSvg(edge, vm)).join("\n");
  const nodes = vm.nodes.map(nodeSvg).join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">\n${edges}\n${nodes}\n</svg>`;
}
