import type { ModuleInfo, TopologyEdge } from "./types.js";
import { escapeHtml } from "./format.js";

// ── Module table ───────────────────────────────────────────────────────────

export function renderModuleTable(modules: ModuleInfo[]): string {
  if (modules.length === 0) {
    return '<p class="empty">No modules registered. Start stages with --sentinel to see them here.</p>';
  }
  const rows = modules
    .map((m) => {
      const interfaces = m.interfaces
        .map((i) => `${escapeHtml(i.name)} (${i.direction}) ${escapeHtml(i.address)}`)
        .join("<br>");
      return (
        `<tr>` +
        `<td>${m.id}</td>` +
        `<td>${escapeHtml(m.name)}</td>` +
        `<td>${interfaces || "&ndash;"}</td>` +
        `<td><span class="status status-${m.status}">${m.status}</span></td>` +
        `<td>${m.features.map(escapeHtml).join(", ")}</td>` +
        `<td>${m.producers.join(", ") || "&ndash;"}</td>` +
        `<td>${m.consumers.join(", ") || "&ndash;"}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="module-table">` +
    `<thead><tr>` +
    `<th>id</th><th>name</th><th>interfaces</th><th>status</th>` +
    `<th>features</th><th>producers</th><th>consumers</th>` +
    `</tr></thead>` +
    `<tbody>${rows}</tbody>` +
    `</table>`
  );
}

// ── Topology diagram ───────────────────────────────────────────────────────

const BOX_W = 150;
const BOX_H = 46;
const GAP_X = 70;
const GAP_Y = 20;
const PAD = 16;

// Modules are laid out in columns by wiring depth: sources on the
// left, everything else one column right of its furthest producer.
function columnOf(moduleId: number, producersOf: Map<number, number[]>, seen: Set<number>): number {
  if (seen.has(moduleId)) {
    return 0;
  }
  seen.add(moduleId);
  const producers = producersOf.get(moduleId) ?? [];
  let column = 0;
  for (const producer of producers) {
    column = Math.max(column, columnOf(producer, producersOf, seen) + 1);
  }
  seen.delete(moduleId);
  return column;
}

export function renderTopology(modules: ModuleInfo[], edges: TopologyEdge[]): string {
  if (modules.length === 0) {
    return "";
  }
  const producersOf = new Map<number, number[]>();
  for (const edge of edges) {
    const list = producersOf.get(edge.consumer) ?? [];
    list.push(edge.producer);
    producersOf.set(edge.consumer, list);
  }

  const columns = new Map<number, number>();
  for (const m of modules) {
    columns.set(m.id, columnOf(m.id, producersOf, new Set()));
  }

  const positions = new Map<number, { x: number; y: number }>();
  const rowsUsed = new Map<number, number>();
  let maxColumn = 0;
  let maxRow = 0;
  for (const m of modules) {
    const column = columns.get(m.id) ?? 0;
    const row = rowsUsed.get(column) ?? 0;
    rowsUsed.set(column, row + 1);
    positions.set(m.id, {
      x: PAD + column * (BOX_W + GAP_X),
      y: PAD + row * (BOX_H + GAP_Y),
    });
    maxColumn = Math.max(maxColumn, column);
    maxRow = Math.max(maxRow, row);
  }

  const width = PAD * 2 + (maxColumn + 1) * BOX_W + maxColumn * GAP_X;
  const height = PAD * 2 + (maxRow + 1) * BOX_H + maxRow * GAP_Y;

  const parts: string[] = [];
  parts.push(
    `<svg class="topology" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  );
  parts.push(
    `<defs><marker id="topo-arrow" viewBox="0 0 10 7" refX="10" refY="3.5" ` +
      `markerWidth="8" markerHeight="6" orient="auto">` +
      `<polygon points="0 0, 10 3.5, 0 7"></polygon></marker></defs>`,
  );

  for (const edge of edges) {
    const from = positions.get(edge.producer);
    const to = positions.get(edge.consumer);
    if (!from || !to) {
      continue;
    }
    const x1 = from.x + BOX_W;
    const y1 = from.y + BOX_H / 2;
    const x2 = to.x;
    const y2 = to.y + BOX_H / 2;
    parts.push(
      `<line class="topo-edge" x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" ` +
        `marker-end="url(#topo-arrow)"></line>`,
    );
  }

  for (const m of modules) {
    const pos = positions.get(m.id);
    if (!pos) {
      continue;
    }
    parts.push(`<g class="topo-node status-${m.status}">`);
    parts.push(
      `<rect x="${pos.x}" y="${pos.y}" width="${BOX_W}" height="${BOX_H}" rx="6"></rect>`,
    );
    parts.push(
      `<text class="topo-name" x="${pos.x + BOX_W / 2}" y="${pos.y + 19}">` +
        `${m.id}: ${escapeHtml(m.name)}</text>`,
    );
    parts.push(
      `<text class="topo-status" x="${pos.x + BOX_W / 2}" y="${pos.y + 36}">${m.status}</text>`,
    );
    parts.push(`</g>`);
  }

  parts.push(`</svg>`);
  return parts.join("");
}
