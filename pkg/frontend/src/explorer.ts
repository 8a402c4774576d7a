import type { AnomalyDoc, AnomalyKind, Coord, RunDoc, ViewDocument } from "./types.js";
import { escapeHtml, eventKindLabel, formatAttrs } from "./format.js";

// Draws the space-time diagram from a pushed view document.  Lanes are
// processes, X advances with the event index; anomaly coordinates get
// highlight classes and pattern runs can collapse into labeled blocks.
// Everything here is presentation over data the analysis side already
// computed; nothing is re-derived from events or relations.

const LANE_SPACING = 56;
const MARGIN_X = 72;
const MARGIN_Y = 40;
const STEP_X = 48;
const EVENT_RADIUS = 5;

export const CLASS_BY_ANOMALY: Record<AnomalyKind, string> = {
  LengthMismatch: "length-mismatch",
  IsolatedSend: "isolated-send",
  IsolatedReceive: "isolated-receive",
};

export const ALL_ANOMALY_KINDS: AnomalyKind[] = [
  "LengthMismatch",
  "IsolatedSend",
  "IsolatedReceive",
];

export interface ExplorerOptions {
  collapse: boolean;
  // Anomaly kinds whose highlighting is shown.  Filtering only dims:
  // collapse always keeps anomaly-bearing occurrences expanded, even
  // when their kind's highlight is toggled off.
  highlight: Set<AnomalyKind>;
}

export const DEFAULT_OPTIONS: ExplorerOptions = {
  collapse: false,
  highlight: new Set(ALL_ANOMALY_KINDS),
};

function coordKey(p: number, i: number): string {
  return `${p}:${i}`;
}

/** First anomaly wins per coordinate; detectors do not overlap. */
export function anomalyClasses(
  anomalies: AnomalyDoc[],
  highlight: Set<AnomalyKind>,
): Map<string, string> {
  const classes = new Map<string, string>();
  for (const anomaly of anomalies) {
    if (!highlight.has(anomaly.kind)) {
      continue;
    }
    for (const [p, i] of anomaly.events) {
      const key = coordKey(p, i);
      if (!classes.has(key)) {
        classes.set(key, CLASS_BY_ANOMALY[anomaly.kind]);
      }
    }
  }
  return classes;
}

export interface CollapseBlock {
  run: RunDoc;
  hiddenCount: number;
  coords: Coord[];
}

/** Coordinates hidden by collapsing, plus one block per affected run. */
export function collapsedCoords(
  runs: RunDoc[],
  anomalies: AnomalyDoc[],
): { hidden: Set<string>; blocks: CollapseBlock[] } {
  const anomalous = new Set<string>();
  for (const anomaly of anomalies) {
    for (const [p, i] of anomaly.events) {
      anomalous.add(coordKey(p, i));
    }
  }
  const hidden = new Set<string>();
  const blocks: CollapseBlock[] = [];
  for (const run of runs) {
    const collapsed = run.occurrences
      .slice(1)
      .filter((occ) => !occ.events.some(([p, i]) => anomalous.has(coordKey(p, i))));
    if (collapsed.length === 0) {
      continue;
    }
    const coords: Coord[] = [];
    for (const occ of collapsed) {
      for (const [p, i] of occ.events) {
        hidden.add(coordKey(p, i));
        coords.push([p, i]);
      }
    }
    blocks.push({ run, hiddenCount: collapsed.length, coords });
  }
  return { hidden, blocks };
}

function laneY(p: number): number {
  return MARGIN_Y + p * LANE_SPACING;
}

function eventX(i: number): number {
  return MARGIN_X + (i - 1) * STEP_X;
}

export function renderExplorer(view: ViewDocument, options: ExplorerOptions = DEFAULT_OPTIONS): string {
  const classes = anomalyClasses(view.anomalies, options.highlight);
  let hidden = new Set<string>();
  let blocks: CollapseBlock[] = [];
  if (options.collapse) {
    ({ hidden, blocks } = collapsedCoords(view.runs, view.anomalies));
  }

  let maxIndex = 1;
  for (const event of view.events) {
    maxIndex = Math.max(maxIndex, event.i);
  }
  const width = MARGIN_X * 2 + (maxIndex - 1) * STEP_X;
  const height = MARGIN_Y * 2 + Math.max(view.processes - 1, 0) * LANE_SPACING;

  const parts: string[] = [];
  parts.push(
    `<svg class="explorer" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  );
  parts.push(
    `<defs><marker id="head" orient="auto" markerWidth="8" markerHeight="8" ` +
      `refX="7" refY="3"><path d="M0,0 L7,3 L0,6 Z" fill="context-stroke"></path>` +
      `</marker></defs>`,
  );

  for (let p = 0; p < view.processes; p++) {
    const y = laneY(p);
    parts.push(
      `<line class="lane" x1="${MARGIN_X / 2}" y1="${y}" x2="${width - MARGIN_X / 2}" y2="${y}"></line>`,
    );
    parts.push(`<text class="lane-label" x="8" y="${y + 4}">P${p}</text>`);
  }

  for (const block of blocks) {
    const xs = block.coords.map(([, i]) => eventX(i));
    const ys = block.coords.map(([p]) => laneY(p));
    const x0 = Math.min(...xs) - EVENT_RADIUS * 2;
    const x1 = Math.max(...xs) + EVENT_RADIUS * 2;
    const y0 = Math.min(...ys) - EVENT_RADIUS * 3;
    const y1 = Math.max(...ys) + EVENT_RADIUS * 3;
    parts.push(
      `<rect class="collapse-block" x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}"></rect>`,
    );
    const label = `${block.run.template} ×${block.hiddenCount}`;
    parts.push(
      `<text class="collapse-label" x="${x0 + 4}" y="${y0 - 4}">${escapeHtml(label)}</text>`,
    );
  }

  for (const relation of view.relations) {
    if (hidden.has(coordKey(relation.sp, relation.si)) || hidden.has(coordKey(relation.dp, relation.di))) {
      continue;
    }
    let cls = "arrow";
    const srcClass = classes.get(coordKey(relation.sp, relation.si));
    if (srcClass === "length-mismatch" && classes.get(coordKey(relation.dp, relation.di)) === srcClass) {
      cls = "arrow length-mismatch";
    }
    parts.push(
      `<line class="${cls}" x1="${eventX(relation.si)}" y1="${laneY(relation.sp)}" ` +
        `x2="${eventX(relation.di)}" y2="${laneY(relation.dp)}" marker-end="url(#head)"></line>`,
    );
  }

  for (const event of view.events) {
    const key = coordKey(event.p, event.i);
    if (hidden.has(key)) {
      continue;
    }
    const extra = classes.get(key);
    const cls = extra ? `event ${extra}` : "event";
    const attrs = formatAttrs(event.attrs);
    const title = `P${event.p}#${event.i} ${eventKindLabel(event)}${attrs ? " " + attrs : ""}`;
    parts.push(
      `<circle class="${cls}" cx="${eventX(event.i)}" cy="${laneY(event.p)}" r="${EVENT_RADIUS}">` +
        `<title>${escapeHtml(title)}</title></circle>`,
    );
  }

  parts.push(`</svg>`);
  return parts.join("");
}

// ── Anomaly side panel ─────────────────────────────────────────────────────

export function renderAnomalyList(anomalies: AnomalyDoc[], highlight: Set<AnomalyKind>): string {
  if (anomalies.length === 0) {
    return '<p class="empty">No anomalies.</p>';
  }
  const items = anomalies
    .map((anomaly) => {
      const shown = highlight.has(anomaly.kind);
      const events = anomaly.events.map(([p, i]) => `P${p}#${i}`).join(", ");
      const details = formatAttrs(anomaly.details);
      return (
        `<li class="anomaly severity-${anomaly.severity}${shown ? "" : " dimmed"}">` +
        `<span class="anomaly-kind ${CLASS_BY_ANOMALY[anomaly.kind]}">${anomaly.kind}</span> ` +
        `${escapeHtml(events)}` +
        (details ? ` <span class="anomaly-details">${escapeHtml(details)}</span>` : "") +
        `</li>`
      );
    })
    .join("");
  return `<ul class="anomaly-list">${items}</ul>`;
}
