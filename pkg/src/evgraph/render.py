"""Space-time diagram layout and SVG / JSON view emission.

Processes run as horizontal lanes ordered by process id; time runs to
the right.  Horizontal placement is affine in wall-clock "ts" when
every event carries one (strictly increasing along each timeline);
otherwise it is affine in longest-path depth over sequential and
message edges, which keeps every arrow pointing rightward.

Anomaly highlighting and run collapsing are additive layers: anomalies
attach CSS classes (length-mismatch red, isolated-send orange,
isolated-receive purple), collapsing replaces each run's repeat
occurrences with one labeled block while keeping the first occurrence
expanded as a legend.  Occurrences holding anomalous events stay
expanded too; hiding a flagged event under a block would defeat the
point of flagging it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

from .failures import Anomaly
from .ingest import event_to_record
from .model import KIND_NAMES, Coord, EventGraph
from .patterns import PatternRun

__all__ = [
    "Layout",
    "RenderOptions",
    "layout",
    "emit_svg",
    "emit_json",
    "view_document",
]

LANE_SPACING = 56
MARGIN_X = 72
MARGIN_Y = 40
RANK_STEP = 48
EVENT_RADIUS = 5

CLASS_BY_ANOMALY = {
    "LengthMismatch": "length-mismatch",
    "IsolatedSend": "isolated-send",
    "IsolatedReceive": "isolated-receive",
}

STYLE = """
.lane { stroke: #999; stroke-width: 1; }
.lane-label { font: 12px sans-serif; fill: #444; }
.event { fill: #1f77b4; }
.event.isolated-send { fill: #ff7f0e; }
.event.isolated-receive { fill: #9467bd; }
.event.length-mismatch { fill: #d62728; }
.arrow { stroke: #222; stroke-width: 1.2; }
.arrow.length-mismatch { stroke: #d62728; stroke-width: 2; }
.collapse-block { fill: #dce6f2; stroke: #7a9cc6; stroke-dasharray: 4 2; }
.collapse-label { font: 11px sans-serif; fill: #2b4c7e; }
""".strip()


@dataclass(frozen=True)
class Layout:
    lane_y: Mapping[int, float]
    event_x: Mapping[Coord, float]
    mode: str  # "ts" | "rank"
    width: float
    height: float


@dataclass(frozen=True)
class RenderOptions:
    collapse: bool = False


def layout(graph: EventGraph) -> Layout:
    """Lane and event coordinates for a frozen graph."""
    lane_y = {p: float(MARGIN_Y + p * LANE_SPACING) for p in range(graph.process_count)}
    ts = _timestamps(graph)
    if ts is not None:
        lo = min(ts.values())
        hi = max(ts.values())
        span = hi - lo or 1.0
        plot = max(240.0, 24.0 * graph.event_count)
        event_x = {
            coord: round(MARGIN_X + (value - lo) / span * plot, 1)
            for coord, value in ts.items()
        }
        mode = "ts"
    else:
        ranks = _ranks(graph)
        event_x = {coord: float(MARGIN_X + depth * RANK_STEP) for coord, depth in ranks.items()}
        mode = "rank"
    width = max(event_x.values(), default=float(MARGIN_X)) + MARGIN_X
    height = MARGIN_Y * 2 + LANE_SPACING * max(graph.process_count - 1, 0)
    return Layout(lane_y=lane_y, event_x=event_x, mode=mode, width=width, height=height)


def _timestamps(graph: EventGraph) -> dict[Coord, float] | None:
    """Per-event ts values, or None unless usable on every timeline."""
    ts: dict[Coord, float] = {}
    if graph.event_count == 0:
        return None
    for p in range(graph.process_count):
        last = None
        for event in graph.timeline(p):
            value = event.attrs.get("ts")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return None
            if last is not None and value <= last:
                return None
            last = value
            ts[event.coord] = float(value)
    return ts


def _ranks(graph: EventGraph) -> dict[Coord, int]:
    """Longest-path depth over sequential and message edges.

    Timelines advance in dependency order: a receive waits for its
    matching send's depth.  Causally inconsistent graphs (cyclic message
    relations) fall back to sequential placement for the stuck tail so
    rendering never fails, at the cost of leftward arrows there.
    """
    depth: dict[Coord, int] = {}
    cursors = [0] * graph.process_count
    timelines = [graph.timeline(p) for p in range(graph.process_count)]
    remaining = graph.event_count
    while remaining:
        progressed = False
        for p in range(graph.process_count):
            timeline = timelines[p]
            while cursors[p] < len(timeline):
                event = timeline[cursors[p]]
                d = depth[(p, event.index - 1)] + 1 if event.index > 1 else 0
                incoming = graph.relation_to(event.coord)
                if incoming is not None:
                    src_depth = depth.get(incoming.src)
                    if src_depth is None:
                        break
                    d = max(d, src_depth + 1)
                depth[event.coord] = d
                cursors[p] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            for p in range(graph.process_count):
                for event in timelines[p][cursors[p] :]:
                    prev = depth.get((p, event.index - 1), -1)
                    depth[event.coord] = prev + 1
                    remaining -= 1
            break
    return depth


def _anomaly_classes(anomalies: Iterable[Anomaly]) -> dict[Coord, str]:
    """First anomaly wins per coordinate; detectors do not overlap."""
    classes: dict[Coord, str] = {}
    for anomaly in anomalies:
        for coord in anomaly.events:
            classes.setdefault(coord, CLASS_BY_ANOMALY[anomaly.kind])
    return classes


def _collapsed_coords(
    runs: Sequence[PatternRun], anomalous: set[Coord]
) -> tuple[set[Coord], list[tuple[PatternRun, list]]]:
    """Event coords hidden by collapsing, and per-run collapsed groups."""
    hidden: set[Coord] = set()
    blocks: list[tuple[PatternRun, list]] = []
    for run in runs:
        collapsed = [
            occ
            for occ in run.occurrences[1:]
            if not any(coord in anomalous for coord in occ.events)
        ]
        if not collapsed:
            continue
        blocks.append((run, collapsed))
        for occ in collapsed:
            hidden.update(occ.events)
    return hidden, blocks


def emit_svg(
    graph: EventGraph,
    lay: Layout,
    anomalies: Sequence[Anomaly] = (),
    runs: Sequence[PatternRun] = (),
    options: RenderOptions = RenderOptions(),
) -> str:
    """Deterministic SVG text for the graph under the given layout."""
    classes = _anomaly_classes(anomalies)
    hidden: set[Coord] = set()
    blocks: list[tuple[PatternRun, list]] = []
    if options.collapse:
        hidden, blocks = _collapsed_coords(runs, set(classes))

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(lay.width)}" '
        f'height="{_num(lay.height)}" viewBox="0 0 {_num(lay.width)} {_num(lay.height)}">'
    )
    out.append(f"<style>{STYLE}</style>")
    out.append(
        '<defs><marker id="head" orient="auto" markerWidth="8" markerHeight="8" '
        'refX="7" refY="3"><path d="M0,0 L7,3 L0,6 Z" fill="context-stroke"/>'
        "</marker></defs>"
    )

    for p in range(graph.process_count):
        y = _num(lay.lane_y[p])
        out.append(
            f'<line class="lane" x1="{MARGIN_X // 2}" y1="{y}" '
            f'x2="{_num(lay.width - MARGIN_X // 2)}" y2="{y}"/>'
        )
        out.append(
            f'<text class="lane-label" x="8" y="{_num(lay.lane_y[p] + 4)}">'
            f"P{p}</text>"
        )

    for run, collapsed in blocks:
        xs = [lay.event_x[c] for occ in collapsed for c in occ.events]
        ys = [lay.lane_y[c[0]] for occ in collapsed for c in occ.events]
        x0, x1 = min(xs) - EVENT_RADIUS * 2, max(xs) + EVENT_RADIUS * 2
        y0, y1 = min(ys) - EVENT_RADIUS * 3, max(ys) + EVENT_RADIUS * 3
        out.append(
            f'<rect class="collapse-block" x="{_num(x0)}" y="{_num(y0)}" '
            f'width="{_num(x1 - x0)}" height="{_num(y1 - y0)}"/>'
        )
        label = f"{run.template} ×{len(collapsed)}"
        out.append(
            f'<text class="collapse-label" x="{_num(x0 + 4)}" y="{_num(y0 - 4)}">'
            f"{escape(label)}</text>"
        )

    for relation in graph.relations():
        if relation.src in hidden or relation.dst in hidden:
            continue
        cls = "arrow"
        extra = classes.get(relation.src)
        if extra == "length-mismatch" and classes.get(relation.dst) == extra:
            cls = "arrow length-mismatch"
        out.append(
            f'<line class="{cls}" x1="{_num(lay.event_x[relation.src])}" '
            f'y1="{_num(lay.lane_y[relation.src_process])}" '
            f'x2="{_num(lay.event_x[relation.dst])}" '
            f'y2="{_num(lay.lane_y[relation.dst_process])}" marker-end="url(#head)"/>'
        )

    for event in graph.events():
        if event.coord in hidden:
            continue
        cls = "event"
        extra = classes.get(event.coord)
        if extra:
            cls = f"event {extra}"
        title = escape(event_to_record(event))
        out.append(
            f'<circle class="{cls}" cx="{_num(lay.event_x[event.coord])}" '
            f'cy="{_num(lay.lane_y[event.process])}" r="{EVENT_RADIUS}">'
            f"<title>{title}</title></circle>"
        )

    out.append("</svg>")
    return "\n".join(out)


def _num(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return f"{value:g}"


def view_document(
    graph: EventGraph,
    anomalies: Sequence[Anomaly] = (),
    runs: Sequence[PatternRun] = (),
) -> dict:
    """The view as a plain dict with stable key order."""
    events = []
    for event in graph.events():
        rec: dict[str, object] = {"p": event.process, "i": event.index}
        if event.kind in KIND_NAMES:
            rec["kind"] = KIND_NAMES[event.kind]
        else:
            rec["kind_code"] = event.kind
        rec["attrs"] = {k: event.attrs[k] for k in sorted(event.attrs)}
        events.append(rec)
    relations = [
        {"sp": r.src_process, "si": r.src_index, "dp": r.dst_process, "di": r.dst_index}
        for r in graph.relations()
    ]
    anomaly_docs = [
        {
            "kind": a.kind,
            "events": [list(c) for c in a.events],
            "details": {k: a.details[k] for k in sorted(a.details)},
            "severity": a.severity,
        }
        for a in anomalies
    ]
    run_docs = [
        {
            "template": run.template,
            "binding": list(run.binding),
            "stride": run.stride,
            "occurrences": [
                {"base": list(o.base_index), "events": [list(c) for c in o.events]}
                for o in run.occurrences
            ],
            "irregularities": [
                {
                    "expected_base": list(irr.expected_base),
                    "reason": irr.reason,
                    "anomalies": list(irr.anomaly_indexes),
                }
                for irr in run.irregularities
            ],
        }
        for run in runs
    ]
    return {
        "processes": graph.process_count,
        "events": events,
        "relations": relations,
        "anomalies": anomaly_docs,
        "runs": run_docs,
    }


def emit_json(
    graph: EventGraph,
    anomalies: Sequence[Anomaly] = (),
    runs: Sequence[PatternRun] = (),
) -> str:
    """Byte-stable JSON rendering of the view document."""
    return json.dumps(view_document(graph, anomalies, runs), separators=(",", ":"))
