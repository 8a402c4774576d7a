"""End-to-end plumbing shared by the CLI and the networked stages.

Whether events arrive from a trace file or over the wire, the same
functions build the graph and the report, which is what makes the
distributed and in-process paths byte-identical: both end in
build_report on equal inputs.
"""

from __future__ import annotations

from typing import IO, Iterable, Sequence

from .failures import run_failure_checks
from .ingest import MessageMatcher, PendingReport, derive_pending_report, read_trace
from .model import Event, EventGraph, Relation
from .patterns import (
    PatternTemplate,
    builtin_simple_exchange,
    detect_runs,
    find_irregularities,
    match_template,
)
from .render import RenderOptions, emit_json, emit_svg, layout
from .report import AnalysisReport, serialize_report

__all__ = [
    "load_graph",
    "graph_from_stream",
    "build_report",
    "report_from_graph",
    "render_svg",
    "render_view",
]


def load_graph(source: Iterable[str] | IO[str]) -> tuple[EventGraph, list[Relation], PendingReport]:
    """Trace text to frozen graph, matched relations, and pendings."""
    header, events = read_trace(source)
    graph = EventGraph(header.process_count)
    matcher = MessageMatcher()
    relations: list[Relation] = []
    for event in events:
        graph.add_event(event)
        for relation in matcher.feed(event):
            relations.append(relation)
            graph.add_relation(relation)
    pending = matcher.finish()
    graph.freeze()
    return graph, relations, pending


def graph_from_stream(
    process_count: int, events: Iterable[Event], relations: Iterable[Relation]
) -> tuple[EventGraph, list[Relation], PendingReport]:
    """Rebuild the graph a producer streamed over the wire.

    Relations arrive pre-matched, so pendings are derived from what the
    relation set leaves uncovered; the result matches what the matcher
    would have reported at the producer.
    """
    graph = EventGraph(process_count)
    for event in events:
        graph.add_event(event)
    kept: list[Relation] = []
    for relation in relations:
        graph.add_relation(relation)
        kept.append(relation)
    graph.freeze()
    return graph, kept, derive_pending_report(graph, kept)


def build_report(
    graph: EventGraph,
    relations: Sequence[Relation],
    pending: PendingReport,
    templates: Sequence[PatternTemplate] | None = None,
) -> AnalysisReport:
    """Failure checks plus pattern runs, assembled into one report."""
    anomalies = run_failure_checks(graph, relations, pending)
    if templates is None:
        templates = (builtin_simple_exchange(),)
    runs = []
    for template in templates:
        runs.extend(detect_runs(match_template(graph, relations, template)))
    runs = find_irregularities(runs, anomalies)
    return AnalysisReport(
        process_count=graph.process_count,
        event_count=graph.event_count,
        relation_count=graph.relation_count,
        anomalies=tuple(anomalies),
        runs=tuple(runs),
        pending_sends=tuple(pending.pending_sends),
        pending_receives=tuple(pending.pending_receives),
    )


def report_from_graph(
    graph: EventGraph,
    relations: Sequence[Relation],
    templates: Sequence[PatternTemplate] | None = None,
) -> AnalysisReport:
    """build_report with pendings derived from the relation set."""
    return build_report(graph, relations, derive_pending_report(graph, relations), templates)


def render_svg(graph: EventGraph, report: AnalysisReport, collapse: bool = False) -> str:
    return emit_svg(
        graph,
        layout(graph),
        anomalies=report.anomalies,
        runs=report.runs,
        options=RenderOptions(collapse=collapse),
    )


def render_view(graph: EventGraph, report: AnalysisReport) -> str:
    return emit_json(graph, anomalies=report.anomalies, runs=report.runs)


def report_text(report: AnalysisReport) -> str:
    return serialize_report(report)
