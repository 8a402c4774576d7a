"""Communication failure checks.

Two detectors over a matched graph: pairwise length comparison on
matched send/receive pairs, and isolation of events the matcher left
pending.  A pending blocking receive is a process that would wait
forever, so pendings rank as errors; a length mismatch is reported at
warning severity since short reads can be intentional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .ingest import PendingReport
from .model import AttrValue, Coord, EventGraph, Relation

__all__ = [
    "MissingAttr",
    "SEVERITY_WARNING",
    "SEVERITY_ERROR",
    "ANOMALY_KINDS",
    "Anomaly",
    "check_length_mismatch",
    "find_isolated_events",
    "run_failure_checks",
]

SEVERITY_WARNING = "warning"
SEVERITY_ERROR = "error"

ANOMALY_KINDS = ("LengthMismatch", "IsolatedSend", "IsolatedReceive")


class MissingAttr(Exception):
    def __init__(self, coord: Coord, attr: str):
        self.coord = coord
        self.attr = attr
        super().__init__(f"event {coord} lacks required attribute {attr!r}")


@dataclass(frozen=True)
class Anomaly:
    kind: str
    events: tuple[Coord, ...]
    details: Mapping[str, AttrValue] = field(default_factory=dict)
    severity: str = SEVERITY_ERROR

    def __post_init__(self):
        if self.kind not in ANOMALY_KINDS:
            raise ValueError(f"unknown anomaly kind {self.kind!r}")
        expected = 2 if self.kind == "LengthMismatch" else 1
        if len(self.events) != expected:
            raise ValueError(f"{self.kind} carries {expected} coordinate(s)")


def check_length_mismatch(graph: EventGraph, relations: Iterable[Relation]) -> list[Anomaly]:
    """One anomaly per matched pair whose len attributes disagree."""
    anomalies: list[Anomaly] = []
    for relation in sorted(relations, key=lambda r: r.src):
        send_len = _require_len(graph, relation.src)
        recv_len = _require_len(graph, relation.dst)
        if send_len != recv_len:
            anomalies.append(
                Anomaly(
                    kind="LengthMismatch",
                    events=(relation.src, relation.dst),
                    details={"send_len": send_len, "recv_len": recv_len},
                    severity=SEVERITY_WARNING,
                )
            )
    return anomalies


def _require_len(graph: EventGraph, coord: Coord) -> int:
    event = graph.event_at(*coord)
    value = event.attrs.get("len") if event is not None else None
    if not isinstance(value, int):
        raise MissingAttr(coord, "len")
    return value


def find_isolated_events(pending: PendingReport) -> list[Anomaly]:
    """One anomaly per pending endpoint, sends first, coordinate order."""
    anomalies = [
        Anomaly(kind="IsolatedSend", events=(coord,)) for coord in sorted(pending.pending_sends)
    ]
    anomalies.extend(
        Anomaly(kind="IsolatedReceive", events=(coord,))
        for coord in sorted(pending.pending_receives)
    )
    return anomalies


def run_failure_checks(
    graph: EventGraph, relations: Iterable[Relation], pending: PendingReport
) -> list[Anomaly]:
    """Both detectors, mismatches first; ordering deterministic."""
    return check_length_mismatch(graph, relations) + find_isolated_events(pending)
