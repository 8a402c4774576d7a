"""Trace reading and send/receive matching.

Traces are line-oriented JSON (one object per line; grammar in
docs/trace-format.md).  The first record is the header::

    {"dewiz_trace": 1, "processes": N}

followed by event records::

    {"p": 0, "i": 1, "kind": "send", "attrs": {"dst": 1, "len": 8}}

Kind names map to the canonical codes; user-defined kinds are written as
{"kind_code": N} with N >= 1000.

Matching pairs the k-th send with the k-th receive on each (src, dst, tag)
channel, MPI point-to-point style: FIFO per channel, no wildcards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .model import (
    KIND_CODES,
    KIND_RECEIVE,
    KIND_SEND,
    USER_KIND_MIN,
    Coord,
    Event,
    EventGraph,
    Relation,
)

__all__ = [
    "TraceError",
    "BadHeader",
    "MalformedRecord",
    "UnknownKind",
    "TraceHeader",
    "ChannelKey",
    "PendingReport",
    "read_trace",
    "event_to_record",
    "MessageMatcher",
    "match_messages",
    "derive_pending_report",
]

TRACE_FORMAT_VERSION = 1


class TraceError(Exception):
    """Base class for trace-format errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class BadHeader(TraceError):
    pass


class MalformedRecord(TraceError):
    pass


class UnknownKind(TraceError):
    pass


@dataclass(frozen=True)
class TraceHeader:
    process_count: int
    format_version: int = TRACE_FORMAT_VERSION


@dataclass(frozen=True)
class ChannelKey:
    """FIFO matching key for point-to-point messages."""

    src: int
    dst: int
    tag: int


@dataclass
class PendingReport:
    """Send/receive events left unmatched after the stream ends."""

    pending_sends: list[Coord] = field(default_factory=list)
    pending_receives: list[Coord] = field(default_factory=list)


def read_trace(source: Iterable[str] | IO[str]) -> tuple[TraceHeader, Iterator[Event]]:
    """Parse a trace; returns the header and a lazy event iterator.

    Record-level errors are raised during iteration, tagged with their
    1-based line number.
    """
    lines = iter(source)
    try:
        first = next(lines)
    except StopIteration:
        raise BadHeader("empty trace", line=1) from None
    header = _parse_header(first)
    return header, _iter_events(lines)


def _parse_header(line: str) -> TraceHeader:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BadHeader(f"header is not valid JSON: {exc}", line=1) from exc
    if not isinstance(record, dict) or record.get("dewiz_trace") != TRACE_FORMAT_VERSION:
        raise BadHeader('first record must be {"dewiz_trace": 1, "processes": N}', line=1)
    processes = record.get("processes")
    if not isinstance(processes, int) or isinstance(processes, bool) or processes < 1:
        raise BadHeader('"processes" must be a positive integer', line=1)
    return TraceHeader(process_count=processes)


def _iter_events(lines: Iterator[str]) -> Iterator[Event]:
    for lineno, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        yield _parse_event(line, lineno)


def _parse_event(line: str, lineno: int) -> Event:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"not valid JSON: {exc}", line=lineno) from exc
    if not isinstance(record, dict):
        raise MalformedRecord("event record must be a JSON object", line=lineno)
    unknown = set(record) - {"p", "i", "kind", "kind_code", "attrs"}
    if unknown:
        raise MalformedRecord(f"unknown fields {sorted(unknown)}", line=lineno)

    process = record.get("p")
    index = record.get("i")
    for name, value in (("p", process), ("i", index)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise MalformedRecord(f'"{name}" must be a non-negative integer', line=lineno)

    kind = _parse_kind(record, lineno)

    attrs = record.get("attrs", {})
    if not isinstance(attrs, dict):
        raise MalformedRecord('"attrs" must be an object', line=lineno)
    for key, value in attrs.items():
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise MalformedRecord(
                f"attribute {key!r} must be a number or string", line=lineno
            )
    try:
        return Event(process=process, index=index, kind=kind, attrs=attrs)
    except ValueError as exc:
        raise MalformedRecord(str(exc), line=lineno) from exc


def _parse_kind(record: dict, lineno: int) -> int:
    has_name = "kind" in record
    has_code = "kind_code" in record
    if has_name == has_code:
        raise MalformedRecord('exactly one of "kind" or "kind_code" required', line=lineno)
    if has_name:
        name = record["kind"]
        code = KIND_CODES.get(name) if isinstance(name, str) else None
        if code is None:
            raise UnknownKind(f"unknown kind {name!r}", line=lineno)
        return code
    code = record["kind_code"]
    if not isinstance(code, int) or isinstance(code, bool) or not (
        USER_KIND_MIN <= code <= 0xFFFF
    ):
        raise UnknownKind(
            f'"kind_code" must be an integer in {USER_KIND_MIN}..65535, got {code!r}',
            line=lineno,
        )
    return code


def event_to_record(event: Event) -> str:
    """Serialize one event back to its canonical trace line."""
    record: dict[str, object] = {"p": event.process, "i": event.index}
    if event.kind in {v: k for k, v in KIND_CODES.items()}:
        record["kind"] = {v: k for k, v in KIND_CODES.items()}[event.kind]
    else:
        record["kind_code"] = event.kind
    record["attrs"] = {k: event.attrs[k] for k in sorted(event.attrs)}
    return json.dumps(record, sort_keys=False, separators=(",", ":"))


class MessageMatcher:
    """Incremental FIFO send/receive matcher.

    Feed events in stream order; a Relation comes back the moment its
    second endpoint arrives, so relations always trail both endpoints.
    Unmatched events remain as the pending report.
    """

    def __init__(self) -> None:
        self._sends: dict[ChannelKey, list[Coord]] = {}
        self._receives: dict[ChannelKey, list[Coord]] = {}

    def feed(self, event: Event) -> list[Relation]:
        if event.kind == KIND_SEND:
            key = ChannelKey(event.process, int(event.attrs["dst"]), int(event.attrs.get("tag", 0)))
            waiting = self._receives.get(key)
            if waiting:
                dst = waiting.pop(0)
                return [Relation(event.process, event.index, dst[0], dst[1])]
            self._sends.setdefault(key, []).append(event.coord)
        elif event.kind == KIND_RECEIVE:
            key = ChannelKey(int(event.attrs["src"]), event.process, int(event.attrs.get("tag", 0)))
            waiting = self._sends.get(key)
            if waiting:
                src = waiting.pop(0)
                return [Relation(src[0], src[1], event.process, event.index)]
            self._receives.setdefault(key, []).append(event.coord)
        return []

    def finish(self) -> PendingReport:
        report = PendingReport()
        for coords in self._sends.values():
            report.pending_sends.extend(coords)
        for coords in self._receives.values():
            report.pending_receives.extend(coords)
        report.pending_sends.sort()
        report.pending_receives.sort()
        return report


def match_messages(
    events: Iterable[Event], header: TraceHeader | None = None
) -> tuple[list[Relation], PendingReport]:
    """Match a whole event stream; returns (relations, pending report).

    Mismatches are data, not errors: anything unmatched lands in the
    pending report.
    """
    matcher = MessageMatcher()
    relations: list[Relation] = []
    for event in events:
        relations.extend(matcher.feed(event))
    return relations, matcher.finish()


def derive_pending_report(graph: EventGraph, relations: Iterable[Relation]) -> PendingReport:
    """Reconstruct the pending report from a graph and its relation set.

    Matched relations and pending events partition the send/receive
    events, so the report is recoverable without replaying the matcher;
    consumers fed relations over the wire use this path.
    """
    matched_sends = {r.src for r in relations}
    matched_receives = {r.dst for r in relations}
    report = PendingReport()
    for event in graph.events():
        if event.kind == KIND_SEND and event.coord not in matched_sends:
            report.pending_sends.append(event.coord)
        elif event.kind == KIND_RECEIVE and event.coord not in matched_receives:
            report.pending_receives.append(event.coord)
    report.pending_sends.sort()
    report.pending_receives.sort()
    return report
