"""Event-graph data model: events, message relations, vector clocks, causality.

An event graph records one observed program execution: per-process ordered
event timelines (sequential order) plus cross-process edges linking each
send to its matching receive (concurrent order).  Causality between any two
events is the transitive closure of those two edge families, decided here
through Fidge-style vector clocks.

A graph is built incrementally (``add_event`` / ``add_relation``), then
``freeze()``-d.  Frozen graphs are immutable and safe to share between
threads without locking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

__all__ = [
    "KIND_SEND",
    "KIND_RECEIVE",
    "KIND_LOCK",
    "KIND_UNLOCK",
    "KIND_READ",
    "KIND_WRITE",
    "KIND_NAMES",
    "KIND_CODES",
    "USER_KIND_MIN",
    "AttrValue",
    "Coord",
    "Event",
    "Relation",
    "VectorClock",
    "EventGraph",
    "GraphError",
    "IndexGap",
    "DuplicateEvent",
    "KindReserved",
    "MissingRequiredAttr",
    "UnknownProcess",
    "UnknownEndpoint",
    "KindMismatch",
    "EndpointReused",
    "SelfProcess",
    "GraphFrozen",
    "ValidationFailed",
    "CausalCycle",
    "UnknownEvent",
    "ClocksMissing",
    "validate_attrs",
]

# Canonical event-kind codes.  1-6 are reserved, 7-999 rejected, >=1000
# user-defined (16-bit range).
KIND_SEND = 1
KIND_RECEIVE = 2
KIND_LOCK = 3
KIND_UNLOCK = 4
KIND_READ = 5
KIND_WRITE = 6
USER_KIND_MIN = 1000
KIND_MAX = 0xFFFF

KIND_NAMES: dict[int, str] = {
    KIND_SEND: "send",
    KIND_RECEIVE: "receive",
    KIND_LOCK: "lock",
    KIND_UNLOCK: "unlock",
    KIND_READ: "read",
    KIND_WRITE: "write",
}
KIND_CODES: dict[str, int] = {name: code for code, name in KIND_NAMES.items()}

# Attribute values are tagged scalars on the wire; in memory they are plain
# Python ints (64-bit signed or unsigned range), floats, or strings.
AttrValue = int | float | str

# (process, index) coordinate of one event.
Coord = tuple[int, int]

MAX_ATTR_KEY_BYTES = 255
MAX_ATTR_STR_BYTES = 65535
U32_MAX = 0xFFFFFFFF
U64_MAX = 0xFFFFFFFFFFFFFFFF
I64_MIN = -(1 << 63)


class GraphError(Exception):
    """Base class for event-graph model errors."""


class IndexGap(GraphError):
    """Event index is not the next contiguous index on its process."""


class DuplicateEvent(GraphError):
    """(process, index) already present in the graph."""


class KindReserved(GraphError):
    """Event kind code outside the allowed ranges (1-6 or >=1000)."""


class MissingRequiredAttr(GraphError):
    """Send/receive event lacks a required attribute."""


class UnknownProcess(GraphError):
    """Event names a process outside the graph's declared range."""


class UnknownEndpoint(GraphError):
    """Relation endpoint is not an event of the graph."""


class KindMismatch(GraphError):
    """Relation source is not a send, or destination not a receive."""


class EndpointReused(GraphError):
    """Relation endpoint already participates in another relation."""


class SelfProcess(GraphError):
    """Relation connects two events on the same process."""


class GraphFrozen(GraphError):
    """Mutation attempted on a frozen graph."""


class ValidationFailed(GraphError):
    """Freeze-time validation found violations."""

    def __init__(self, violations: list[GraphError]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class CausalCycle(GraphError):
    """Relation set makes an event depend on its own effects."""


class UnknownEvent(GraphError):
    """Causality query names an event not in the graph."""


class ClocksMissing(GraphError):
    """Causality query on a graph without assigned vector clocks."""


def _valid_kind(code: int) -> bool:
    return 1 <= code <= 6 or USER_KIND_MIN <= code <= KIND_MAX


def validate_attrs(attrs: Mapping[str, AttrValue]) -> None:
    """Check attribute names and values fit the wire-encodable ranges."""
    for key, value in attrs.items():
        if not isinstance(key, str) or len(key.encode("utf-8")) > MAX_ATTR_KEY_BYTES:
            raise ValueError(f"attribute name too long or not a string: {key!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ValueError(f"attribute {key!r} has unsupported value type {type(value).__name__}")
        if isinstance(value, int) and not (I64_MIN <= value <= U64_MAX):
            raise ValueError(f"attribute {key!r} outside 64-bit range")
        if isinstance(value, str) and len(value.encode("utf-8")) > MAX_ATTR_STR_BYTES:
            raise ValueError(f"attribute {key!r} string exceeds {MAX_ATTR_STR_BYTES} bytes")


@dataclass(frozen=True)
class Event:
    """One observed program action: (process, index, kind, attributes).

    ``index`` is 1-based and contiguous per process.  Semantic checks
    (kind ranges, required send/receive attributes) happen when the event
    is added to a graph, so events decoded off the wire can be represented
    before being judged.
    """

    process: int
    index: int
    kind: int
    attrs: Mapping[str, AttrValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0 <= self.process <= U32_MAX):
            raise ValueError(f"process {self.process} outside 32-bit unsigned range")
        if not (1 <= self.index <= U64_MAX):
            raise ValueError(f"index {self.index} must be positive (64-bit range)")
        if not (0 <= self.kind <= KIND_MAX):
            raise ValueError(f"kind {self.kind} outside 16-bit unsigned range")
        validate_attrs(self.attrs)
        object.__setattr__(self, "attrs", dict(self.attrs))

    @property
    def coord(self) -> Coord:
        return (self.process, self.index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Event):
            return NotImplemented
        return (
            self.process == other.process
            and self.index == other.index
            and self.kind == other.kind
            and self.attrs == other.attrs
        )

    def __hash__(self) -> int:
        return hash((self.process, self.index, self.kind))


@dataclass(frozen=True, order=True)
class Relation:
    """Concurrent-order edge from a send event to its matching receive."""

    src_process: int
    src_index: int
    dst_process: int
    dst_index: int

    def __post_init__(self) -> None:
        for process in (self.src_process, self.dst_process):
            if not (0 <= process <= U32_MAX):
                raise ValueError(f"process {process} outside 32-bit unsigned range")
        for index in (self.src_index, self.dst_index):
            if not (1 <= index <= U64_MAX):
                raise ValueError(f"index {index} must be positive (64-bit range)")

    @property
    def src(self) -> Coord:
        return (self.src_process, self.src_index)

    @property
    def dst(self) -> Coord:
        return (self.dst_process, self.dst_index)


@dataclass(frozen=True)
class VectorClock:
    """Per-event logical clock; component p counts events on process p in the
    causal past of the owning event (the event itself included)."""

    counters: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.counters)

    def __getitem__(self, i: int) -> int:
        return self.counters[i]

    def precedes(self, other: VectorClock) -> bool:
        """Componentwise <=, with at least one strict inequality."""
        strict = False
        for a, b in zip(self.counters, other.counters):
            if a > b:
                return False
            if a < b:
                strict = True
        return strict

    def concurrent_with(self, other: VectorClock) -> bool:
        return not self.precedes(other) and not other.precedes(self)


class EventGraph:
    """Per-process event timelines plus the send->receive relation set.

    Single-writer while under construction; immutable after ``freeze()``.
    """

    def __init__(self, process_count: int):
        if process_count < 1:
            raise ValueError("process_count must be positive")
        self.process_count = process_count
        self._timelines: list[list[Event]] = [[] for _ in range(process_count)]
        self._relations: dict[Coord, Relation] = {}  # keyed by src coord
        self._relation_dsts: dict[Coord, Relation] = {}
        self._clocks: dict[Coord, VectorClock] | None = None
        self._frozen = False

    # -- construction ---------------------------------------------------

    def add_event(self, event: Event) -> None:
        if self._frozen:
            raise GraphFrozen("cannot add events to a frozen graph")
        if not (0 <= event.process < self.process_count):
            raise UnknownProcess(
                f"process {event.process} not in declared range 0..{self.process_count - 1}"
            )
        if not _valid_kind(event.kind):
            raise KindReserved(f"kind code {event.kind} is reserved (valid: 1-6, >={USER_KIND_MIN})")
        timeline = self._timelines[event.process]
        if event.index <= len(timeline):
            raise DuplicateEvent(f"event ({event.process},{event.index}) already present")
        if event.index != len(timeline) + 1:
            raise IndexGap(
                f"event ({event.process},{event.index}) skips index {len(timeline) + 1}"
            )
        if event.kind == KIND_SEND:
            self._require_attrs(event, ("dst", "len"))
        elif event.kind == KIND_RECEIVE:
            self._require_attrs(event, ("src", "len"))
        timeline.append(event)

    @staticmethod
    def _require_attrs(event: Event, names: tuple[str, ...]) -> None:
        for name in names:
            value = event.attrs.get(name)
            if value is None:
                raise MissingRequiredAttr(
                    f"{KIND_NAMES[event.kind]} event ({event.process},{event.index}) "
                    f"lacks required attribute {name!r}"
                )
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise MissingRequiredAttr(
                    f"attribute {name!r} of ({event.process},{event.index}) must be an unsigned integer"
                )

    def add_relation(self, relation: Relation) -> None:
        if self._frozen:
            raise GraphFrozen("cannot add relations to a frozen graph")
        existing = self._relations.get(relation.src)
        if existing == relation:
            return  # idempotent
        for err in self._relation_violations(relation):
            raise err
        self._relations[relation.src] = relation
        self._relation_dsts[relation.dst] = relation

    def _relation_violations(self, relation: Relation) -> Iterator[GraphError]:
        src = self.event_at(*relation.src)
        dst = self.event_at(*relation.dst)
        if src is None:
            yield UnknownEndpoint(f"relation source {relation.src} is not in the graph")
        if dst is None:
            yield UnknownEndpoint(f"relation destination {relation.dst} is not in the graph")
        if src is not None and src.kind != KIND_SEND:
            yield KindMismatch(f"relation source {relation.src} is not a send event")
        if dst is not None and dst.kind != KIND_RECEIVE:
            yield KindMismatch(f"relation destination {relation.dst} is not a receive event")
        if relation.src_process == relation.dst_process:
            yield SelfProcess(f"relation {relation} connects a process to itself")
        prior_src = self._relations.get(relation.src)
        if prior_src is not None and prior_src != relation:
            yield EndpointReused(f"send {relation.src} already matched by {prior_src}")
        prior_dst = self._relation_dsts.get(relation.dst)
        if prior_dst is not None and prior_dst != relation:
            yield EndpointReused(f"receive {relation.dst} already matched by {prior_dst}")

    def freeze(self) -> EventGraph:
        """Validate all relation invariants and make the graph immutable.

        Idempotent: freezing a frozen graph returns it unchanged.
        """
        if self._frozen:
            return self
        violations: list[GraphError] = []
        seen_src: set[Coord] = set()
        seen_dst: set[Coord] = set()
        for relation in self._relations.values():
            violations.extend(self._relation_violations_frozen(relation, seen_src, seen_dst))
        if violations:
            raise ValidationFailed(violations)
        self._frozen = True
        return self

    def _relation_violations_frozen(
        self, relation: Relation, seen_src: set[Coord], seen_dst: set[Coord]
    ) -> Iterator[GraphError]:
        yield from (
            v for v in self._relation_violations(relation) if not isinstance(v, EndpointReused)
        )
        if relation.src in seen_src:
            yield EndpointReused(f"send {relation.src} matched twice")
        if relation.dst in seen_dst:
            yield EndpointReused(f"receive {relation.dst} matched twice")
        seen_src.add(relation.src)
        seen_dst.add(relation.dst)

    # -- access ----------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    def timeline(self, process: int) -> tuple[Event, ...]:
        return tuple(self._timelines[process])

    def events(self) -> Iterator[Event]:
        """All events, ordered by (process, index)."""
        for timeline in self._timelines:
            yield from timeline

    def event_at(self, process: int, index: int) -> Event | None:
        if not (0 <= process < self.process_count):
            return None
        timeline = self._timelines[process]
        if not (1 <= index <= len(timeline)):
            return None
        return timeline[index - 1]

    @property
    def event_count(self) -> int:
        return sum(len(t) for t in self._timelines)

    def relations(self) -> tuple[Relation, ...]:
        """All relations, ordered by (src_process, src_index)."""
        return tuple(sorted(self._relations.values()))

    @property
    def relation_count(self) -> int:
        return len(self._relations)

    def relation_from(self, coord: Coord) -> Relation | None:
        return self._relations.get(coord)

    def relation_to(self, coord: Coord) -> Relation | None:
        return self._relation_dsts.get(coord)

    # -- causality --------------------------------------------------------

    def assign_vector_clocks(self) -> EventGraph:
        """Compute every event's vector clock.

        Walks events in dependency order (previous event on the same
        process, plus the matched send for a receive); each clock is the
        componentwise max of its dependencies with the own-process
        component incremented.  Deterministic.  Raises ``CausalCycle`` if
        the relation set is not causally orderable.
        """
        if not self._frozen:
            raise GraphFrozen("assign_vector_clocks requires a frozen graph")
        if self._clocks is not None:
            return self
        clocks: dict[Coord, VectorClock] = {}
        cursors = [0] * self.process_count  # events consumed per process
        remaining = self.event_count
        zero = (0,) * self.process_count
        while remaining:
            progressed = False
            for p in range(self.process_count):
                timeline = self._timelines[p]
                while cursors[p] < len(timeline):
                    event = timeline[cursors[p]]
                    prev = clocks[(p, event.index - 1)].counters if event.index > 1 else zero
                    matched = self._relation_dsts.get(event.coord)
                    if matched is not None:
                        send_clock = clocks.get(matched.src)
                        if send_clock is None:
                            break  # matched send not ordered yet
                        merged = tuple(max(a, b) for a, b in zip(prev, send_clock.counters))
                    else:
                        merged = prev
                    counters = list(merged)
                    counters[p] += 1
                    clocks[event.coord] = VectorClock(tuple(counters))
                    cursors[p] += 1
                    remaining -= 1
                    progressed = True
            if not progressed and remaining:
                raise CausalCycle("relation set is not causally orderable")
        self._clocks = clocks
        return self

    @property
    def clocks_assigned(self) -> bool:
        return self._clocks is not None

    def clock(self, process: int, index: int) -> VectorClock:
        if self._clocks is None:
            raise ClocksMissing("vector clocks have not been assigned")
        try:
            return self._clocks[(process, index)]
        except KeyError:
            raise UnknownEvent(f"no event ({process},{index}) in the graph") from None

    def happened_before(self, a: Coord, b: Coord) -> bool:
        """True iff event ``a`` causally precedes event ``b``.

        Irreflexive: an event never happens before itself.
        """
        if a == b:
            self.clock(*a)  # still validate existence / clock presence
            return False
        return self.clock(*a).precedes(self.clock(*b))

    def concurrent(self, a: Coord, b: Coord) -> bool:
        """True iff ``a`` and ``b`` are distinct and causally unordered."""
        if a == b:
            self.clock(*a)
            return False
        return self.clock(*a).concurrent_with(self.clock(*b))
