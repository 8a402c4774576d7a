"""Synthetic trace generation with labeled fault injection.

Three scenarios:

ring
    Every iteration, each process sends to its right neighbour and
    receives from its left one.  Fully matched.

simple-exchange-loop
    Processes are paired (0,1), (2,3), ...; each iteration both members
    of a pair send to and receive from each other (the four-event
    exchange the pattern module ships a template for).  The only
    scenario that accepts fault injection.

random
    Seeded random pairing per iteration; each pair performs one
    exchange.  With an odd process count one process idles per round.

Messages carry tag = iteration number, so matching stays per-iteration
even when a fault renumbers part of a timeline.

Faults rewrite one designated iteration:

LengthMismatch(iteration, pair)
    The pair's first process receives with a different len than was
    sent.  Matching still succeeds; the pairwise check flags it.

WrongDestination(iteration, process)
    That process's send goes to the wrong process, so the send and the
    intended partner's receive both stay pending.

DropIteration(iteration)
    Per pair, the first process skips the iteration entirely (its later
    events renumber down), while the partner still sends and receives:
    two pendings per pair, and a hole where pattern matching expects an
    occurrence.

Every injected fault is recorded in a GroundTruth alongside the trace,
so tests can check analysis output against exact coordinates.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Union

from .ingest import TRACE_FORMAT_VERSION, event_to_record
from .model import KIND_RECEIVE, KIND_SEND, Coord, Event

__all__ = [
    "InvalidSpec",
    "LengthMismatch",
    "WrongDestination",
    "DropIteration",
    "Fault",
    "SyntheticSpec",
    "MismatchTruth",
    "GroundTruth",
    "SCENARIOS",
    "PAYLOAD_LEN",
    "MISMATCH_LEN",
    "generate_synthetic",
    "generate_labeled",
]

SCENARIOS = ("ring", "simple-exchange-loop", "random")

PAYLOAD_LEN = 8
MISMATCH_LEN = 4


class InvalidSpec(Exception):
    pass


@dataclass(frozen=True)
class LengthMismatch:
    iteration: int
    pair: int = 0


@dataclass(frozen=True)
class WrongDestination:
    iteration: int
    process: int = 0


@dataclass(frozen=True)
class DropIteration:
    iteration: int


Fault = Union[LengthMismatch, WrongDestination, DropIteration]


@dataclass(frozen=True)
class SyntheticSpec:
    scenario: str
    process_count: int
    iterations: int
    faults: tuple[Fault, ...] = ()


@dataclass(frozen=True)
class MismatchTruth:
    """Coordinates and byte counts of one injected length mismatch."""

    send: Coord
    recv: Coord
    send_len: int
    recv_len: int


@dataclass
class GroundTruth:
    """What analysis must find, recorded while generating."""

    mismatches: list[MismatchTruth] = field(default_factory=list)
    pending_sends: list[Coord] = field(default_factory=list)
    pending_receives: list[Coord] = field(default_factory=list)
    dropped_iterations: list[int] = field(default_factory=list)


def validate_spec(spec: SyntheticSpec) -> None:
    if spec.scenario not in SCENARIOS:
        raise InvalidSpec(f"unknown scenario {spec.scenario!r}; choose from {SCENARIOS}")
    if spec.process_count < 2:
        raise InvalidSpec("process_count must be at least 2")
    if spec.iterations < 1:
        raise InvalidSpec("iterations must be at least 1")
    if spec.scenario == "simple-exchange-loop" and spec.process_count % 2:
        raise InvalidSpec("simple-exchange-loop pairs processes; process_count must be even")
    if spec.faults and spec.scenario != "simple-exchange-loop":
        raise InvalidSpec("faults are defined only for the simple-exchange-loop scenario")
    seen_iterations: set[int] = set()
    for fault in spec.faults:
        if not 1 <= fault.iteration <= spec.iterations:
            raise InvalidSpec(
                f"fault iteration {fault.iteration} outside 1..{spec.iterations}"
            )
        # One fault per iteration keeps every injected coordinate exact;
        # overlapping rewrites would interfere.
        if fault.iteration in seen_iterations:
            raise InvalidSpec(f"multiple faults target iteration {fault.iteration}")
        seen_iterations.add(fault.iteration)
        if isinstance(fault, LengthMismatch) and not 0 <= fault.pair < spec.process_count // 2:
            raise InvalidSpec(f"pair {fault.pair} out of range")
        if isinstance(fault, WrongDestination) and not 0 <= fault.process < spec.process_count:
            raise InvalidSpec(f"process {fault.process} out of range")


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> str:
    """Render a synthetic trace as line-oriented JSON text."""
    text, _ = generate_labeled(spec, seed)
    return text


def generate_labeled(spec: SyntheticSpec, seed: int = 0) -> tuple[str, GroundTruth]:
    """Like generate_synthetic, but also returns the injected ground truth."""
    validate_spec(spec)
    if spec.scenario == "ring":
        events, truth = _ring(spec)
    elif spec.scenario == "simple-exchange-loop":
        events, truth = _exchange_loop(spec)
    else:
        events, truth = _random_pairs(spec, seed)
    header = json.dumps(
        {"dewiz_trace": TRACE_FORMAT_VERSION, "processes": spec.process_count},
        separators=(",", ":"),
    )
    lines = [header] + [event_to_record(event) for event in events]
    return "\n".join(lines) + "\n", truth


class _Emitter:
    """Appends events with per-process contiguous indices."""

    def __init__(self, process_count: int):
        self.events: list[Event] = []
        self._next = [1] * process_count

    def send(self, p: int, dst: int, tag: int, length: int) -> Coord:
        return self._emit(p, KIND_SEND, {"dst": dst, "len": length, "tag": tag})

    def receive(self, p: int, src: int, tag: int, length: int) -> Coord:
        return self._emit(p, KIND_RECEIVE, {"src": src, "len": length, "tag": tag})

    def _emit(self, p: int, kind: int, attrs: dict) -> Coord:
        event = Event(process=p, index=self._next[p], kind=kind, attrs=attrs)
        self._next[p] += 1
        self.events.append(event)
        return event.coord


def _ring(spec: SyntheticSpec) -> tuple[list[Event], GroundTruth]:
    n = spec.process_count
    out = _Emitter(n)
    for it in range(1, spec.iterations + 1):
        for p in range(n):
            out.send(p, (p + 1) % n, it, PAYLOAD_LEN)
        for p in range(n):
            out.receive(p, (p - 1) % n, it, PAYLOAD_LEN)
    return out.events, GroundTruth()


def _random_pairs(spec: SyntheticSpec, seed: int) -> tuple[list[Event], GroundTruth]:
    rng = random.Random(seed)
    out = _Emitter(spec.process_count)
    for it in range(1, spec.iterations + 1):
        procs = list(range(spec.process_count))
        rng.shuffle(procs)
        for slot in range(0, spec.process_count - spec.process_count % 2, 2):
            _emit_exchange(out, procs[slot], procs[slot + 1], it)
    return out.events, GroundTruth()


def _emit_exchange(out: _Emitter, a: int, b: int, tag: int) -> None:
    out.send(a, b, tag, PAYLOAD_LEN)
    out.send(b, a, tag, PAYLOAD_LEN)
    out.receive(a, b, tag, PAYLOAD_LEN)
    out.receive(b, a, tag, PAYLOAD_LEN)


def _exchange_loop(spec: SyntheticSpec) -> tuple[list[Event], GroundTruth]:
    n = spec.process_count
    out = _Emitter(n)
    truth = GroundTruth()
    by_iteration: dict[int, Fault] = {f.iteration: f for f in spec.faults}

    for it in range(1, spec.iterations + 1):
        fault = by_iteration.get(it)
        if isinstance(fault, DropIteration):
            truth.dropped_iterations.append(it)
        for m in range(n // 2):
            a, b = 2 * m, 2 * m + 1
            if isinstance(fault, DropIteration):
                # a skips the round; b still talks to the void.
                truth.pending_sends.append(out.send(b, a, it, PAYLOAD_LEN))
                truth.pending_receives.append(out.receive(b, a, it, PAYLOAD_LEN))
                continue
            if isinstance(fault, WrongDestination) and fault.process in (a, b):
                _emit_wrong_destination(out, truth, a, b, fault.process, it, n)
                continue
            if isinstance(fault, LengthMismatch) and fault.pair == m:
                out.send(a, b, it, PAYLOAD_LEN)
                send_b = out.send(b, a, it, PAYLOAD_LEN)
                recv_a = out.receive(a, b, it, MISMATCH_LEN)
                out.receive(b, a, it, PAYLOAD_LEN)
                truth.mismatches.append(
                    MismatchTruth(send_b, recv_a, PAYLOAD_LEN, MISMATCH_LEN)
                )
                continue
            _emit_exchange(out, a, b, it)
    truth.pending_sends.sort()
    truth.pending_receives.sort()
    return out.events, truth


def _emit_wrong_destination(
    out: _Emitter,
    truth: GroundTruth,
    a: int,
    b: int,
    culprit: int,
    it: int,
    n: int,
) -> None:
    partner = culprit ^ 1
    stray_dst = (partner + 1) % n
    coords = {}
    coords[a, "send"] = out.send(a, stray_dst if culprit == a else b, it, PAYLOAD_LEN)
    coords[b, "send"] = out.send(b, stray_dst if culprit == b else a, it, PAYLOAD_LEN)
    coords[a, "recv"] = out.receive(a, b, it, PAYLOAD_LEN)
    coords[b, "recv"] = out.receive(b, a, it, PAYLOAD_LEN)
    truth.pending_sends.append(coords[culprit, "send"])
    truth.pending_receives.append(coords[partner, "recv"])
