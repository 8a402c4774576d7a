"""Pattern templates, occurrence matching, and loop-run detection.

A template is a tiny parameterized event graph: placeholder processes,
events at relative index offsets, and edges that are either sequential
(same timeline, class S) or cross-process message edges (class C).  An
occurrence is an injective assignment of placeholders to real processes
plus a starting index per placeholder under which every template event
and edge is present in the graph.

Matching anchors on actual relations: each C edge in the template can
only be realized by an explicit Relation, so candidate bindings come
from walking the relation list rather than enumerating all process
combinations.  Placeholders untouched by C edges fall back to full
enumeration, which keeps matching complete for relation-free templates.

Runs group same-binding occurrences into arithmetic progressions of
their base indices.  The stride is the modal consecutive gap; holes in
the progression surface as irregularities, which a later pass can
reclassify as perturbed when a failure anomaly sits inside the hole.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .failures import Anomaly
from .model import (
    KIND_CODES,
    KIND_NAMES,
    Coord,
    EventGraph,
    Relation,
)

__all__ = [
    "TemplateInvalid",
    "EDGE_SEQUENTIAL",
    "EDGE_CROSS",
    "TemplateEvent",
    "TemplateRelation",
    "PatternTemplate",
    "PatternOccurrence",
    "Irregularity",
    "PatternRun",
    "builtin_simple_exchange",
    "load_template",
    "load_template_file",
    "match_template",
    "detect_runs",
    "find_irregularities",
]

EDGE_SEQUENTIAL = "S"
EDGE_CROSS = "C"

# A single hole wider than this many strides splits the run instead of
# flooding it with missing-occurrence records.
MAX_HOLE_STEPS = 8


class TemplateInvalid(Exception):
    pass


@dataclass(frozen=True)
class TemplateEvent:
    placeholder: int
    offset: int
    kind: int


@dataclass(frozen=True)
class TemplateRelation:
    src: tuple[int, int]  # (placeholder, offset)
    dst: tuple[int, int]
    edge_class: str


@dataclass(frozen=True)
class PatternTemplate:
    name: str
    placeholder_process_count: int
    events: tuple[TemplateEvent, ...]
    relations: tuple[TemplateRelation, ...]

    def max_offset(self, placeholder: int) -> int:
        return max(te.offset for te in self.events if te.placeholder == placeholder)


@dataclass(frozen=True)
class PatternOccurrence:
    template: str
    binding: tuple[int, ...]      # process per placeholder
    base_index: tuple[int, ...]   # starting index per placeholder
    events: tuple[Coord, ...]     # concrete coordinates, sorted


@dataclass(frozen=True)
class Irregularity:
    expected_base: tuple[int, ...]
    reason: str  # "missing" | "perturbed"
    anomaly_indexes: tuple[int, ...] = ()  # positions in the anomaly list passed alongside


@dataclass(frozen=True)
class PatternRun:
    template: str
    binding: tuple[int, ...]
    occurrences: tuple[PatternOccurrence, ...]
    stride: int
    irregularities: tuple[Irregularity, ...] = ()


def builtin_simple_exchange() -> PatternTemplate:
    """Two processes that send to and receive from each other."""
    send = KIND_CODES["send"]
    receive = KIND_CODES["receive"]
    return PatternTemplate(
        name="simple-exchange",
        placeholder_process_count=2,
        events=(
            TemplateEvent(0, 0, send),
            TemplateEvent(0, 1, receive),
            TemplateEvent(1, 0, send),
            TemplateEvent(1, 1, receive),
        ),
        relations=(
            TemplateRelation((0, 0), (0, 1), EDGE_SEQUENTIAL),
            TemplateRelation((1, 0), (1, 1), EDGE_SEQUENTIAL),
            TemplateRelation((0, 0), (1, 1), EDGE_CROSS),
            TemplateRelation((1, 0), (0, 1), EDGE_CROSS),
        ),
    )


def validate_template(template: PatternTemplate) -> None:
    """Raise TemplateInvalid unless the template is well-formed."""
    if not template.name:
        raise TemplateInvalid("template name must be non-empty")
    if template.placeholder_process_count < 1:
        raise TemplateInvalid("placeholder_process_count must be >= 1")
    declared: set[tuple[int, int]] = set()
    offsets_by_ph: dict[int, list[int]] = {}
    for te in template.events:
        if not 0 <= te.placeholder < template.placeholder_process_count:
            raise TemplateInvalid(f"event references undeclared placeholder {te.placeholder}")
        if te.offset < 0:
            raise TemplateInvalid("relative offsets must be >= 0")
        key = (te.placeholder, te.offset)
        if key in declared:
            raise TemplateInvalid(f"duplicate template event at {key}")
        declared.add(key)
        offsets_by_ph.setdefault(te.placeholder, []).append(te.offset)
    for ph in range(template.placeholder_process_count):
        offsets = offsets_by_ph.get(ph)
        if not offsets:
            raise TemplateInvalid(f"placeholder {ph} declares no events")
        if min(offsets) != 0:
            raise TemplateInvalid(f"placeholder {ph} must have an event at offset 0")
    for tr in template.relations:
        for end in (tr.src, tr.dst):
            if end not in declared:
                raise TemplateInvalid(f"relation endpoint {end} is not a declared event")
        if tr.edge_class == EDGE_SEQUENTIAL:
            if tr.src[0] != tr.dst[0]:
                raise TemplateInvalid("S edges must stay on one placeholder")
            if tr.src[1] >= tr.dst[1]:
                raise TemplateInvalid("S edges must point forward along the timeline")
        elif tr.edge_class == EDGE_CROSS:
            if tr.src[0] == tr.dst[0]:
                raise TemplateInvalid("C edges must cross placeholders")
        else:
            raise TemplateInvalid(f"unknown edge class {tr.edge_class!r}")


def load_template(text: str) -> PatternTemplate:
    """Parse a template from its JSON document form."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TemplateInvalid(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TemplateInvalid("template document must be a JSON object")
    unknown = set(doc) - {"name", "placeholders", "events", "relations"}
    if unknown:
        raise TemplateInvalid(f"unknown fields {sorted(unknown)}")
    try:
        events = tuple(
            TemplateEvent(int(ph), int(off), _kind_code(kind))
            for ph, off, kind in doc["events"]
        )
        relations = tuple(
            TemplateRelation(
                (int(r["src"][0]), int(r["src"][1])),
                (int(r["dst"][0]), int(r["dst"][1])),
                str(r["class"]),
            )
            for r in doc.get("relations", [])
        )
        template = PatternTemplate(
            name=str(doc["name"]),
            placeholder_process_count=int(doc["placeholders"]),
            events=events,
            relations=relations,
        )
    except TemplateInvalid:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise TemplateInvalid(f"malformed template document: {exc}") from exc
    validate_template(template)
    return template


def _kind_code(kind: object) -> int:
    if isinstance(kind, str):
        code = KIND_CODES.get(kind)
        if code is None:
            raise TemplateInvalid(f"unknown kind {kind!r}")
        return code
    if isinstance(kind, int) and not isinstance(kind, bool):
        if kind in KIND_NAMES or kind >= 1000:
            return kind
    raise TemplateInvalid(f"unknown kind {kind!r}")


def load_template_file(path: str) -> PatternTemplate:
    with open(path, encoding="utf-8") as fh:
        return load_template(fh.read())


def match_template(
    graph: EventGraph,
    relations: Iterable[Relation],
    template: PatternTemplate,
) -> list[PatternOccurrence]:
    """All occurrences of the template, ordered by (binding, base)."""
    validate_template(template)
    rel_from: dict[Coord, Relation] = {r.src: r for r in relations}
    rel_to: dict[Coord, Relation] = {r.dst: r for r in relations}

    events_by_ph: dict[int, tuple[TemplateEvent, ...]] = {
        ph: tuple(te for te in template.events if te.placeholder == ph)
        for ph in range(template.placeholder_process_count)
    }
    c_edges = [tr for tr in template.relations if tr.edge_class == EDGE_CROSS]

    def placeholder_fits(ph: int, proc: int, base: int) -> bool:
        if base < 1:
            return False
        for te in events_by_ph[ph]:
            event = graph.event_at(proc, base + te.offset)
            if event is None or event.kind != te.kind:
                return False
        return True

    def cross_edges_hold(assign: dict[int, tuple[int, int]]) -> bool:
        for tr in c_edges:
            sproc, sbase = assign[tr.src[0]]
            dproc, dbase = assign[tr.dst[0]]
            actual = rel_from.get((sproc, sbase + tr.src[1]))
            if actual is None or actual.dst != (dproc, dbase + tr.dst[1]):
                return False
        return True

    found: dict[frozenset[Coord], PatternOccurrence] = {}

    def record(assign: dict[int, tuple[int, int]]) -> None:
        if not cross_edges_hold(assign):
            return
        coords = sorted(
            (assign[te.placeholder][0], assign[te.placeholder][1] + te.offset)
            for te in template.events
        )
        key = frozenset(coords)
        occurrence = PatternOccurrence(
            template=template.name,
            binding=tuple(assign[ph][0] for ph in sorted(assign)),
            base_index=tuple(assign[ph][1] for ph in sorted(assign)),
            events=tuple(coords),
        )
        # Symmetric templates yield one candidate per automorphism; keep
        # the lexicographically smallest binding for each event set.
        prior = found.get(key)
        if prior is None or (occurrence.binding, occurrence.base_index) < (
            prior.binding,
            prior.base_index,
        ):
            found[key] = occurrence

    def extend(assign: dict[int, tuple[int, int]], used: set[int]) -> None:
        if len(assign) == template.placeholder_process_count:
            record(assign)
            return
        # Prefer a placeholder pinned down by a C edge into the bound set:
        # the matching relation dictates its process and base exactly.
        for tr in c_edges:
            sph, soff = tr.src
            dph, doff = tr.dst
            if sph in assign and dph not in assign:
                sproc, sbase = assign[sph]
                actual = rel_from.get((sproc, sbase + soff))
                if actual is not None:
                    _try(assign, used, dph, actual.dst_process, actual.dst_index - doff)
                return
            if dph in assign and sph not in assign:
                dproc, dbase = assign[dph]
                actual = rel_to.get((dproc, dbase + doff))
                if actual is not None:
                    _try(assign, used, sph, actual.src_process, actual.src_index - soff)
                return
        # No C edge reaches the remaining placeholders: enumerate.
        ph = min(set(range(template.placeholder_process_count)) - set(assign))
        limit = template.max_offset(ph)
        for proc in range(graph.process_count):
            if proc in used:
                continue
            for base in range(1, len(graph.timeline(proc)) - limit + 1):
                _try(assign, used, ph, proc, base)

    def _try(
        assign: dict[int, tuple[int, int]], used: set[int], ph: int, proc: int, base: int
    ) -> None:
        if proc in used or not placeholder_fits(ph, proc, base):
            return
        assign[ph] = (proc, base)
        used.add(proc)
        extend(assign, used)
        del assign[ph]
        used.discard(proc)

    if c_edges:
        # Anchor each candidate on an actual relation realizing the first
        # C edge; bindings not touching any relation cannot match.
        tr = c_edges[0]
        sph, soff = tr.src
        dph, doff = tr.dst
        for actual in sorted(rel_from.values(), key=lambda r: r.src):
            assign: dict[int, tuple[int, int]] = {}
            used: set[int] = set()
            sbase = actual.src_index - soff
            dbase = actual.dst_index - doff
            if not placeholder_fits(sph, actual.src_process, sbase):
                continue
            assign[sph] = (actual.src_process, sbase)
            used.add(actual.src_process)
            _try(assign, used, dph, actual.dst_process, dbase)
    else:
        extend({}, set())

    return sorted(found.values(), key=lambda o: (o.binding, o.base_index))


def detect_runs(occurrences: Sequence[PatternOccurrence]) -> list[PatternRun]:
    """Group same-binding occurrences into runs of a repeating stride.

    The stride is the modal positive difference between consecutive base
    indices, pooled over all bound processes, ties to the smaller value.
    Walking the progression, an absent expected base is recorded as a
    missing irregularity; a hole wider than MAX_HOLE_STEPS strides ends
    the run and starts a new one.  Groups with fewer than 2 occurrences
    are not runs.
    """
    groups: dict[tuple[str, tuple[int, ...]], list[PatternOccurrence]] = {}
    for occ in occurrences:
        groups.setdefault((occ.template, occ.binding), []).append(occ)

    runs: list[PatternRun] = []
    for (template, binding), group in sorted(groups.items()):
        if len(group) < 2:
            continue
        group.sort(key=lambda o: o.base_index)
        stride = _modal_stride(group)
        if stride is None:
            continue
        runs.extend(_walk_group(template, binding, group, stride))
    return runs


def _modal_stride(group: Sequence[PatternOccurrence]) -> int | None:
    diffs = Counter()
    for prev, cur in zip(group, group[1:]):
        for a, b in zip(prev.base_index, cur.base_index):
            if b > a:
                diffs[b - a] += 1
    if not diffs:
        return None
    best = max(diffs.values())
    return min(d for d, n in diffs.items() if n == best)


def _walk_group(
    template: str,
    binding: tuple[int, ...],
    group: Sequence[PatternOccurrence],
    stride: int,
) -> list[PatternRun]:
    runs: list[PatternRun] = []
    current: list[PatternOccurrence] = [group[0]]
    irregular: list[Irregularity] = []

    def close() -> None:
        if len(current) >= 2:
            runs.append(
                PatternRun(
                    template=template,
                    binding=binding,
                    occurrences=tuple(current),
                    stride=stride,
                    irregularities=tuple(irregular),
                )
            )

    for occ in group[1:]:
        prev = current[-1]
        expected = tuple(b + stride for b in prev.base_index)
        missing: list[Irregularity] = []
        while (
            expected != occ.base_index
            and all(e <= a for e, a in zip(expected, occ.base_index))
            and len(missing) <= MAX_HOLE_STEPS
        ):
            missing.append(Irregularity(expected_base=expected, reason="missing"))
            expected = tuple(e + stride for e in expected)
        if len(missing) > MAX_HOLE_STEPS:
            # Too far apart to be the same loop: split.
            close()
            current = [occ]
            irregular = []
        else:
            irregular.extend(missing)
            current.append(occ)
    close()
    return runs


def find_irregularities(
    runs: Iterable[PatternRun], anomalies: Sequence[Anomaly]
) -> list[PatternRun]:
    """Cross-link failure anomalies into run irregularities.

    An irregularity whose expected window (one stride from the expected
    base, on the run's bound processes) contains an anomaly coordinate
    becomes reason=perturbed and records the anomaly's position in the
    given list.
    """
    enriched: list[PatternRun] = []
    for run in runs:
        new_irregular = []
        for irr in run.irregularities:
            hits = tuple(
                idx
                for idx, anomaly in enumerate(anomalies)
                if _anomaly_in_window(anomaly, run, irr)
            )
            if hits:
                new_irregular.append(
                    replace(irr, reason="perturbed", anomaly_indexes=hits)
                )
            else:
                new_irregular.append(irr)
        enriched.append(replace(run, irregularities=tuple(new_irregular)))
    return enriched


def _anomaly_in_window(anomaly: Anomaly, run: PatternRun, irr: Irregularity) -> bool:
    window: dict[int, tuple[int, int]] = {
        proc: (base, base + run.stride - 1)
        for proc, base in zip(run.binding, irr.expected_base)
    }
    for proc, index in anomaly.events:
        span = window.get(proc)
        if span is not None and span[0] <= index <= span[1]:
            return True
    return False
