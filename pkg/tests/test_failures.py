from __future__ import annotations

import io

import pytest

from evgraph.failures import (
    SEVERITY_ERROR,
    SEVERITY_WARNING,
    Anomaly,
    MissingAttr,
    check_length_mismatch,
    find_isolated_events,
    run_failure_checks,
)
from evgraph.ingest import PendingReport
from evgraph.model import Event, EventGraph, Relation
from evgraph.pipeline import load_graph
from evgraph.synth import (
    DropIteration,
    LengthMismatch,
    SyntheticSpec,
    WrongDestination,
    generate_labeled,
    generate_synthetic,
)


def matched_pair(send_len: int, recv_len: int) -> tuple[EventGraph, list[Relation]]:
    g = EventGraph(2)
    g.add_event(Event(0, 1, 1, {"dst": 1, "len": send_len}))
    g.add_event(Event(1, 1, 2, {"src": 0, "len": recv_len}))
    relation = Relation(0, 1, 1, 1)
    g.add_relation(relation)
    return g.freeze(), [relation]


class TestLengthMismatch:
    def test_equal_lengths_clean(self):
        assert check_length_mismatch(*matched_pair(8, 8)) == []

    def test_differing_lengths_flagged(self):
        (anomaly,) = check_length_mismatch(*matched_pair(8, 4))
        assert anomaly.kind == "LengthMismatch"
        assert anomaly.events == ((0, 1), (1, 1))
        assert anomaly.details == {"send_len": 8, "recv_len": 4}
        assert anomaly.severity == SEVERITY_WARNING

    def test_ordered_by_send_coordinate(self):
        g = EventGraph(3)
        g.add_event(Event(0, 1, 1, {"dst": 2, "len": 8}))
        g.add_event(Event(1, 1, 1, {"dst": 2, "len": 8}))
        g.add_event(Event(2, 1, 2, {"src": 1, "len": 1}))
        g.add_event(Event(2, 2, 2, {"src": 0, "len": 2}))
        relations = [Relation(1, 1, 2, 1), Relation(0, 1, 2, 2)]
        for r in relations:
            g.add_relation(r)
        result = check_length_mismatch(g.freeze(), relations)
        assert [a.events[0] for a in result] == [(0, 1), (1, 1)]

    def test_missing_len_attr(self):
        g = EventGraph(2)
        g.add_event(Event(0, 1, 1, {"dst": 1, "len": 8}))
        g.add_event(Event(1, 1, 2, {"src": 0, "len": 8}))
        g.add_event(Event(1, 2, 2, {"src": 0, "len": 8}))
        object.__setattr__(g.event_at(1, 1), "attrs", {"src": 0})  # simulate a bad producer
        relation = Relation(0, 1, 1, 1)
        g.add_relation(relation)
        with pytest.raises(MissingAttr) as exc_info:
            check_length_mismatch(g.freeze(), [relation])
        assert exc_info.value.coord == (1, 1)
        assert exc_info.value.attr == "len"


class TestIsolatedEvents:
    def test_sends_first_then_receives_sorted(self):
        pending = PendingReport(
            pending_sends=[(2, 5), (0, 1)], pending_receives=[(1, 9), (1, 2)]
        )
        result = find_isolated_events(pending)
        assert [(a.kind, a.events[0]) for a in result] == [
            ("IsolatedSend", (0, 1)),
            ("IsolatedSend", (2, 5)),
            ("IsolatedReceive", (1, 2)),
            ("IsolatedReceive", (1, 9)),
        ]
        assert all(a.severity == SEVERITY_ERROR for a in result)

    def test_empty_report(self):
        assert find_isolated_events(PendingReport()) == []


class TestAnomalyArity:
    def test_length_mismatch_needs_two_coords(self):
        with pytest.raises(ValueError):
            Anomaly(kind="LengthMismatch", events=((0, 1),))

    def test_isolated_needs_one_coord(self):
        with pytest.raises(ValueError):
            Anomaly(kind="IsolatedSend", events=((0, 1), (1, 1)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Anomaly(kind="Surprise", events=((0, 1),))


def analyze_text(text: str):
    graph, relations, pending = load_graph(io.StringIO(text))
    return run_failure_checks(graph, relations, pending)


class TestOnSyntheticTraces:
    def test_fault_free_traces_raise_nothing(self):
        for scenario, processes in (("ring", 5), ("simple-exchange-loop", 4), ("random", 6)):
            for seed in range(5):
                spec = SyntheticSpec(scenario, processes, 6)
                assert analyze_text(generate_synthetic(spec, seed)) == []

    def test_length_mismatch_recall_and_precision(self):
        spec = SyntheticSpec("simple-exchange-loop", 6, 8, (LengthMismatch(4, pair=2),))
        text, truth = generate_labeled(spec, seed=1)
        anomalies = analyze_text(text)
        expected = {(m.send, m.recv) for m in truth.mismatches}
        found = {a.events for a in anomalies if a.kind == "LengthMismatch"}
        assert found == expected
        assert len(anomalies) == len(expected)  # nothing else flagged

    def test_wrong_destination_yields_two_isolated_events(self):
        spec = SyntheticSpec("simple-exchange-loop", 2, 10, (WrongDestination(5),))
        text, truth = generate_labeled(spec, seed=0)
        anomalies = analyze_text(text)
        assert {a.kind for a in anomalies} == {"IsolatedSend", "IsolatedReceive"}
        assert [a.events[0] for a in anomalies if a.kind == "IsolatedSend"] == truth.pending_sends
        assert [
            a.events[0] for a in anomalies if a.kind == "IsolatedReceive"
        ] == truth.pending_receives
        assert len(anomalies) == 2

    def test_drop_iteration_isolates_partner_endpoints(self):
        spec = SyntheticSpec("simple-exchange-loop", 4, 6, (DropIteration(3),))
        text, truth = generate_labeled(spec, seed=0)
        anomalies = analyze_text(text)
        found_sends = [a.events[0] for a in anomalies if a.kind == "IsolatedSend"]
        found_receives = [a.events[0] for a in anomalies if a.kind == "IsolatedReceive"]
        assert found_sends == truth.pending_sends
        assert found_receives == truth.pending_receives
        assert len(anomalies) == len(found_sends) + len(found_receives)
