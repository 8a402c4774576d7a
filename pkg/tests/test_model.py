from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evgraph.model import (
    CausalCycle,
    ClocksMissing,
    DuplicateEvent,
    Event,
    EventGraph,
    GraphFrozen,
    IndexGap,
    KindMismatch,
    KindReserved,
    MissingRequiredAttr,
    Relation,
    SelfProcess,
    EndpointReused,
    UnknownEndpoint,
    UnknownEvent,
    UnknownProcess,
    VectorClock,
)
from graphgen import random_graph
from oracles import happened_before_oracle, reachability_bitsets


def exchange_pair() -> EventGraph:
    """Two processes that send to and receive from each other once."""
    g = EventGraph(2)
    g.add_event(Event(0, 1, 1, {"dst": 1, "len": 8}))
    g.add_event(Event(0, 2, 2, {"src": 1, "len": 8}))
    g.add_event(Event(1, 1, 1, {"dst": 0, "len": 8}))
    g.add_event(Event(1, 2, 2, {"src": 0, "len": 8}))
    g.add_relation(Relation(0, 1, 1, 2))
    g.add_relation(Relation(1, 1, 0, 2))
    return g.freeze().assign_vector_clocks()


class TestExchangeExample:
    def test_clocks(self):
        g = exchange_pair()
        assert g.clock(0, 1).counters == (1, 0)
        assert g.clock(0, 2).counters == (2, 1)
        assert g.clock(1, 1).counters == (0, 1)
        assert g.clock(1, 2).counters == (1, 2)

    def test_causal_order(self):
        g = exchange_pair()
        assert g.happened_before((0, 1), (1, 2))
        assert g.happened_before((1, 1), (0, 2))
        assert g.happened_before((0, 1), (0, 2))
        assert not g.happened_before((1, 2), (0, 1))
        # the two sends are unordered, as are the two receives
        assert g.concurrent((0, 1), (1, 1))
        assert g.concurrent((0, 2), (1, 2))

    def test_irreflexive(self):
        g = exchange_pair()
        assert not g.happened_before((0, 1), (0, 1))
        assert not g.concurrent((0, 1), (0, 1))


class TestAgainstReachabilityOracle:
    """Vector-clock answers must agree with explicit edge reachability."""

    def check_graph(self, seed: int) -> None:
        rng = random.Random(seed)
        graph, topo, relation_of = random_graph(rng, max_processes=5, max_events_per_process=12)
        graph.assign_vector_clocks()
        position, reach = reachability_bitsets(topo, relation_of)
        coords = [e.coord for e in topo]
        for a in coords:
            for b in coords:
                expected = happened_before_oracle(position, reach, a, b)
                assert graph.happened_before(a, b) == expected, (a, b)
                expected_conc = (
                    a != b
                    and not expected
                    and not happened_before_oracle(position, reach, b, a)
                )
                assert graph.concurrent(a, b) == expected_conc, (a, b)

    def test_fixed_seeds(self):
        for seed in range(20):
            self.check_graph(seed)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_seeds(self, seed):
        self.check_graph(seed)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_happened_before_is_a_strict_partial_order(seed):
    rng = random.Random(seed)
    graph, topo, _ = random_graph(rng, max_processes=4, max_events_per_process=8)
    graph.assign_vector_clocks()
    coords = [e.coord for e in topo]
    for a in coords:
        assert not graph.happened_before(a, a)
    sample = rng.sample(coords, min(len(coords), 6))
    for a in sample:
        for b in sample:
            if graph.happened_before(a, b):
                assert not graph.happened_before(b, a)
            for c in sample:
                if graph.happened_before(a, b) and graph.happened_before(b, c):
                    assert graph.happened_before(a, c)


def test_timeline_order_is_causal():
    rng = random.Random(7)
    graph, _, _ = random_graph(rng, max_processes=4, max_events_per_process=10)
    graph.assign_vector_clocks()
    for p in range(graph.process_count):
        timeline = graph.timeline(p)
        for i in range(1, len(timeline)):
            assert graph.happened_before(timeline[i - 1].coord, timeline[i].coord)


class TestConstructionErrors:
    def test_index_gap(self):
        g = EventGraph(1)
        with pytest.raises(IndexGap):
            g.add_event(Event(0, 2, 5))

    def test_duplicate(self):
        g = EventGraph(1)
        g.add_event(Event(0, 1, 5))
        with pytest.raises(DuplicateEvent):
            g.add_event(Event(0, 1, 6))

    @pytest.mark.parametrize("kind", [0, 7, 42, 999])
    def test_reserved_kind(self, kind):
        g = EventGraph(1)
        with pytest.raises(KindReserved):
            g.add_event(Event(0, 1, kind))

    def test_user_kinds_allowed(self):
        g = EventGraph(1)
        g.add_event(Event(0, 1, 1000))
        g.add_event(Event(0, 2, 0xFFFF))
        assert g.event_count == 2

    def test_send_requires_dst_and_len(self):
        g = EventGraph(2)
        with pytest.raises(MissingRequiredAttr):
            g.add_event(Event(0, 1, 1, {"dst": 1}))
        with pytest.raises(MissingRequiredAttr):
            g.add_event(Event(0, 1, 1, {"len": 8}))

    def test_receive_requires_src_and_len(self):
        g = EventGraph(2)
        with pytest.raises(MissingRequiredAttr):
            g.add_event(Event(0, 1, 2, {"src": 1}))

    def test_required_attrs_must_be_unsigned_ints(self):
        g = EventGraph(2)
        with pytest.raises(MissingRequiredAttr):
            g.add_event(Event(0, 1, 1, {"dst": -1, "len": 8}))
        with pytest.raises(MissingRequiredAttr):
            g.add_event(Event(0, 1, 1, {"dst": "1", "len": 8}))

    def test_unknown_process(self):
        g = EventGraph(2)
        with pytest.raises(UnknownProcess):
            g.add_event(Event(2, 1, 5))

    def test_event_value_ranges(self):
        with pytest.raises(ValueError):
            Event(0, 0, 5)  # indices are 1-based
        with pytest.raises(ValueError):
            Event(-1, 1, 5)
        with pytest.raises(ValueError):
            Event(0, 1, -1)


class TestRelationErrors:
    def build(self) -> EventGraph:
        g = EventGraph(3)
        g.add_event(Event(0, 1, 1, {"dst": 1, "len": 4}))
        g.add_event(Event(0, 2, 5))
        g.add_event(Event(1, 1, 2, {"src": 0, "len": 4}))
        g.add_event(Event(1, 2, 2, {"src": 0, "len": 4}))
        return g

    def test_unknown_endpoint(self):
        g = self.build()
        with pytest.raises(UnknownEndpoint):
            g.add_relation(Relation(0, 1, 2, 1))
        with pytest.raises(UnknownEndpoint):
            g.add_relation(Relation(0, 9, 1, 1))

    def test_kind_mismatch(self):
        g = self.build()
        with pytest.raises(KindMismatch):
            g.add_relation(Relation(0, 2, 1, 1))  # src is not a send
        g2 = self.build()
        g2.add_event(Event(2, 1, 1, {"dst": 0, "len": 4}))
        with pytest.raises(KindMismatch):
            g2.add_relation(Relation(0, 1, 2, 1))  # dst is not a receive

    def test_self_process(self):
        g = EventGraph(2)
        g.add_event(Event(0, 1, 1, {"dst": 0, "len": 4}))
        g.add_event(Event(0, 2, 2, {"src": 0, "len": 4}))
        with pytest.raises(SelfProcess):
            g.add_relation(Relation(0, 1, 0, 2))

    def test_endpoint_reuse(self):
        g = self.build()
        g.add_relation(Relation(0, 1, 1, 1))
        with pytest.raises(EndpointReused):
            g.add_relation(Relation(0, 1, 1, 2))  # same send, different receive
        g2 = self.build()
        g2.add_event(Event(2, 1, 1, {"dst": 1, "len": 4}))
        g2.add_relation(Relation(0, 1, 1, 1))
        with pytest.raises(EndpointReused):
            g2.add_relation(Relation(2, 1, 1, 1))  # same receive, different send

    def test_relation_add_is_idempotent(self):
        g = self.build()
        g.add_relation(Relation(0, 1, 1, 1))
        g.add_relation(Relation(0, 1, 1, 1))
        assert g.relation_count == 1


class TestFreezeSemantics:
    def test_frozen_graph_rejects_mutation(self):
        g = exchange_pair()
        with pytest.raises(GraphFrozen):
            g.add_event(Event(0, 3, 5))
        with pytest.raises(GraphFrozen):
            g.add_relation(Relation(0, 1, 1, 2))

    def test_freeze_is_idempotent(self):
        g = EventGraph(1)
        g.add_event(Event(0, 1, 5))
        assert g.freeze() is g
        assert g.freeze() is g
        assert g.frozen

    def test_clocks_require_freeze(self):
        g = EventGraph(1)
        g.add_event(Event(0, 1, 5))
        with pytest.raises(GraphFrozen):
            g.assign_vector_clocks()

    def test_queries_require_clocks(self):
        g = EventGraph(1)
        g.add_event(Event(0, 1, 5))
        g.freeze()
        assert not g.clocks_assigned
        with pytest.raises(ClocksMissing):
            g.happened_before((0, 1), (0, 1))

    def test_unknown_event_query(self):
        g = exchange_pair()
        with pytest.raises(UnknownEvent):
            g.happened_before((0, 3), (0, 1))
        with pytest.raises(UnknownEvent):
            g.clock(5, 1)


def test_causal_cycle_detected():
    """Two cross relations pointing backwards make clocks unassignable."""
    g = EventGraph(2)
    g.add_event(Event(0, 1, 2, {"src": 1, "len": 4}))
    g.add_event(Event(0, 2, 1, {"dst": 1, "len": 4}))
    g.add_event(Event(1, 1, 2, {"src": 0, "len": 4}))
    g.add_event(Event(1, 2, 1, {"dst": 0, "len": 4}))
    g.add_relation(Relation(0, 2, 1, 1))
    g.add_relation(Relation(1, 2, 0, 1))
    g.freeze()
    with pytest.raises(CausalCycle):
        g.assign_vector_clocks()


class TestVectorClock:
    def test_precedes_needs_strict_component(self):
        assert VectorClock((1, 0)).precedes(VectorClock((1, 1)))
        assert not VectorClock((1, 1)).precedes(VectorClock((1, 1)))
        assert not VectorClock((2, 0)).precedes(VectorClock((1, 1)))

    def test_concurrent_with(self):
        assert VectorClock((1, 0)).concurrent_with(VectorClock((0, 1)))
        assert not VectorClock((1, 0)).concurrent_with(VectorClock((1, 1)))

    def test_sequence_protocol(self):
        c = VectorClock((3, 1, 4))
        assert len(c) == 3
        assert c[2] == 4
