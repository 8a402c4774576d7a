"""Distributed event-graph analysis for message-passing program traces.

The core model represents a program run as per-process event timelines
plus send-to-receive relations, analyzes the resulting graph for
communication failures and repeated interaction patterns, and renders
space-time diagrams.  Pipelines run either in-process or as networked
stages speaking a small binary protocol, coordinated by a controller
service with an HTTP API.
"""

from .model import (
    Event,
    EventGraph,
    Relation,
    VectorClock,
)
from .pipeline import build_report, graph_from_stream, load_graph

__version__ = "0.1.0"

__all__ = [
    "Event",
    "EventGraph",
    "Relation",
    "VectorClock",
    "build_report",
    "graph_from_stream",
    "load_graph",
    "__version__",
]
