"""Networked pipeline stages: one process, one role, wire protocol I/O.

A stage either produces a stream from a trace file (generate), relays
and validates a stream (analyze-failures, analyze-patterns), or
terminates one (sink-json writes the analysis report, sink-svg the
diagram).  Consumers listen on their --in address; producers connect
out, either to a static --out address or to wherever a sentinel
directive points them.  EndOfStream rides the stream itself, so a
finished pipeline winds down stage by stage without control traffic.

Analysis results do not travel on the wire: the message set is closed.
Sinks rebuild the graph from the stream and compute reports locally,
through the same code path the in-process CLI uses, which is what the
distributed-equals-local guarantee rests on.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import wire
from .channel import (
    ConnectFailed,
    DataStreamReader,
    Listener,
    MessageChannel,
    ProtocolViolation,
    connect,
)
from .ingest import MessageMatcher, TraceError, read_trace
from .model import EventGraph, GraphError
from .pipeline import render_svg, report_from_graph, render_view
from .report import serialize_report
from .wire import (
    EndOfStream,
    EventMsg,
    Hello,
    InterfaceDecl,
    ModuleDescriptor,
    Register,
    RelationMsg,
    Status,
    WireDirective,
)

__all__ = ["ROLES", "StageConfig", "StageFailure", "run_stage", "ControlClient"]

ROLES = ("generate", "analyze-failures", "analyze-patterns", "sink-json", "sink-svg")

FEATURES_BY_ROLE = {
    "generate": frozenset({"send"}),
    "analyze-failures": frozenset({"send", "receive"}),
    "analyze-patterns": frozenset({"send", "receive"}),
    "sink-json": frozenset({"receive"}),
    "sink-svg": frozenset({"receive"}),
}

DIRECTIVE_TIMEOUT = 30.0
ACCEPT_TIMEOUT = 30.0


class StageFailure(Exception):
    """Unrecoverable stage error; the message is for standard error."""


@dataclass
class StageConfig:
    role: str
    input: str | None = None
    output: str | None = None
    sentinel: str | None = None
    push_view: str | None = None
    name: str | None = None


def _is_tcp(address: str) -> bool:
    return address.startswith("tcp://")


def _hostport(address: str) -> str:
    return address[len("tcp://") :]


class ControlClient:
    """A stage's persistent connection to the sentinel.

    Registers on construction and keeps a reader pumping directives into
    a queue; directives can legally arrive even before the registration
    ack if an operator wires modules quickly.
    """

    def __init__(self, address: str, descriptor: ModuleDescriptor):
        self._channel = connect(address)
        self._directives: "queue.Queue[WireDirective]" = queue.Queue()
        self._channel.send(Register(descriptor))
        self.module_id = self._await_ack()
        self._thread = threading.Thread(target=self._pump, daemon=True)
        self._thread.start()

    def _await_ack(self) -> int:
        while True:
            message = self._channel.recv()
            if message is None:
                raise ProtocolViolation("control connection closed before registration ack")
            if isinstance(message, Status):
                return message.module_id
            if isinstance(message, WireDirective):
                self._directives.put(message)

    def _pump(self) -> None:
        try:
            for message in self._channel:
                if isinstance(message, WireDirective):
                    self._directives.put(message)
        except (wire.WireError, OSError):
            pass

    def send_status(self, state: str) -> None:
        self._channel.send(Status(module_id=self.module_id, state_code=wire.STATE_CODES[state]))

    def wait_directive(self, timeout: float = DIRECTIVE_TIMEOUT) -> WireDirective:
        try:
            return self._directives.get(timeout=timeout)
        except queue.Empty:
            raise StageFailure("no wiring directive arrived in time") from None

    def close(self) -> None:
        self._channel.close()


def run_stage(config: StageConfig) -> int:
    """Run one stage to completion; returns the process exit code."""
    if config.role not in ROLES:
        raise StageFailure(f"unknown role {config.role!r}")
    control: ControlClient | None = None
    listener: Listener | None = None
    try:
        listener = _open_listener(config)
        if config.sentinel:
            control = ControlClient(config.sentinel, _descriptor_with_listener(config, listener))
            control.send_status("running")
        if config.role == "generate":
            _run_generate(config, control)
        elif config.role in ("analyze-failures", "analyze-patterns"):
            _run_relay(config, control, listener)
        else:
            _run_sink(config, control, listener)
        if control is not None:
            control.send_status("finished")
        return 0
    except (
        StageFailure,
        ConnectFailed,
        wire.WireError,
        GraphError,
        TraceError,
        OSError,
        ValueError,
    ) as exc:
        if control is not None:
            try:
                control.send_status("failed")
            except OSError:
                pass
        raise StageFailure(str(exc)) from exc
    finally:
        if control is not None:
            control.close()
        if listener is not None:
            listener.close()


def _open_listener(config: StageConfig) -> Listener | None:
    """Bind the input port early so the descriptor can carry the real address."""
    consumes = config.role != "generate"
    if not consumes:
        return None
    if not config.input or not _is_tcp(config.input):
        raise StageFailure(f"role {config.role} needs --in tcp://host:port")
    return Listener(_hostport(config.input))


def _descriptor_with_listener(config: StageConfig, listener: Listener | None) -> ModuleDescriptor:
    interfaces = []
    if listener is not None:
        interfaces.append(InterfaceDecl(name="in", direction="in", address=listener.address))
    if config.output and _is_tcp(config.output):
        interfaces.append(
            InterfaceDecl(name="out", direction="out", address=_hostport(config.output))
        )
    return ModuleDescriptor(
        name=config.name or config.role,
        interfaces=tuple(interfaces),
        features=FEATURES_BY_ROLE[config.role],
    )


def _open_output(config: StageConfig, control: ControlClient | None) -> MessageChannel:
    if config.output:
        if not _is_tcp(config.output):
            raise StageFailure("--out must be tcp://host:port for streaming roles")
        return connect(_hostport(config.output), attempts=50)
    if control is None:
        raise StageFailure("either --out or --sentinel (for dynamic wiring) is required")
    directive = control.wait_directive()
    return connect(directive.consumer_address, attempts=50)


def _accept_stream(listener: Listener) -> DataStreamReader:
    try:
        channel = listener.accept(timeout=ACCEPT_TIMEOUT)
    except TimeoutError:
        raise StageFailure("no producer connected") from None
    return DataStreamReader(channel)


def _run_generate(config: StageConfig, control: ControlClient | None) -> None:
    if not config.input or _is_tcp(config.input):
        raise StageFailure("generate needs --in pointing at a trace file")
    path = Path(config.input)
    if not path.is_file():
        raise StageFailure(f"trace file {path} not found")
    with path.open(encoding="utf-8") as fh:
        header, events = read_trace(fh)
        out = _open_output(config, control)
        try:
            out.send(Hello(header.process_count))
            matcher = MessageMatcher()
            for event in events:
                out.send(EventMsg(event))
                for relation in matcher.feed(event):
                    out.send(RelationMsg(relation))
            out.send(EndOfStream())
        finally:
            out.close()


def _run_relay(config: StageConfig, control: ControlClient | None, listener: Listener) -> None:
    reader = _accept_stream(listener)
    stream = iter(reader)
    graph: EventGraph | None = None
    out: MessageChannel | None = None
    try:
        for message in stream:
            if out is None:
                # Hello already consumed by the reader; open downstream now
                # that the stream is confirmed live.
                graph = EventGraph(reader.process_count)
                out = _open_output(config, control)
                out.send(Hello(reader.process_count))
            if isinstance(message, EventMsg):
                graph.add_event(message.event)
            elif isinstance(message, RelationMsg):
                graph.add_relation(message.relation)
            out.send(message)
        if out is None:
            # Empty stream: still propagate the frame pair downstream.
            graph = EventGraph(reader.process_count)
            out = _open_output(config, control)
            out.send(Hello(reader.process_count))
        graph.freeze()
        out.send(EndOfStream())
    finally:
        if out is not None:
            out.close()


def _run_sink(config: StageConfig, control: ControlClient | None, listener: Listener) -> None:
    if not config.output or _is_tcp(config.output):
        raise StageFailure("sink roles need --out pointing at an output file")
    reader = _accept_stream(listener)
    graph: EventGraph | None = None
    relations = []
    for message in reader:
        if graph is None:
            graph = EventGraph(reader.process_count)
        if isinstance(message, EventMsg):
            graph.add_event(message.event)
        elif isinstance(message, RelationMsg):
            graph.add_relation(message.relation)
            relations.append(message.relation)
    if graph is None:
        graph = EventGraph(reader.process_count)
    graph.freeze()
    report = report_from_graph(graph, relations)
    if config.role == "sink-json":
        text = serialize_report(report)
    else:
        text = render_svg(graph, report)
    Path(config.output).write_text(text, encoding="utf-8")
    if config.push_view:
        _push_view(config.push_view, render_view(graph, report))


def _view_url(base: str) -> str:
    # Accept either the service base URL or the full /view endpoint.
    trimmed = base.rstrip("/")
    if trimmed.endswith("/view"):
        return trimmed
    return f"{trimmed}/view"


def _push_view(base: str, view: str) -> None:
    import httpx

    url = _view_url(base)
    for attempt in range(5):
        try:
            response = httpx.post(url, content=view, timeout=5.0)
            response.raise_for_status()
            return
        except httpx.HTTPError:
            if attempt == 4:
                raise StageFailure(f"could not push view to {url}") from None
            time.sleep(0.2)
