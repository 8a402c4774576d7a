"""Controller registry and the TCP control plane for pipeline stages.

Stages register over a persistent control connection; the sentinel
assigns ids, tracks status, and records who feeds whom.  Wiring a
producer to a consumer validates features and interfaces atomically
under one lock, then delivers a directive telling the producer where to
connect its data stream.  Data never flows through the sentinel; only
control messages do.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from . import wire
from .channel import Listener, MessageChannel
from .wire import InterfaceDecl, ModuleDescriptor, Register, Status, WireDirective

__all__ = [
    "SentinelError",
    "UnknownModule",
    "FeatureMismatch",
    "NoInputInterface",
    "MalformedDescriptor",
    "RegisteredModule",
    "ModuleRegistry",
    "ControlServer",
]

STATE_NAMES = {code: name for name, code in wire.STATE_CODES.items()}

FEATURES = frozenset({"send", "receive"})
DIRECTIONS = frozenset({"in", "out"})


class SentinelError(Exception):
    pass


class UnknownModule(SentinelError):
    def __init__(self, module_id: int):
        self.module_id = module_id
        super().__init__(f"no module with id {module_id}")


class FeatureMismatch(SentinelError):
    pass


class NoInputInterface(SentinelError):
    pass


class MalformedDescriptor(SentinelError):
    pass


@dataclass(frozen=True)
class RegisteredModule:
    """One module-table row; immutable snapshot."""

    id: int
    name: str
    interfaces: tuple[InterfaceDecl, ...]
    features: frozenset[str]
    status: str = "registered"
    producers: tuple[int, ...] = ()
    consumers: tuple[int, ...] = ()

    def input_address(self) -> str | None:
        for decl in self.interfaces:
            if decl.direction == "in" and decl.address:
                return decl.address
        return None


class ModuleRegistry:
    """Module table plus wiring topology; every mutation is serialized.

    A directive sender may be attached per module (the control server
    does); wire() calls it while still holding the lock so directives
    leave in the order edges are recorded.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._modules: dict[int, RegisteredModule] = {}
        self._senders: dict[int, object] = {}
        self._next_id = 1
        self._view: str | None = None

    def register(self, descriptor: ModuleDescriptor, sender=None) -> int:
        self._validate_descriptor(descriptor)
        with self._lock:
            module_id = self._next_id
            self._next_id += 1
            self._modules[module_id] = RegisteredModule(
                id=module_id,
                name=descriptor.name,
                interfaces=descriptor.interfaces,
                features=descriptor.features,
            )
            if sender is not None:
                self._senders[module_id] = sender
            return module_id

    @staticmethod
    def _validate_descriptor(descriptor: ModuleDescriptor) -> None:
        if not descriptor.name:
            raise MalformedDescriptor("module name must be non-empty")
        if not descriptor.features <= FEATURES:
            raise MalformedDescriptor(f"features must be a subset of {sorted(FEATURES)}")
        for decl in descriptor.interfaces:
            if not decl.name:
                raise MalformedDescriptor("interface name must be non-empty")
            if decl.direction not in DIRECTIONS:
                raise MalformedDescriptor(f"interface direction {decl.direction!r} unknown")

    def update_status(self, module_id: int, state: str) -> None:
        if state not in wire.STATE_CODES:
            raise MalformedDescriptor(f"unknown state {state!r}")
        with self._lock:
            module = self._modules.get(module_id)
            if module is None:
                raise UnknownModule(module_id)
            self._modules[module_id] = replace(module, status=state)

    def wire(self, producer_id: int, consumer_id: int) -> str:
        """Record the edge and direct the producer at the consumer.

        Returns the consumer's input address.  All checks happen before
        any mutation, so a rejected wiring leaves the topology as it was.
        """
        with self._lock:
            producer = self._modules.get(producer_id)
            if producer is None:
                raise UnknownModule(producer_id)
            consumer = self._modules.get(consumer_id)
            if consumer is None:
                raise UnknownModule(consumer_id)
            if "send" not in producer.features:
                raise FeatureMismatch(f"module {producer_id} does not implement send")
            if "receive" not in consumer.features:
                raise FeatureMismatch(f"module {consumer_id} does not implement receive")
            address = consumer.input_address()
            if address is None:
                raise NoInputInterface(f"module {consumer_id} has no input interface address")
            if consumer_id not in producer.consumers:
                self._modules[producer_id] = replace(
                    producer, consumers=producer.consumers + (consumer_id,)
                )
            if producer_id not in consumer.producers:
                self._modules[consumer_id] = replace(
                    consumer, producers=consumer.producers + (producer_id,)
                )
            sender = self._senders.get(producer_id)
            if sender is not None:
                sender(WireDirective(producer_id=producer_id, consumer_address=address))
            return address

    def list_modules(self) -> list[RegisteredModule]:
        with self._lock:
            return [self._modules[mid] for mid in sorted(self._modules)]

    def topology(self) -> list[tuple[int, int]]:
        with self._lock:
            return sorted(
                (producer_id, consumer_id)
                for producer_id, module in self._modules.items()
                for consumer_id in module.consumers
            )

    def set_view(self, view: str) -> None:
        with self._lock:
            self._view = view

    def get_view(self) -> str | None:
        with self._lock:
            return self._view


@dataclass
class _Connection:
    channel: MessageChannel
    send_lock: threading.Lock = field(default_factory=threading.Lock)
    module_id: int | None = None

    def send(self, message) -> None:
        with self.send_lock:
            self.channel.send(message)


class ControlServer:
    """Accepts stage control connections and drives the registry.

    Per connection: a Register is answered with Status(assigned id,
    registered) on the same channel; later Status messages update the
    module's state; wiring directives travel back down the channel.
    """

    def __init__(self, registry: ModuleRegistry, address: str = "127.0.0.1:0"):
        self.registry = registry
        self._listener = Listener(address)
        self._threads: list[threading.Thread] = []
        self._connections: list[_Connection] = []
        self._accept_thread: threading.Thread | None = None
        self._closing = threading.Event()

    @property
    def address(self) -> str:
        return self._listener.address

    def start(self) -> ControlServer:
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def _accept_loop(self) -> None:
        while not self._closing.is_set():
            try:
                channel = self._listener.accept(timeout=0.2)
            except TimeoutError:
                continue
            except OSError:
                break
            connection = _Connection(channel=channel)
            self._connections.append(connection)
            thread = threading.Thread(
                target=self._serve_connection, args=(connection,), daemon=True
            )
            self._threads.append(thread)
            thread.start()

    def _serve_connection(self, connection: _Connection) -> None:
        try:
            while True:
                message = connection.channel.recv()
                if message is None:
                    break
                if isinstance(message, Register):
                    module_id = self.registry.register(
                        message.descriptor, sender=connection.send
                    )
                    connection.module_id = module_id
                    connection.send(
                        Status(module_id=module_id, state_code=wire.STATE_CODES["registered"])
                    )
                elif isinstance(message, Status):
                    state = STATE_NAMES.get(message.state_code)
                    if state is not None:
                        self.registry.update_status(message.module_id, state)
        except (wire.WireError, OSError, UnknownModule, MalformedDescriptor):
            pass
        finally:
            connection.channel.close()

    def stop(self) -> None:
        self._closing.set()
        self._listener.close()
        for connection in self._connections:
            connection.channel.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2)
        for thread in self._threads:
            thread.join(timeout=2)
