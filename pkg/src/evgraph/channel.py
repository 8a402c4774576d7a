"""Stream-socket transport for wire-protocol messages.

Addresses are "host:port" strings.  One channel has one reader and one
writer; a data stream additionally requires the writer to open with Hello
and close with EndOfStream, which ``DataStreamReader`` enforces on the
receiving side.
"""

from __future__ import annotations

import socket
import time
from collections import deque
from typing import Iterator

from .wire import (
    EndOfStream,
    EventMsg,
    Hello,
    Message,
    RelationMsg,
    StreamDecoder,
    WireError,
    encode,
)

__all__ = [
    "ConnectFailed",
    "ProtocolViolation",
    "parse_address",
    "connect",
    "Listener",
    "MessageChannel",
    "DataStreamReader",
    "open_data_stream",
]

RECV_CHUNK = 65536


class ConnectFailed(WireError):
    """Peer unreachable after the allowed connection attempts."""


class ProtocolViolation(WireError):
    """Data-stream ordering rules broken (Hello / EndOfStream framing)."""


def parse_address(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {address!r}")
    return host or "127.0.0.1", int(port)


class MessageChannel:
    """Bidirectional message channel over a connected stream socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._decoder = StreamDecoder()
        self._inbox: deque[Message] = deque()
        self._eof = False

    def send(self, message: Message) -> None:
        self._sock.sendall(encode(message))

    def recv(self) -> Message | None:
        """Next message, or None once the peer closed the stream cleanly."""
        while not self._inbox:
            if self._eof:
                return None
            chunk = self._sock.recv(RECV_CHUNK)
            if not chunk:
                self._eof = True
                self._decoder.finish()  # raises Truncated on a partial frame
                return None
            self._inbox.extend(self._decoder.feed(chunk))
        return self._inbox.popleft()

    def __iter__(self) -> Iterator[Message]:
        while (message := self.recv()) is not None:
            yield message

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def connect(address: str, attempts: int = 20, delay: float = 0.1) -> MessageChannel:
    """Dial a peer, retrying briefly so stage start-up order does not matter."""
    host, port = parse_address(address)
    last: OSError | None = None
    for _ in range(attempts):
        try:
            return MessageChannel(socket.create_connection((host, port), timeout=30))
        except OSError as exc:
            last = exc
            time.sleep(delay)
    raise ConnectFailed(f"could not connect to {address} after {attempts} attempts: {last}")


class Listener:
    """Bound listening socket; accept() yields message channels."""

    def __init__(self, address: str):
        host, port = parse_address(address)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen()
        self.host, self.port = self._sock.getsockname()[:2]

    @property
    def address(self) -> str:
        return f"{self.host}:{self.port}"

    def accept(self, timeout: float | None = None) -> MessageChannel:
        self._sock.settimeout(timeout)
        conn, _ = self._sock.accept()
        conn.settimeout(None)
        return MessageChannel(conn)

    def close(self) -> None:
        self._sock.close()


class DataStreamReader:
    """Validating reader for one event-graph data stream.

    Enforces that exactly one Hello opens the stream before any event or
    relation, and stops at EndOfStream.  Iteration yields the data
    messages between the two.
    """

    def __init__(self, channel: MessageChannel):
        self._channel = channel
        self.process_count: int | None = None
        self.completed = False

    def _read_hello(self) -> None:
        message = self._channel.recv()
        if message is None:
            raise ProtocolViolation("stream closed before Hello")
        if not isinstance(message, Hello):
            raise ProtocolViolation(f"{type(message).__name__} before Hello on a data stream")
        self.process_count = message.process_count

    def __iter__(self) -> Iterator[Message]:
        if self.process_count is None:
            self._read_hello()
        while True:
            message = self._channel.recv()
            if message is None:
                raise ProtocolViolation("stream closed without EndOfStream")
            if isinstance(message, EndOfStream):
                self.completed = True
                return
            if isinstance(message, Hello):
                raise ProtocolViolation("second Hello on a data stream")
            if not isinstance(message, (EventMsg, RelationMsg)):
                raise ProtocolViolation(
                    f"{type(message).__name__} is not a data-stream message"
                )
            yield message


def open_data_stream(address: str, process_count: int, attempts: int = 20) -> MessageChannel:
    """Connect to a data-stream consumer and send the opening Hello."""
    channel = connect(address, attempts=attempts)
    channel.send(Hello(process_count))
    return channel
