"""Binary framing and codec for the inter-module event-graph stream.

Every message travels in one frame:

    magic   4 bytes  0x44 0x57 0x49 0x5A ("DWIZ")
    version 1 byte   0x01
    type    1 byte
    length  4 bytes  payload size, unsigned big-endian, <= 1 MiB
    payload `length` bytes

All integers are fixed-width big-endian; variable-length fields carry an
explicit length prefix.  The complete byte-for-byte layout of each payload
is documented in docs/wire-protocol.md.  The codec is pure: encoding is
deterministic and decoding is chunking-invariant.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .model import Event, Relation

__all__ = [
    "MAGIC",
    "VERSION",
    "MAX_PAYLOAD",
    "Message",
    "EventMsg",
    "RelationMsg",
    "Hello",
    "Register",
    "EndOfStream",
    "WireDirective",
    "Status",
    "InterfaceDecl",
    "ModuleDescriptor",
    "STATE_CODES",
    "STATE_NAMES",
    "WireError",
    "Oversize",
    "BadMagic",
    "BadVersion",
    "UnknownMsgType",
    "Truncated",
    "MalformedPayload",
    "encode",
    "decode_payload",
    "StreamDecoder",
    "decode_stream",
]

MAGIC = b"DWIZ"
VERSION = 0x01
MAX_PAYLOAD = 1 << 20
HEADER = struct.Struct(">4sBBI")

TYPE_EVENT = 0x01
TYPE_RELATION = 0x02
TYPE_HELLO = 0x03
TYPE_REGISTER = 0x04
TYPE_END_OF_STREAM = 0x05
TYPE_WIRE_DIRECTIVE = 0x06
TYPE_STATUS = 0x07

TAG_U64 = 0
TAG_I64 = 1
TAG_F64 = 2
TAG_STR = 3

# Module status codes carried by Status messages.
STATE_CODES = {"registered": 0, "running": 1, "finished": 2, "failed": 3}
STATE_NAMES = {code: name for name, code in STATE_CODES.items()}


class WireError(Exception):
    """Base class for codec and framing errors."""


class Oversize(WireError):
    """Frame payload exceeds the 1 MiB cap."""


class BadMagic(WireError):
    """Stream does not start with the frame magic."""


class BadVersion(WireError):
    """Frame carries an unknown protocol version."""


class UnknownMsgType(WireError):
    """Frame carries an unknown message type."""


class Truncated(WireError):
    """Byte source closed in the middle of a frame."""


class MalformedPayload(WireError):
    """Frame payload does not parse as its declared message type."""


@dataclass(frozen=True)
class InterfaceDecl:
    """One named module interface: direction is "in" or "out"."""

    name: str
    direction: str
    address: str


@dataclass(frozen=True)
class ModuleDescriptor:
    """Module registration record (id omitted: the controller assigns it)."""

    name: str
    interfaces: tuple[InterfaceDecl, ...] = ()
    features: frozenset[str] = frozenset()  # subset of {"send", "receive"}


@dataclass(frozen=True)
class EventMsg:
    event: Event


@dataclass(frozen=True)
class RelationMsg:
    relation: Relation


@dataclass(frozen=True)
class Hello:
    process_count: int


@dataclass(frozen=True)
class Register:
    descriptor: ModuleDescriptor


@dataclass(frozen=True)
class EndOfStream:
    pass


@dataclass(frozen=True)
class WireDirective:
    producer_id: int
    consumer_address: str


@dataclass(frozen=True)
class Status:
    module_id: int
    state_code: int


Message = EventMsg | RelationMsg | Hello | Register | EndOfStream | WireDirective | Status


def _pack_str(value: str, prefix: str = ">H") -> bytes:
    data = value.encode("utf-8")
    return struct.pack(prefix, len(data)) + data


def _encode_attr_value(value: object) -> bytes:
    if isinstance(value, bool) or value is None:
        raise MalformedPayload(f"unsupported attribute value type: {type(value).__name__}")
    if isinstance(value, int):
        if value >= 0:
            return struct.pack(">BQ", TAG_U64, value)
        return struct.pack(">Bq", TAG_I64, value)
    if isinstance(value, float):
        return struct.pack(">Bd", TAG_F64, value)
    if isinstance(value, str):
        return struct.pack(">B", TAG_STR) + _pack_str(value, ">I")
    raise MalformedPayload(f"unsupported attribute value type: {type(value).__name__}")


def _encode_event(event: Event) -> bytes:
    parts = [struct.pack(">IQHH", event.process, event.index, event.kind, len(event.attrs))]
    for key in event.attrs:
        parts.append(_pack_str(key))
        parts.append(_encode_attr_value(event.attrs[key]))
    return b"".join(parts)


def _encode_descriptor(desc: ModuleDescriptor) -> bytes:
    flags = (1 if "send" in desc.features else 0) | (2 if "receive" in desc.features else 0)
    parts = [_pack_str(desc.name), struct.pack(">BH", flags, len(desc.interfaces))]
    for iface in desc.interfaces:
        if iface.direction not in ("in", "out"):
            raise MalformedPayload(f"interface direction must be in/out, got {iface.direction!r}")
        parts.append(_pack_str(iface.name))
        parts.append(struct.pack(">B", 0 if iface.direction == "in" else 1))
        parts.append(_pack_str(iface.address))
    return b"".join(parts)


def encode(message: Message) -> bytes:
    """Serialize one message to its complete frame bytes."""
    if isinstance(message, EventMsg):
        msg_type, payload = TYPE_EVENT, _encode_event(message.event)
    elif isinstance(message, RelationMsg):
        r = message.relation
        msg_type = TYPE_RELATION
        payload = struct.pack(">IQIQ", r.src_process, r.src_index, r.dst_process, r.dst_index)
    elif isinstance(message, Hello):
        msg_type, payload = TYPE_HELLO, struct.pack(">I", message.process_count)
    elif isinstance(message, Register):
        msg_type, payload = TYPE_REGISTER, _encode_descriptor(message.descriptor)
    elif isinstance(message, EndOfStream):
        msg_type, payload = TYPE_END_OF_STREAM, b""
    elif isinstance(message, WireDirective):
        msg_type = TYPE_WIRE_DIRECTIVE
        payload = struct.pack(">I", message.producer_id) + _pack_str(message.consumer_address)
    elif isinstance(message, Status):
        msg_type, payload = TYPE_STATUS, struct.pack(">IB", message.module_id, message.state_code)
    else:
        raise TypeError(f"not a wire message: {message!r}")
    if len(payload) > MAX_PAYLOAD:
        raise Oversize(f"payload of {len(payload)} bytes exceeds the {MAX_PAYLOAD} byte cap")
    return HEADER.pack(MAGIC, VERSION, msg_type, len(payload)) + payload


class _Reader:
    """Cursor over one frame payload; over/under-runs are MalformedPayload."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise MalformedPayload("payload shorter than its declared fields")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def take_str(self, prefix: str = ">H") -> str:
        (length,) = self.unpack(prefix)
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedPayload(f"invalid UTF-8 in string field: {exc}") from exc

    def finish(self) -> None:
        if self._pos != len(self._data):
            raise MalformedPayload(f"{len(self._data) - self._pos} trailing bytes in payload")


def _decode_event(reader: _Reader) -> Event:
    process, index, kind, attr_count = reader.unpack(">IQHH")
    attrs: dict[str, object] = {}
    for _ in range(attr_count):
        key = reader.take_str()
        (tag,) = reader.unpack(">B")
        if tag == TAG_U64:
            (value,) = reader.unpack(">Q")
        elif tag == TAG_I64:
            (value,) = reader.unpack(">q")
        elif tag == TAG_F64:
            (value,) = reader.unpack(">d")
        elif tag == TAG_STR:
            value = reader.take_str(">I")
        else:
            raise MalformedPayload(f"unknown attribute value tag {tag}")
        attrs[key] = value
    try:
        return Event(process, index, kind, attrs)
    except ValueError as exc:
        raise MalformedPayload(str(exc)) from exc


def _decode_descriptor(reader: _Reader) -> ModuleDescriptor:
    name = reader.take_str()
    flags, iface_count = reader.unpack(">BH")
    features = set()
    if flags & 1:
        features.add("send")
    if flags & 2:
        features.add("receive")
    if flags & ~3:
        raise MalformedPayload(f"unknown feature flags 0x{flags:02x}")
    interfaces = []
    for _ in range(iface_count):
        iface_name = reader.take_str()
        (direction,) = reader.unpack(">B")
        if direction not in (0, 1):
            raise MalformedPayload(f"unknown interface direction {direction}")
        address = reader.take_str()
        interfaces.append(InterfaceDecl(iface_name, "in" if direction == 0 else "out", address))
    return ModuleDescriptor(name, tuple(interfaces), frozenset(features))


def decode_payload(msg_type: int, payload: bytes) -> Message:
    """Decode one frame payload of the given type."""
    reader = _Reader(payload)
    message: Message
    if msg_type == TYPE_EVENT:
        message = EventMsg(_decode_event(reader))
    elif msg_type == TYPE_RELATION:
        message = RelationMsg(Relation(*reader.unpack(">IQIQ")))
    elif msg_type == TYPE_HELLO:
        message = Hello(*reader.unpack(">I"))
    elif msg_type == TYPE_REGISTER:
        message = Register(_decode_descriptor(reader))
    elif msg_type == TYPE_END_OF_STREAM:
        message = EndOfStream()
    elif msg_type == TYPE_WIRE_DIRECTIVE:
        (producer_id,) = reader.unpack(">I")
        message = WireDirective(producer_id, reader.take_str())
    elif msg_type == TYPE_STATUS:
        message = Status(*reader.unpack(">IB"))
    else:
        raise UnknownMsgType(f"unknown message type 0x{msg_type:02x}")
    reader.finish()
    return message


@dataclass
class StreamDecoder:
    """Incremental frame decoder.

    Feed byte chunks of any size; complete messages come back as they
    finish, partial frames are buffered.  A frame split at any byte
    position decodes identically to one delivered whole.
    """

    _buffer: bytearray = field(default_factory=bytearray)

    def feed(self, chunk: bytes) -> list[Message]:
        self._buffer.extend(chunk)
        messages: list[Message] = []
        while True:
            if len(self._buffer) < HEADER.size:
                if self._buffer and not MAGIC.startswith(bytes(self._buffer[:4])):
                    raise BadMagic(f"stream does not start with {MAGIC!r}")
                break
            magic, version, msg_type, length = HEADER.unpack(bytes(self._buffer[: HEADER.size]))
            if magic != MAGIC:
                raise BadMagic(f"bad frame magic {magic!r}")
            if version != VERSION:
                raise BadVersion(f"unknown protocol version 0x{version:02x}")
            if length > MAX_PAYLOAD:
                raise Oversize(f"declared payload of {length} bytes exceeds the cap")
            total = HEADER.size + length
            if len(self._buffer) < total:
                break
            payload = bytes(self._buffer[HEADER.size : total])
            del self._buffer[:total]
            messages.append(decode_payload(msg_type, payload))
        return messages

    def finish(self) -> None:
        """Signal end of the byte source; raises if a frame was cut short."""
        if self._buffer:
            raise Truncated(f"source closed with {len(self._buffer)} bytes of a partial frame")


def decode_stream(chunks) -> list[Message]:
    """Decode a finite sequence of byte chunks into the full message list."""
    decoder = StreamDecoder()
    messages: list[Message] = []
    for chunk in chunks:
        messages.extend(decoder.feed(chunk))
    decoder.finish()
    return messages
