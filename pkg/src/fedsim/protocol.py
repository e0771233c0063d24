"""Binary wire format for the round protocol.

Every message travels in a frame: a 4-byte unsigned big-endian payload
length (excluding itself), then the payload.  Payloads are capped at 4096
bytes.  Payload layouts, sizes including the length prefix in parentheses:

    HELLO      0x00 | version u8 | client_id u32 BE              (10 bytes)
    ASSIGNMENT 0x01 | round u32 BE | 17 x f64 LE                 (145 bytes)
    UPDATE     0x02 | round u32 BE | client_id u32 BE |
                      sample_count u32 BE | 17 x f64 LE          (153 bytes)
    SHUTDOWN   0x03                                              (5 bytes)
    ACK        0x04                                              (5 bytes)
    ERROR      0x7F | reason u8                                  (6 bytes)

Integers are big-endian per network convention; the 17 weight doubles are
LITTLE-endian in the canonical order w_input rows 0..2 as [in0, in1, bias]
then w_hidden rows 0..1 as [h0, h1, h2, bias].  The mixed endianness is easy
to trip over - PROTOCOL.md is the normative reference, and golden byte
fixtures under fixtures/ pin the layout for every implementation.

The model payload is fixed-size (no dimension header) because the network
architecture is frozen at 2-3-2; the handshake's version byte is the
forward-compatibility hook.
"""

from __future__ import annotations

import math
import socket
import struct
from dataclasses import dataclass

from .ann import ModelWeights, N_WEIGHTS

PROTOCOL_VERSION = 0x01
MAX_PAYLOAD = 4096

MSG_HELLO = 0x00
MSG_ASSIGNMENT = 0x01
MSG_UPDATE = 0x02
MSG_SHUTDOWN = 0x03
MSG_ACK = 0x04
MSG_ERROR = 0x7F

ERR_VERSION_MISMATCH = 0x01
ERR_MALFORMED = 0x02
ERR_PROTOCOL_VIOLATION = 0x03

WEIGHTS_WIRE_SIZE = 8 * N_WEIGHTS  # 136

_U32 = struct.Struct(">I")
_F64LE = struct.Struct("<17d")


class ProtocolError(Exception):
    """A payload failed to decode; ``offset`` names the offending byte."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class TransportError(Exception):
    """A connection died or misbehaved mid-run."""


@dataclass(frozen=True)
class Assignment:
    round: int
    model: ModelWeights


@dataclass(frozen=True)
class Update:
    round: int
    client_id: int
    model: ModelWeights
    sample_count: int


@dataclass(frozen=True)
class Hello:
    version: int
    client_id: int


@dataclass(frozen=True)
class Ack:
    pass


@dataclass(frozen=True)
class Shutdown:
    pass


@dataclass(frozen=True)
class ProtocolErrorMsg:
    reason: int


Message = Assignment | Update | Hello | Ack | Shutdown | ProtocolErrorMsg


def encode_weights(model: ModelWeights) -> bytes:
    return _F64LE.pack(*model.flat())


def decode_weights(payload: bytes, offset: int) -> ModelWeights:
    if len(payload) < offset + WEIGHTS_WIRE_SIZE:
        raise ProtocolError("truncated weight block", offset=len(payload))
    values = _F64LE.unpack_from(payload, offset)
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise ProtocolError("non-finite weight on the wire", offset=offset + 8 * i)
    return ModelWeights.from_flat(values)


def _check_u32(value: int, name: str) -> int:
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(f"{name} must fit an unsigned 32-bit field")
    return value


def encode_assignment(a: Assignment) -> bytes:
    return (
        bytes([MSG_ASSIGNMENT])
        + _U32.pack(_check_u32(a.round, "round"))
        + encode_weights(a.model)
    )


def decode_assignment(payload: bytes) -> Assignment:
    msg = decode_message(payload)
    if not isinstance(msg, Assignment):
        raise ProtocolError("expected an assignment payload", offset=0)
    return msg


def encode_update(u: Update) -> bytes:
    return (
        bytes([MSG_UPDATE])
        + _U32.pack(_check_u32(u.round, "round"))
        + _U32.pack(_check_u32(u.client_id, "client_id"))
        + _U32.pack(_check_u32(u.sample_count, "sample_count"))
        + encode_weights(u.model)
    )


def decode_update(payload: bytes) -> Update:
    msg = decode_message(payload)
    if not isinstance(msg, Update):
        raise ProtocolError("expected an update payload", offset=0)
    return msg


def encode_hello(h: Hello) -> bytes:
    return bytes([MSG_HELLO, h.version]) + _U32.pack(_check_u32(h.client_id, "client_id"))


def encode_ack() -> bytes:
    return bytes([MSG_ACK])


def encode_shutdown() -> bytes:
    return bytes([MSG_SHUTDOWN])


def encode_error(reason: int) -> bytes:
    return bytes([MSG_ERROR, reason])


def _require_length(payload: bytes, expected: int, what: str) -> None:
    if len(payload) != expected:
        offset = min(len(payload), expected)
        raise ProtocolError(
            f"{what} payload must be {expected} bytes, got {len(payload)}",
            offset=offset,
        )


def decode_message(payload: bytes) -> Message:
    """Total decoder: returns a message or raises ProtocolError, never crashes."""
    if len(payload) == 0:
        raise ProtocolError("empty payload", offset=0)
    if len(payload) > MAX_PAYLOAD:
        raise ProtocolError("payload exceeds 4096-byte cap", offset=MAX_PAYLOAD)
    kind = payload[0]
    if kind == MSG_ASSIGNMENT:
        _require_length(payload, 1 + 4 + WEIGHTS_WIRE_SIZE, "assignment")
        (round_,) = _U32.unpack_from(payload, 1)
        return Assignment(round=round_, model=decode_weights(payload, 5))
    if kind == MSG_UPDATE:
        _require_length(payload, 1 + 12 + WEIGHTS_WIRE_SIZE, "update")
        (round_,) = _U32.unpack_from(payload, 1)
        (client_id,) = _U32.unpack_from(payload, 5)
        (sample_count,) = _U32.unpack_from(payload, 9)
        if sample_count < 1:
            raise ProtocolError("sample_count must be >= 1", offset=9)
        return Update(
            round=round_,
            client_id=client_id,
            model=decode_weights(payload, 13),
            sample_count=sample_count,
        )
    if kind == MSG_HELLO:
        _require_length(payload, 6, "hello")
        (client_id,) = _U32.unpack_from(payload, 2)
        return Hello(version=payload[1], client_id=client_id)
    if kind == MSG_SHUTDOWN:
        _require_length(payload, 1, "shutdown")
        return Shutdown()
    if kind == MSG_ACK:
        _require_length(payload, 1, "ack")
        return Ack()
    if kind == MSG_ERROR:
        _require_length(payload, 2, "error")
        return ProtocolErrorMsg(reason=payload[1])
    raise ProtocolError(f"unknown message type 0x{kind:02X}", offset=0)


def frame(payload: bytes) -> bytes:
    """Prefix a payload with its 4-byte big-endian length."""
    if len(payload) > MAX_PAYLOAD:
        raise ValueError("payload exceeds 4096-byte cap")
    return _U32.pack(len(payload)) + payload


def write_frame(sock: socket.socket, payload: bytes) -> None:
    try:
        sock.sendall(frame(payload))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        try:
            chunk = sock.recv(n - got)
        except OSError as exc:
            raise TransportError(f"recv failed: {exc}") from exc
        if not chunk:
            raise TransportError("connection closed mid-frame")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket) -> bytes:
    """Read one length-prefixed payload; raises TransportError on a dead peer."""
    header = _recv_exact(sock, 4)
    (length,) = _U32.unpack(header)
    if length > MAX_PAYLOAD:
        raise TransportError(f"peer announced oversized frame ({length} bytes)")
    return _recv_exact(sock, length)
