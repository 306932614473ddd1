"""Bit-exact packet wire format.

Header layout (big-endian, MSB first within the lead byte):

    byte 0: version:2 | ptype:3 | priority:2 | flags:1
    bytes 1-2: seq (u16, per-ptype stream, wraps)
    bytes 3-5: timestamp_cs (u24, wraps at ~46.6 h)
    bytes 6-7: payload length (u16) -- TEXT and TIMBRE only

6 bytes fixed, 8 with the length field. Every packet ends with a
CRC-16/CCITT over header+payload; the CRC must verify before any payload
parsing.
"""

from __future__ import annotations

import binascii
from dataclasses import dataclass
from enum import IntEnum

from ..errors import ProtocolError

PROTOCOL_VERSION = 1
SEQ_MODULUS = 1 << 16
TIMESTAMP_MODULUS = 1 << 24
CRC_BYTES = 2


class PacketType(IntEnum):
    TEXT = 0
    PROSODY_KEY = 1
    PROSODY_DELTA = 2
    TIMBRE = 3
    TIMBRE_PROFILE = 4


class Priority(IntEnum):
    HIGH = 0
    MEDIUM = 1
    LOW = 2


# Perceptual-importance tiers: text and speaker identity are critical,
# keyframes anchor interpolation, deltas are expendable.
DEFAULT_PRIORITY = {
    PacketType.TEXT: Priority.HIGH,
    PacketType.TIMBRE: Priority.HIGH,
    PacketType.TIMBRE_PROFILE: Priority.HIGH,
    PacketType.PROSODY_KEY: Priority.MEDIUM,
    PacketType.PROSODY_DELTA: Priority.LOW,
}

_LENGTH_CARRIERS = (PacketType.TEXT, PacketType.TIMBRE)


def header_size(ptype: PacketType) -> int:
    return 8 if ptype in _LENGTH_CARRIERS else 6


@dataclass(frozen=True)
class PacketHeader:
    ptype: PacketType
    seq: int
    timestamp_cs: int
    priority: Priority
    flags: int = 0
    version: int = PROTOCOL_VERSION
    length: int | None = None  # payload length, TEXT/TIMBRE only

    def __post_init__(self):
        if not (0 <= self.version < 4):
            raise ProtocolError(f"version out of 2-bit range: {self.version}")
        if not (0 <= self.seq < SEQ_MODULUS):
            raise ProtocolError(f"seq out of 16-bit range: {self.seq}")
        if not (0 <= self.timestamp_cs < TIMESTAMP_MODULUS):
            raise ProtocolError(f"timestamp out of 24-bit range: {self.timestamp_cs}")
        if self.flags not in (0, 1):
            raise ProtocolError(f"flags is a single bit: {self.flags}")
        carries = self.ptype in _LENGTH_CARRIERS
        if carries and self.length is None:
            raise ProtocolError(f"{self.ptype.name} header requires a length field")
        if not carries and self.length is not None:
            raise ProtocolError(f"{self.ptype.name} header carries no length field")
        if self.length is not None and not (0 <= self.length < 1 << 16):
            raise ProtocolError(f"length out of 16-bit range: {self.length}")


def build_header(header: PacketHeader) -> bytes:
    lead = (
        (header.version << 6)
        | (int(header.ptype) << 3)
        | (int(header.priority) << 1)
        | header.flags
    )
    out = bytes([lead])
    out += header.seq.to_bytes(2, "big")
    out += header.timestamp_cs.to_bytes(3, "big")
    if header.length is not None:
        out += header.length.to_bytes(2, "big")
    return out


def parse_header(data: bytes) -> tuple[PacketHeader, int]:
    """Parse a header from the front of data; returns (header, bytes used)."""
    if len(data) < 6:
        raise ProtocolError(f"truncated header: {len(data)} bytes")
    lead = data[0]
    version = lead >> 6
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unknown protocol version {version}")
    ptype_raw = (lead >> 3) & 0x7
    try:
        ptype = PacketType(ptype_raw)
    except ValueError:
        raise ProtocolError(f"unknown packet type {ptype_raw}") from None
    priority = Priority((lead >> 1) & 0x3) if (lead >> 1) & 0x3 != 3 else None
    if priority is None:
        raise ProtocolError("priority bits 3 are reserved")
    flags = lead & 1
    seq = int.from_bytes(data[1:3], "big")
    ts = int.from_bytes(data[3:6], "big")
    size = header_size(ptype)
    length = None
    if size == 8:
        if len(data) < 8:
            raise ProtocolError("truncated header: missing length field")
        length = int.from_bytes(data[6:8], "big")
    return (
        PacketHeader(ptype, seq, ts, priority, flags, version, length),
        size,
    )


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF)."""
    return binascii.crc_hqx(data, 0xFFFF)


@dataclass(frozen=True)
class Packet:
    header: PacketHeader
    payload: bytes

    @property
    def wire_size(self) -> int:
        return header_size(self.header.ptype) + len(self.payload) + CRC_BYTES


def encode_packet(packet: Packet) -> bytes:
    head = build_header(packet.header)
    body = head + packet.payload
    return body + crc16(body).to_bytes(2, "big")


def decode_packet(data: bytes) -> Packet:
    """Parse and CRC-verify one whole packet (datagram framing)."""
    header, used = parse_header(data)
    if len(data) < used + CRC_BYTES:
        raise ProtocolError("packet shorter than header plus checksum")
    payload = data[used:-CRC_BYTES]
    claimed = int.from_bytes(data[-CRC_BYTES:], "big")
    actual = crc16(data[:-CRC_BYTES])
    if claimed != actual:
        raise ProtocolError(
            f"crc mismatch: header claims 0x{claimed:04x}, computed 0x{actual:04x}"
        )
    if header.length is not None and header.length != len(payload):
        raise ProtocolError(
            f"length field {header.length} != payload size {len(payload)}"
        )
    return Packet(header, payload)


def make_packet(
    ptype: PacketType,
    seq: int,
    timestamp_cs: int,
    payload: bytes,
    priority: Priority | None = None,
    flags: int = 0,
) -> Packet:
    priority = DEFAULT_PRIORITY[ptype] if priority is None else priority
    length = len(payload) if ptype in _LENGTH_CARRIERS else None
    header = PacketHeader(
        ptype=ptype,
        seq=seq % SEQ_MODULUS,
        timestamp_cs=timestamp_cs % TIMESTAMP_MODULUS,
        priority=priority,
        flags=flags,
        length=length,
    )
    return Packet(header, payload)


def unwrap_timestamp(ts: int, reference: int) -> int:
    """Nearest-window disambiguation of a wrapped 24-bit timestamp."""
    base = reference - (reference % TIMESTAMP_MODULUS)
    candidates = (base + ts - TIMESTAMP_MODULUS, base + ts, base + ts + TIMESTAMP_MODULUS)
    return min(candidates, key=lambda c: abs(c - reference))
