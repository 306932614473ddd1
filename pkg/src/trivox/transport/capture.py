"""Bitstream capture files: magic "STCT", version, mode name, then
length-prefixed packets in transmission order. Replayable by the decoder.
"""

from __future__ import annotations

import io
from pathlib import Path

from ..errors import ProtocolError

CAPTURE_MAGIC = b"STCT"
CAPTURE_VERSION = 1


def write_capture(path: str | Path, mode_name: str, packets: list[bytes]) -> None:
    name = mode_name.encode("utf-8")
    if len(name) > 255:
        raise ProtocolError("mode name too long for the capture header")
    with open(path, "wb") as fh:
        fh.write(CAPTURE_MAGIC)
        fh.write(bytes([CAPTURE_VERSION, len(name)]))
        fh.write(name)
        for pkt in packets:
            if len(pkt) >= 1 << 16:
                raise ProtocolError(f"packet of {len(pkt)} bytes exceeds the length prefix")
            fh.write(len(pkt).to_bytes(2, "big"))
            fh.write(pkt)


def read_capture(path: str | Path) -> tuple[str, list[bytes]]:
    """Returns (mode_name, packets). Truncation errors name the last
    packet that parsed cleanly."""
    data = Path(path).read_bytes()
    buf = io.BytesIO(data)
    magic = buf.read(4)
    if magic != CAPTURE_MAGIC:
        raise ProtocolError(f"bad capture magic {magic!r}; expected {CAPTURE_MAGIC!r}")
    head = buf.read(2)
    if len(head) < 2:
        raise ProtocolError("capture truncated inside the fixed header")
    version, name_len = head
    if version != CAPTURE_VERSION:
        raise ProtocolError(f"unsupported capture version {version}")
    name = buf.read(name_len)
    if len(name) < name_len:
        raise ProtocolError("capture truncated inside the mode name")
    packets: list[bytes] = []
    while True:
        prefix = buf.read(2)
        if not prefix:
            break
        if len(prefix) < 2:
            raise ProtocolError(
                f"capture truncated after packet {len(packets) - 1}: dangling length prefix"
            )
        n = int.from_bytes(prefix, "big")
        pkt = buf.read(n)
        if len(pkt) < n:
            raise ProtocolError(
                f"capture truncated after packet {len(packets) - 1}: "
                f"packet {len(packets)} needs {n} bytes, found {len(pkt)}"
            )
        packets.append(pkt)
    return name.decode("utf-8"), packets
