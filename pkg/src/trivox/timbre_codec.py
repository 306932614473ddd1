"""Speaker-embedding codec: precision quantization, lossless compression,
profile caching, and change detection.

Embeddings arrive from files or adapters (the extraction model lives
outside this toolkit). A profile id is the 64-bit content hash of the
quantized bytes, so identical voices map to identical ids across sessions
for free.

Wire payloads:
    TIMBRE         [precision:1][codec:1][stream]
    TIMBRE_PROFILE [profile_id:8]

The codec byte selects stored (0) or zlib (1); compression falls back to
stored whenever zlib would not shrink the payload, so accounting sees
exactly 384 bytes for an incompressible half-precision embedding.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import CodecError, DecodeError

PRECISION_BYTES = {"half": 2, "single": 4}
_PRECISION_ID = {"half": 0x01, "single": 0x02}
_ID_PRECISION = {v: k for k, v in _PRECISION_ID.items()}
CODEC_STORED = 0x00
CODEC_ZLIB = 0x01
PROFILE_ID_BYTES = 8
DEFAULT_CACHE_CAPACITY = 64


@dataclass(frozen=True)
class TimbreEmbedding:
    values: np.ndarray  # float32
    precision: str = "half"
    speaker_hint: str | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise CodecError("embedding must be a 1-D vector")
        if not np.isfinite(v).all():
            raise CodecError("embedding contains non-finite values")
        if float(np.linalg.norm(v)) == 0.0:
            raise CodecError("embedding has zero norm")
        if self.precision not in PRECISION_BYTES:
            raise CodecError(f"precision must be half|single: {self.precision!r}")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TimbreProfileId:
    """64-bit content hash of the quantized embedding bytes."""

    id: int

    @classmethod
    def of(cls, quantized: bytes) -> "TimbreProfileId":
        digest = hashlib.blake2b(quantized, digest_size=PROFILE_ID_BYTES).digest()
        return cls(int.from_bytes(digest, "big"))

    def to_bytes(self) -> bytes:
        return self.id.to_bytes(PROFILE_ID_BYTES, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "TimbreProfileId":
        if len(data) != PROFILE_ID_BYTES:
            raise DecodeError(f"profile id must be {PROFILE_ID_BYTES} bytes, got {len(data)}")
        return cls(int.from_bytes(data, "big"))


def quantize_embedding(emb: TimbreEmbedding, precision: str | None = None) -> bytes:
    """Little-endian float16/float32 bytes; round-half-to-even conversion."""
    precision = precision or emb.precision
    if precision == "half":
        return emb.values.astype("<f2").tobytes()
    if precision == "single":
        return emb.values.astype("<f4").tobytes()
    raise CodecError(f"unknown precision {precision!r}")


def dequantize_embedding(payload: bytes, precision: str) -> np.ndarray:
    width = PRECISION_BYTES[precision]
    if len(payload) % width:
        raise DecodeError(f"payload length {len(payload)} not a multiple of {width}")
    dtype = "<f2" if precision == "half" else "<f4"
    return np.frombuffer(payload, dtype=dtype).astype(np.float32)


def compress_embedding(payload: bytes, level: int = 6) -> bytes:
    """[codec:1][stream]: best of stored and zlib, never larger than stored."""
    squeezed = zlib.compress(payload, level)
    if len(squeezed) < len(payload):
        return bytes([CODEC_ZLIB]) + squeezed
    return bytes([CODEC_STORED]) + payload


def decompress_embedding(blob: bytes) -> bytes:
    if not blob:
        raise DecodeError("empty timbre payload")
    codec, stream = blob[0], blob[1:]
    if codec == CODEC_STORED:
        return stream
    if codec == CODEC_ZLIB:
        try:
            return zlib.decompress(stream)
        except zlib.error as exc:
            raise DecodeError(f"timbre stream corrupt: {exc}") from exc
    raise DecodeError(f"unknown timbre codec 0x{codec:02x}")


def build_timbre_payload(emb: TimbreEmbedding, precision: str | None = None) -> bytes:
    precision = precision or emb.precision
    quantized = quantize_embedding(emb, precision)
    return bytes([_PRECISION_ID[precision]]) + compress_embedding(quantized)


def parse_timbre_payload(payload: bytes) -> tuple[str, bytes]:
    """Return (precision, quantized bytes) from a TIMBRE wire payload."""
    if len(payload) < 2:
        raise DecodeError("timbre payload too short")
    try:
        precision = _ID_PRECISION[payload[0]]
    except KeyError:
        raise DecodeError(f"unknown precision marker 0x{payload[0]:02x}") from None
    return precision, decompress_embedding(payload[1:])


def compressed_stream_size(payload: bytes) -> int:
    """Size of the compressed embedding stream, excluding the two marker
    bytes; this is the quantity the payload-bitrate accounting uses."""
    if len(payload) < 2:
        raise DecodeError("timbre payload too short")
    return len(payload) - 2


def cosine_similarity(a: TimbreEmbedding, b: TimbreEmbedding) -> float:
    if a.dim != b.dim:
        raise CodecError(f"dimension mismatch: {a.dim} vs {b.dim}")
    num = float(np.dot(a.values, b.values))
    den = float(np.linalg.norm(a.values) * np.linalg.norm(b.values))
    return num / den


def detect_speaker_change(
    current: TimbreEmbedding, previous: TimbreEmbedding, threshold: float = 0.7
) -> bool:
    """True iff cosine similarity is strictly below the threshold."""
    return cosine_similarity(current, previous) < threshold


class ProfileCache:
    """Receiver-side LRU cache of timbre profiles."""

    def __init__(self, capacity: int = DEFAULT_CACHE_CAPACITY):
        if capacity < 1:
            raise CodecError("cache capacity must be at least 1")
        self.capacity = capacity
        self._entries: "OrderedDict[int, tuple[str, bytes]]" = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pid: TimbreProfileId) -> bool:
        return pid.id in self._entries

    def put(self, pid: TimbreProfileId, precision: str, quantized: bytes) -> None:
        self._entries[pid.id] = (precision, quantized)
        self._entries.move_to_end(pid.id)
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    def get(self, pid: TimbreProfileId) -> tuple[str, bytes] | None:
        entry = self._entries.get(pid.id)
        if entry is not None:
            self._entries.move_to_end(pid.id)
        return entry


class SendDecision(Enum):
    SEND_PROFILE_ID = "send_profile_id"
    SEND_FULL_EMBEDDING = "send_full_embedding"


def resolve_profile(known_profile_ids: set[int], pid: TimbreProfileId) -> SendDecision:
    """Choose the wire form: the 8-byte id when the receiver is known to
    hold it, the full embedding otherwise."""
    if pid.id in known_profile_ids:
        return SendDecision.SEND_PROFILE_ID
    return SendDecision.SEND_FULL_EMBEDDING


def load_embedding(path: str | Path, precision: str = "half") -> TimbreEmbedding:
    """Fixture loader: raw little-endian float32 (.emb) or a JSON array."""
    path = Path(path)
    if not path.exists():
        raise CodecError(f"embedding file not found: {path}")
    if path.suffix.lower() == ".json":
        values = np.asarray(json.loads(path.read_text()), dtype=np.float32)
    else:
        values = np.fromfile(path, dtype="<f4")
    return TimbreEmbedding(values, precision)


def save_embedding(path: str | Path, values: np.ndarray) -> None:
    np.asarray(values, dtype="<f4").tofile(path)
