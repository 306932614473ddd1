"""Static canonical Huffman coding for quantized prosody codes.

Codebooks ship as a versioned JSON asset (one table per code bit-width,
trained offline on a zero-concentrated Laplacian; see
scripts/build_huffman_tables.py). Static tables keep every packet
independently decodable after loss, which adaptive coding would break.

Bitstrings are MSB-first. Decoding is total: a corrupted prefix either
resolves to an in-alphabet symbol or raises DecodeError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..errors import DecodeError

TABLE_ASSET = "huffman_tables.json"


class BitWriter:
    """MSB-first bit accumulator."""

    def __init__(self):
        self._bits: list[int] = []

    def write(self, value: int, n_bits: int) -> None:
        for shift in range(n_bits - 1, -1, -1):
            self._bits.append((value >> shift) & 1)

    def __len__(self) -> int:
        return len(self._bits)

    def to_bytes(self) -> bytes:
        out = bytearray()
        acc = 0
        for i, b in enumerate(self._bits):
            acc = (acc << 1) | b
            if i % 8 == 7:
                out.append(acc)
                acc = 0
        rem = len(self._bits) % 8
        if rem:
            out.append(acc << (8 - rem))
        return bytes(out)


class BitReader:
    """MSB-first bit consumer over a bytes payload."""

    def __init__(self, data: bytes, bit_length: int | None = None):
        self._data = data
        self._limit = 8 * len(data) if bit_length is None else bit_length
        if self._limit > 8 * len(data):
            raise DecodeError(
                f"declared bit length {self._limit} exceeds payload ({8 * len(data)} bits)"
            )
        self._pos = 0

    @property
    def remaining(self) -> int:
        return self._limit - self._pos

    def read_bit(self) -> int:
        if self._pos >= self._limit:
            raise DecodeError("bitstring exhausted mid-symbol")
        byte = self._data[self._pos >> 3]
        bit = (byte >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def read(self, n_bits: int) -> int:
        v = 0
        for _ in range(n_bits):
            v = (v << 1) | self.read_bit()
        return v


@dataclass(frozen=True)
class CanonicalCodebook:
    """Canonical prefix code over a signed integer alphabet."""

    bits: int  # quantizer bit-width this table serves
    encode_table: dict[int, tuple[int, int]]  # symbol -> (code, length)
    # Decoding state per code length L: (first_code[L], first_index[L]).
    first_code: dict[int, int]
    first_index: dict[int, int]
    symbols_by_rank: tuple[int, ...]
    max_length: int

    @classmethod
    def from_lengths(cls, bits: int, table: list[tuple[int, int]]) -> "CanonicalCodebook":
        """Build from (symbol, length) rows already in canonical order."""
        encode: dict[int, tuple[int, int]] = {}
        first_code: dict[int, int] = {}
        first_index: dict[int, int] = {}
        symbols = tuple(sym for sym, _ in table)
        code = 0
        prev_len = 0
        for rank, (sym, length) in enumerate(table):
            code <<= length - prev_len
            if length not in first_code:
                first_code[length] = code
                first_index[length] = rank
            encode[sym] = (code, length)
            code += 1
            prev_len = length
        return cls(bits, encode, first_code, first_index, symbols, table[-1][1])

    def encode(self, symbol: int, writer: BitWriter) -> None:
        try:
            code, length = self.encode_table[symbol]
        except KeyError:
            raise DecodeError(
                f"symbol {symbol} outside the {self.bits}-bit alphabet"
            ) from None
        writer.write(code, length)

    def decode(self, reader: BitReader) -> int:
        code = 0
        for length in range(1, self.max_length + 1):
            code = (code << 1) | reader.read_bit()
            if length in self.first_code:
                offset = code - self.first_code[length]
                idx = self.first_index[length] + offset
                # Valid iff the offset stays inside this length's run.
                nxt = self._run_end(length)
                if 0 <= offset and idx < nxt:
                    return self.symbols_by_rank[idx]
        raise DecodeError("bit pattern matches no codeword")

    def _run_end(self, length: int) -> int:
        later = [self.first_index[l] for l in self.first_index if l > length]
        return min(later) if later else len(self.symbols_by_rank)

    def code_length(self, symbol: int) -> int:
        return self.encode_table[symbol][1]


@lru_cache(maxsize=None)
def _load_asset() -> dict:
    data = resources.files("trivox.assets").joinpath(TABLE_ASSET).read_text()
    doc = json.loads(data)
    if doc.get("version") != 1:
        raise DecodeError(f"unsupported codebook version {doc.get('version')!r}")
    return doc


@lru_cache(maxsize=None)
def codebook_for_bits(bits: int) -> CanonicalCodebook:
    """The shipped codebook serving a b-bit quantizer alphabet."""
    doc = _load_asset()
    try:
        rows = doc["tables"][str(bits)]
    except KeyError:
        raise DecodeError(f"no shipped codebook for bit width {bits}") from None
    return CanonicalCodebook.from_lengths(bits, [tuple(r) for r in rows])


def encode_codes(codes: list[int], widths: list[int]) -> tuple[bytes, int]:
    """Entropy-code one keyframe's quantized codes (one per feature).

    Returns (bytes, bit_length)."""
    w = BitWriter()
    for code, bits in zip(codes, widths):
        codebook_for_bits(bits).encode(code, w)
    return w.to_bytes(), len(w)


def decode_codes(data: bytes, bit_length: int, widths: list[int]) -> list[int]:
    """Inverse of encode_codes; raises DecodeError on any invalid prefix."""
    r = BitReader(data, bit_length)
    return [codebook_for_bits(bits).decode(r) for bits in widths]
