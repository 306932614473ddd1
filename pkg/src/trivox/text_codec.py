"""Transcript compression: preprocessing, context dictionary, lossless codec.

Each chunk is compressed independently against a sliding window of
previously delivered plaintext (the context dictionary), so one lost
packet can never poison later ones. The sender only folds a chunk into
its window once the chunk is acknowledged; the receiver folds it in on
successful decode. That ack gating keeps both windows byte-identical.

The compressor backend is pluggable behind a one-byte format marker:
0x01 is a Brotli (RFC 7932) stream when the brotli module is importable,
0x02 is a zlib (RFC 1950) stream and is always available. zlib streams
carry the dictionary's Adler-32, so a desynchronized window is detected
at decode time rather than producing garbage.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import yaml

from .errors import CodecError, DecodeError, DictionaryDesyncError

try:
    import brotli  # type: ignore

    HAVE_BROTLI = True
except ImportError:
    brotli = None
    HAVE_BROTLI = False

FORMAT_BROTLI = 0x01
FORMAT_ZLIB = 0x02
DEFAULT_FORMAT = FORMAT_BROTLI if HAVE_BROTLI else FORMAT_ZLIB

MIN_TEXT_CHARS = 3  # STT spurious-detection filter
DICT_CAPACITY_BYTES = 16 * 1024
PREPROCESS_ASSET = "text_preprocess_en.yaml"


@dataclass(frozen=True)
class TextChunk:
    utterance_id: int
    text: str
    timestamp_cs: int

    def __post_init__(self):
        if len(self.text.strip()) < MIN_TEXT_CHARS:
            raise CodecError(
                f"chunk {self.utterance_id}: text shorter than "
                f"{MIN_TEXT_CHARS} characters after trimming"
            )


@dataclass
class ContextDictionary:
    """Bounded sliding window of recent plaintext, versioned per update."""

    capacity: int = DICT_CAPACITY_BYTES
    window: bytes = b""
    version: int = 0

    def updated(self, plaintext: str) -> "ContextDictionary":
        blob = self.window + plaintext.encode("utf-8") + b"\n"
        if len(blob) > self.capacity:
            blob = blob[-self.capacity :]
        return ContextDictionary(self.capacity, blob, self.version + 1)


def update_context(dictionary: ContextDictionary, plaintext: str) -> ContextDictionary:
    """Append delivered plaintext; evicts oldest bytes beyond capacity."""
    return dictionary.updated(plaintext)


@lru_cache(maxsize=8)
def _load_tables(path: str | None) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
    if path is None:
        text = resources.files("trivox.assets").joinpath(PREPROCESS_ASSET).read_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = yaml.safe_load(text)
    fillers = tuple(doc.get("fillers", ()))
    abbrevs = tuple(sorted(doc.get("abbreviations", {}).items(), key=lambda kv: -len(kv[0])))
    return fillers, abbrevs


def preprocess_text(text: str, tables_path: str | None = None) -> str:
    """Filler removal, abbreviation substitution, punctuation minimization.

    Deterministic and idempotent; repeated application is a no-op.
    """
    fillers, abbrevs = _load_tables(tables_path)
    out = text
    for filler in sorted(fillers, key=len, reverse=True):
        # Drop the filler plus one trailing comma/period and its spacing.
        pattern = r"(?i)\b" + re.escape(filler) + r"\b[,.]?\s*"
        out = re.sub(pattern, "", out)
    for long_form, short_form in abbrevs:
        out = re.sub(r"(?i)\b" + re.escape(long_form) + r"\b", short_form, out)
    out = re.sub(r"([!?.,;:])\1+", r"\1", out)  # collapse repeated punctuation
    out = re.sub(r"\s+([!?.,;:])", r"\1", out)  # no space before punctuation
    out = re.sub(r"[ \t]+", " ", out)
    return out.strip()


def _zlib_level(level: int) -> int:
    # Config levels follow the 1..11 Brotli scale; clamp for zlib.
    return max(1, min(level, 9))


def compress_text(
    chunk: TextChunk,
    dictionary: ContextDictionary,
    level: int,
    fmt: int = DEFAULT_FORMAT,
) -> bytes:
    """Compress one chunk against the current window: [format:1][stream]."""
    raw = chunk.text.encode("utf-8")
    if fmt == FORMAT_BROTLI:
        if not HAVE_BROTLI:
            raise CodecError("brotli backend requested but the module is unavailable")
        comp = brotli.Compressor(quality=max(0, min(level, 11)), dictionary=dictionary.window)
        stream = comp.process(raw) + comp.finish()
    elif fmt == FORMAT_ZLIB:
        if dictionary.window:
            co = zlib.compressobj(_zlib_level(level), zlib.DEFLATED, 15, 8, 0, dictionary.window)
        else:
            co = zlib.compressobj(_zlib_level(level))
        stream = co.compress(raw) + co.flush()
    else:
        raise CodecError(f"unknown text compressor format 0x{fmt:02x}")
    return bytes([fmt]) + stream


def decompress_text(payload: bytes, dictionary: ContextDictionary) -> str:
    """Inverse of compress_text; hard errors on corruption or desync."""
    if len(payload) < 2:
        raise DecodeError("text payload too short to carry a format byte and stream")
    fmt, stream = payload[0], payload[1:]
    if fmt == FORMAT_BROTLI:
        if not HAVE_BROTLI:
            raise DecodeError("payload uses the brotli format but the module is unavailable")
        try:
            decomp = brotli.Decompressor(dictionary=dictionary.window)
            raw = decomp.process(stream)
        except Exception as exc:  # brotli raises its own error type
            raise DecodeError(f"brotli stream corrupt: {exc}") from exc
    elif fmt == FORMAT_ZLIB:
        # RFC 1950 FDICT flag: stream was built against a preset dictionary.
        if len(stream) >= 2 and (stream[1] & 0x20) and not dictionary.window:
            raise DictionaryDesyncError(
                "stream requires a context dictionary but the local window is empty"
            )
        try:
            if dictionary.window:
                do = zlib.decompressobj(zdict=dictionary.window)
            else:
                do = zlib.decompressobj()
            raw = do.decompress(stream) + do.flush()
            if do.unconsumed_tail:
                raise DecodeError("trailing garbage after zlib stream")
        except zlib.error as exc:
            msg = str(exc)
            if "zdict" in msg or "dictionary" in msg:
                raise DictionaryDesyncError(
                    f"context dictionary mismatch (version {dictionary.version}): {msg}"
                ) from exc
            raise DecodeError(f"zlib stream corrupt: {msg}") from exc
    else:
        raise DecodeError(f"unknown text compressor format 0x{fmt:02x}")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"decompressed bytes are not valid UTF-8: {exc}") from exc
