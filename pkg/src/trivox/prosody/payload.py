"""Keyframe payloads: delta encoding, quantization, entropy coding, framing.

Wire layout per keyframe payload, MSB-first:

    [voiced:1][is_absolute:1][per enabled feature: Huffman codeword]

in canonical feature order (pitch, energy, rate), the pitch codeword
omitted while unvoiced. The transport header carries the timestamp; the
payload records its exact bit length for payload-only bitrate accounting.

Delta coding is open-loop (plain keyframe differences), so quantization
error accumulates additively between anchors; every 16th keyframe is sent
absolute to bound drift and to give loss recovery an anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import QualityModeConfig
from ..dsp.track import ProsodyTrack
from ..errors import CodecError, DecodeError
from . import huffman
from .quantizer import QuantizerSpec, spec_for
from .schedule import KeyframeSchedule

ABSOLUTE_INTERVAL = 16
TIMESTAMP_MODULUS = 1 << 24  # centisecond timestamps wrap at 24 bits
MAX_SMOOTH_FRAMES = 100  # anti-alias window cap: 1 s


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return x
    sums = np.concatenate(([0.0], np.cumsum(x)))
    ones = np.concatenate(([0.0], np.cumsum(np.ones_like(x))))
    half = window // 2
    n = len(x)
    lo = np.clip(np.arange(n) - half, 0, n)
    hi = np.clip(np.arange(n) + half + 1, 0, n)
    return (sums[hi] - sums[lo]) / (ones[hi] - ones[lo])


def smooth_for_sampling(track: ProsodyTrack, stride_frames: int) -> ProsodyTrack:
    """Anti-alias the feature tracks before sparse keyframe sampling.

    Keyframes sample the macro-contour; syllable-scale micro-structure
    above the keyframe Nyquist would otherwise alias into the deltas. The
    window matches the keyframe interval, capped at one second. Pitch is
    averaged over voiced frames only so unvoiced zeros cannot drag the
    contour; voicing flags pass through untouched.
    """
    window = min(stride_frames, MAX_SMOOTH_FRAMES)
    if window <= 1:
        return track
    energy = _moving_average(track.energy_norm, window)
    rate = _moving_average(track.rate_norm, window)

    voiced = track.voiced
    vmask = voiced.astype(np.float64)
    pitch_sum = _moving_average(track.f0_norm * vmask, window)
    pitch_cnt = _moving_average(vmask, window)
    pitch = np.where(pitch_cnt > 0, pitch_sum / np.maximum(pitch_cnt, 1e-12), 0.0)
    pitch[~voiced & (pitch_cnt <= 0)] = 0.0
    pitch = np.where(voiced | (pitch_cnt > 0), pitch, 0.0)

    return ProsodyTrack(pitch, energy, rate, voiced.copy())


@dataclass(frozen=True)
class DeltaVector:
    """One keyframe's feature deltas (absolute values for anchor frames)."""

    values: dict[str, float]  # enabled features only; no pitch when unvoiced
    is_absolute: bool
    voiced: bool
    frame_index: int


@dataclass(frozen=True)
class ProsodyPayload:
    timestamp_cs: int
    data: bytes
    bit_length: int
    is_absolute: bool
    voiced: bool

    def __post_init__(self):
        if self.bit_length < 2:
            raise CodecError("payload must carry at least the two flag bits")


def delta_encode(
    track: ProsodyTrack,
    schedule: KeyframeSchedule,
    features: tuple[str, ...],
    absolute_interval: int = ABSOLUTE_INTERVAL,
) -> list[DeltaVector]:
    """Keyframe deltas; element 0 (and every absolute_interval-th) absolute."""
    if not features:
        raise CodecError("no enabled features to encode")
    if schedule.indices and schedule.indices[-1] >= len(track):
        raise CodecError("schedule extends past the track")
    out: list[DeltaVector] = []
    prev: dict[str, float] = {f: 0.0 for f in features}
    for k, t in enumerate(schedule.indices):
        voiced = bool(track.voiced[t])
        is_abs = (k % absolute_interval) == 0
        values: dict[str, float] = {}
        for f in features:
            if f == "pitch" and not voiced:
                continue  # no pitch bits; the accumulator holds its value
            cur = float(track.feature(f)[t])
            values[f] = cur if is_abs else cur - prev[f]
            prev[f] = cur
        out.append(DeltaVector(values, is_abs, voiced, t))
    return out


def delta_decode(deltas: list[DeltaVector], features: tuple[str, ...]):
    """Recover keyframe values from (unquantized) delta vectors.

    Unvoiced keyframes carry no pitch entry; the pitch chain resumes from
    its held value at the next voiced keyframe."""
    acc: dict[str, float] = {f: 0.0 for f in features}
    out = []
    for d in deltas:
        values: dict[str, float] = {}
        for f in features:
            if f == "pitch" and not d.voiced:
                continue
            if d.is_absolute:
                acc[f] = d.values[f]
            else:
                acc[f] += d.values[f]
            values[f] = acc[f]
        out.append((d.frame_index, values, d.voiced))
    return out


def payload_features(features: tuple[str, ...], voiced: bool) -> tuple[str, ...]:
    if voiced:
        return features
    return tuple(f for f in features if f != "pitch")


def encode_keyframe(
    delta: DeltaVector,
    timestamp_cs: int,
    cfg: QualityModeConfig,
    specs: dict[str, QuantizerSpec] | None = None,
) -> ProsodyPayload:
    """Quantize and entropy-code one keyframe into a wire payload."""
    features = cfg.enabled_features()
    if not features:
        raise CodecError("config enables no prosody features; nothing to packetize")
    specs = specs or {f: spec_for(cfg, f) for f in features}
    active = payload_features(features, delta.voiced)

    codes = [specs[f].quantize(delta.values[f]) for f in active]
    widths = [specs[f].bits for f in active]

    w = huffman.BitWriter()
    w.write(1 if delta.voiced else 0, 1)
    w.write(1 if delta.is_absolute else 0, 1)
    for code, bits in zip(codes, widths):
        huffman.codebook_for_bits(bits).encode(code, w)
    return ProsodyPayload(
        timestamp_cs=timestamp_cs % TIMESTAMP_MODULUS,
        data=w.to_bytes(),
        bit_length=len(w),
        is_absolute=delta.is_absolute,
        voiced=delta.voiced,
    )


def parse_payload(
    data: bytes, cfg: QualityModeConfig, specs: dict[str, QuantizerSpec] | None = None
) -> tuple[bool, bool, dict[str, int]]:
    """Decode a wire payload to (voiced, is_absolute, codes-per-feature).

    Raises DecodeError when the bitstring is truncated or matches no
    codeword; decodable-but-corrupt values stay inside the quantizer
    alphabet by construction.
    """
    features = cfg.enabled_features()
    specs = specs or {f: spec_for(cfg, f) for f in features}
    r = huffman.BitReader(data)
    voiced = bool(r.read_bit())
    is_abs = bool(r.read_bit())
    codes: dict[str, int] = {}
    for f in payload_features(features, voiced):
        codes[f] = huffman.codebook_for_bits(specs[f].bits).decode(r)
    if r.remaining >= 8:
        raise DecodeError("payload longer than the decoded keyframe")
    return voiced, is_abs, codes


class ProsodyStreamEncoder:
    """Sender-side keyframe stream: enforces monotone timestamps."""

    def __init__(self, cfg: QualityModeConfig):
        self.cfg = cfg
        self.specs = {f: spec_for(cfg, f) for f in cfg.enabled_features()}
        self._last_ts: int | None = None

    def encode(self, track: ProsodyTrack, schedule: KeyframeSchedule) -> list[ProsodyPayload]:
        smoothed = smooth_for_sampling(track, schedule.stride_frames)
        deltas = delta_encode(smoothed, schedule, self.cfg.enabled_features())
        out = []
        for d in deltas:
            ts = d.frame_index  # 100 Hz frames are centisecond-aligned
            if self._last_ts is not None and ts <= self._last_ts:
                raise CodecError(
                    f"out-of-order keyframe timestamp {ts} after {self._last_ts}"
                )
            self._last_ts = ts
            out.append(encode_keyframe(d, ts, self.cfg, self.specs))
        return out


class ProsodyStreamDecoder:
    """Receiver-side mirror of the encoder's delta chain.

    Payloads are validated as they arrive but the accumulator runs at
    finalize time in timestamp order: a retransmitted keyframe may land
    after deltas that chronologically follow it. Missing deltas simply
    leave a gap in the chain (bounded drift until the next absolute)."""

    def __init__(self, cfg: QualityModeConfig):
        self.cfg = cfg
        self.features = cfg.enabled_features()
        self.specs = {f: spec_for(cfg, f) for f in self.features}
        self._received: dict[int, tuple[bool, bool, dict[str, int]]] = {}

    def push(self, timestamp_cs: int, data: bytes) -> None:
        voiced, is_abs, codes = parse_payload(data, self.cfg, self.specs)
        if timestamp_cs not in self._received:
            self._received[timestamp_cs] = (voiced, is_abs, codes)

    @property
    def received_count(self) -> int:
        return len(self._received)

    def finalize(self) -> list[tuple[int, dict[str, float], bool]]:
        acc: dict[str, float] = {f: 0.0 for f in self.features}
        out: list[tuple[int, dict[str, float], bool]] = []
        for ts in sorted(self._received):
            voiced, is_abs, codes = self._received[ts]
            values: dict[str, float] = {}
            for f in self.features:
                if f == "pitch" and not voiced:
                    continue  # hold: pitch anchors come from voiced keyframes
                step_value = self.specs[f].dequantize(codes[f])
                if is_abs:
                    acc[f] = step_value
                else:
                    acc[f] += step_value
                values[f] = acc[f]
            out.append((ts, values, voiced))
        return out
