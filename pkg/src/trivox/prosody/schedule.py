"""Uniform keyframe scheduling over a 100 Hz prosody track."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import FRAME_RATE_HZ
from ..errors import CodecError


@dataclass(frozen=True)
class KeyframeSchedule:
    start_frame: int
    stride_frames: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.stride_frames < 1:
            raise CodecError(f"stride_frames must be >= 1: {self.stride_frames}")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise CodecError("keyframe indices must be strictly increasing")


def sample_keyframes(track_frames: int, keyframe_rate_hz: float) -> KeyframeSchedule:
    """Indices {0, stride, 2*stride, ...} with stride = floor(100 / f_k)."""
    if not (0.0 < keyframe_rate_hz <= FRAME_RATE_HZ):
        raise CodecError(
            f"keyframe rate {keyframe_rate_hz} outside (0, {FRAME_RATE_HZ:g}]"
        )
    if track_frames <= 0:
        raise CodecError("empty track has no keyframes")
    # Epsilon guards binary round-off on decimal rates (100/0.1 -> 999.99..).
    stride = int(math.floor(FRAME_RATE_HZ / keyframe_rate_hz + 1e-9))
    indices = tuple(range(0, track_frames, stride))
    return KeyframeSchedule(start_frame=0, stride_frames=stride, indices=indices)
