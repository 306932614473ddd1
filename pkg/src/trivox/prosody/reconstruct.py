"""Receiver-side contour reconstruction from decoded keyframes."""

from __future__ import annotations

import numpy as np

from ..dsp.track import ProsodyTrack
from ..errors import CodecError
from .spline import natural_spline

# Substituted when a feature was never transmitted (or no keyframe arrived).
NEUTRAL_VALUES = {"pitch": 0.0, "energy": 0.5, "rate": 0.0}


def reconstruct_contour(
    keyframes: list[tuple[int, dict[str, float], bool]],
    duration_frames: int,
    features: tuple[str, ...],
    frame_rate_hz: int = 100,
) -> ProsodyTrack:
    """Continuous 100 Hz track through the received keyframes.

    Keyframes are (timestamp_cs, values, voiced); duplicates (retransmits)
    collapse to the first copy. The spline passes through every keyframe
    exactly, holds endpoint values outside the keyframe span, and marks
    frame voicing by nearest keyframe.
    """
    if duration_frames <= 0:
        raise CodecError("duration must cover at least one frame")
    if not keyframes:
        raise CodecError("no keyframes received; substitute neutral prosody")

    seen: dict[int, tuple[dict[str, float], bool]] = {}
    for ts, values, voiced in keyframes:
        if ts not in seen:
            seen[ts] = (values, voiced)
    times = np.array(sorted(seen), dtype=np.float64)
    frames = np.arange(duration_frames, dtype=np.float64)

    tracks: dict[str, np.ndarray] = {}
    for f in ("pitch", "energy", "rate"):
        if f not in features:
            tracks[f] = np.full(duration_frames, NEUTRAL_VALUES[f])
            continue
        # A feature may be absent from some keyframes (pitch while
        # unvoiced); its contour interpolates across those anchors.
        anchor_t = np.array([t for t in times if f in seen[int(t)][0]])
        if len(anchor_t) == 0:
            tracks[f] = np.full(duration_frames, NEUTRAL_VALUES[f])
            continue
        ys = np.array([seen[int(t)][0][f] for t in anchor_t])
        tracks[f] = natural_spline(anchor_t, ys, frames)

    kf_voiced = np.array([seen[int(t)][1] for t in times], dtype=bool)
    nearest = np.searchsorted(times, frames)
    nearest = np.clip(nearest, 0, len(times) - 1)
    left = np.clip(nearest - 1, 0, len(times) - 1)
    use_left = np.abs(frames - times[left]) <= np.abs(times[nearest] - frames)
    voiced = kf_voiced[np.where(use_left, left, nearest)]

    pitch = tracks["pitch"]
    pitch[~voiced] = 0.0
    return ProsodyTrack(pitch, tracks["energy"], tracks["rate"], voiced)
