"""Energy-based voice activity detection with duration gating.

Stands in for a neural detector behind the same interface: 30 ms frames,
smoothed log-energy scored against an adaptive noise floor, the score
mapped to a pseudo-probability so the configured 0.5 threshold keeps its
meaning. Segments shorter than min_speech_ms are discarded and gaps
shorter than min_silence_ms are merged, in that order of survival: merge
first, then drop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from ..config import QualityModeConfig
from .audio import AudioBuffer

VAD_FRAME_MS = 30
_SILENCE_RMS_FLOOR = 1e-5  # normalized units; all-zero input scores 0 speech
_DYNAMIC_RANGE_DB = 40.0  # speech sits within this span below the peak


@dataclass(frozen=True)
class VadSegment:
    start_ms: int
    end_ms: int

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


class VoiceDetector(Protocol):
    """Interface for pluggable detectors (energy-based default, neural later)."""

    def speech_probabilities(self, audio: AudioBuffer) -> np.ndarray:
        """Per-30ms-frame speech probability in [0, 1]."""
        ...


class EnergyDetector:
    """Default detector: smoothed log-RMS scored against the speech peak.

    The score is the frame's position inside a fixed dynamic range below
    the 95th-percentile level, so the 0.5 threshold means "within 20 dB
    of the loudest speech". Peak-referencing stays stable whatever the
    speech/silence duty cycle; a floor-referenced score collapses when
    silence is scarce."""

    def speech_probabilities(self, audio: AudioBuffer) -> np.ndarray:
        x = audio.normalized()
        frame = audio.sample_rate_hz * VAD_FRAME_MS // 1000
        n_frames = len(x) // frame
        if n_frames == 0:
            return np.zeros(0)
        trimmed = x[: n_frames * frame].reshape(n_frames, frame)
        rms = np.sqrt(np.mean(trimmed * trimmed, axis=1))
        silent = rms <= _SILENCE_RMS_FLOOR
        log_e = 20.0 * np.log10(np.maximum(rms, _SILENCE_RMS_FLOOR))

        # 3-frame moving average smoothing.
        if n_frames >= 3:
            kernel = np.ones(3) / 3.0
            log_e = np.convolve(log_e, kernel, mode="same")

        if silent.all():
            return np.zeros(n_frames)
        peak = np.percentile(log_e[~silent], 95)
        prob = np.clip(1.0 + (log_e - peak) / _DYNAMIC_RANGE_DB, 0.0, 1.0)
        prob[silent] = 0.0
        return prob


def vad_segment(
    audio: AudioBuffer,
    cfg: QualityModeConfig,
    detector: VoiceDetector | None = None,
) -> list[VadSegment]:
    """Speech segments after threshold, merge, and minimum-duration gates."""
    audio.require_nonempty()
    detector = detector or EnergyDetector()
    prob = detector.speech_probabilities(audio)
    active = prob > cfg.vad_threshold

    runs = _runs(active)
    runs = _merge_gaps(runs, cfg.vad_min_silence_ms)
    min_frames = -(-cfg.vad_min_speech_ms // VAD_FRAME_MS)
    runs = [(s, e) for s, e in runs if (e - s) >= min_frames]
    return [VadSegment(s * VAD_FRAME_MS, e * VAD_FRAME_MS) for s, e in runs]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) frame index runs of True."""
    out = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            out.append((start, i))
            start = None
    if start is not None:
        out.append((start, len(mask)))
    return out


def _merge_gaps(runs: Sequence[tuple[int, int]], min_silence_ms: int):
    if not runs:
        return []
    merged = [list(runs[0])]
    for s, e in runs[1:]:
        if (s - merged[-1][1]) * VAD_FRAME_MS < min_silence_ms:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    return [tuple(r) for r in merged]
