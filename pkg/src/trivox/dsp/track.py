"""Speaker statistics and normalized prosody tracks.

Normalization puts all three features in speaker-relative units: voiced
log-pitch and speaking rate as z-scores, energy as position inside the
speaker's log-energy dynamic range (5th..95th percentile), clamped to
[-0.25, 1.25]. Unvoiced frames carry pitch 0 by convention.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import AudioError, InsufficientVoicedError
from .audio import AudioBuffer
from .features import extract_energy, extract_rate
from .pitch import extract_pitch

log = logging.getLogger(__name__)

FRAME_RATE_HZ = 100
STATS_PITCH_SECONDS = 3.0
STATS_WINDOW_SECONDS = 10.0
MIN_VOICED_FRAMES = 10
SIGMA_FLOOR = 0.01
ENERGY_SEPARATION = 1e-3
ENERGY_EPS = 1e-6
ENERGY_NORM_MIN = -0.25
ENERGY_NORM_MAX = 1.25


@dataclass(frozen=True)
class SpeakerStats:
    mu_f0: float  # mean log-pitch (log Hz)
    sigma_f0: float
    e_min: float  # linear energy, 5th percentile
    e_max: float  # linear energy, 95th percentile
    mu_rate: float  # syllables/sec
    sigma_rate: float

    def __post_init__(self):
        if not (self.sigma_f0 > 0 and self.sigma_rate > 0):
            raise ValueError("sigma_f0 and sigma_rate must be positive")
        if not (self.e_max > self.e_min >= 0):
            raise ValueError("require e_max > e_min >= 0")


# Conversational-range fallback for when estimation fails.
DEFAULT_SPEAKER_STATS = SpeakerStats(
    mu_f0=math.log(150.0),
    sigma_f0=0.3,
    e_min=1e-3,
    e_max=0.5,
    mu_rate=4.0,
    sigma_rate=1.0,
)


@dataclass(frozen=True)
class ProsodyTrack:
    f0_norm: np.ndarray
    energy_norm: np.ndarray
    rate_norm: np.ndarray
    voiced: np.ndarray
    frame_rate_hz: int = FRAME_RATE_HZ

    def __post_init__(self):
        n = len(self.f0_norm)
        if not (len(self.energy_norm) == len(self.rate_norm) == len(self.voiced) == n):
            raise AudioError("prosody track arrays must share one length")

    def __len__(self) -> int:
        return len(self.f0_norm)

    @property
    def duration_s(self) -> float:
        return len(self) / self.frame_rate_hz

    def feature(self, name: str) -> np.ndarray:
        return {"pitch": self.f0_norm, "energy": self.energy_norm, "rate": self.rate_norm}[name]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame_index", "f0_norm", "energy_norm", "rate_norm", "voiced"])
            for i in range(len(self)):
                w.writerow(
                    [
                        i,
                        f"{self.f0_norm[i]:.6f}",
                        f"{self.energy_norm[i]:.6f}",
                        f"{self.rate_norm[i]:.6f}",
                        int(self.voiced[i]),
                    ]
                )


def stats_from_tracks(
    f0_hz: np.ndarray,
    voiced: np.ndarray,
    energy: np.ndarray,
    rate: np.ndarray,
) -> SpeakerStats:
    """Estimate statistics from already-extracted leading tracks."""
    pitch_frames = int(STATS_PITCH_SECONDS * FRAME_RATE_HZ)
    window_frames = int(STATS_WINDOW_SECONDS * FRAME_RATE_HZ)

    lead_voiced = voiced[:pitch_frames]
    lead_f0 = f0_hz[:pitch_frames][lead_voiced]
    if len(lead_f0) < MIN_VOICED_FRAMES:
        raise InsufficientVoicedError(
            f"only {len(lead_f0)} voiced frames in the first "
            f"{STATS_PITCH_SECONDS:g} s (need {MIN_VOICED_FRAMES}); "
            "fall back to DEFAULT_SPEAKER_STATS"
        )
    log_f0 = np.log(lead_f0)
    mu_f0 = float(np.mean(log_f0))
    sigma_f0 = max(float(np.std(log_f0)), SIGMA_FLOOR)

    e_window = energy[:window_frames]
    e_min = float(np.percentile(e_window, 5))
    e_max = float(np.percentile(e_window, 95))
    e_min = max(e_min, ENERGY_EPS)  # keep the log-domain anchors finite
    if e_max <= e_min * (1.0 + ENERGY_SEPARATION):
        e_max = e_min * (1.0 + ENERGY_SEPARATION)

    r_window = rate[:window_frames]
    mu_rate = float(np.mean(r_window))
    sigma_rate = max(float(np.std(r_window)), SIGMA_FLOOR)

    return SpeakerStats(mu_f0, sigma_f0, e_min, e_max, mu_rate, sigma_rate)


def estimate_speaker_stats(audio: AudioBuffer) -> SpeakerStats:
    """Estimate SpeakerStats from the leading audio (3 s pitch, 10 s rest)."""
    audio.require_nonempty()
    if audio.duration_s < STATS_PITCH_SECONDS:
        raise InsufficientVoicedError(
            f"need at least {STATS_PITCH_SECONDS:g} s of audio, got "
            f"{audio.duration_s:.2f} s; fall back to DEFAULT_SPEAKER_STATS"
        )
    f0, voiced = extract_pitch(audio)
    energy = extract_energy(audio)
    rate = extract_rate(audio)
    return stats_from_tracks(f0, voiced, energy, rate)


def normalize_track(
    f0_hz: np.ndarray,
    voiced: np.ndarray,
    energy: np.ndarray,
    rate: np.ndarray,
    stats: SpeakerStats,
) -> ProsodyTrack:
    """Apply speaker normalization to raw feature tracks."""
    n = len(f0_hz)
    if not (len(voiced) == len(energy) == len(rate) == n):
        raise AudioError(
            f"track length mismatch: f0={len(f0_hz)} voiced={len(voiced)} "
            f"energy={len(energy)} rate={len(rate)}"
        )
    voiced = np.asarray(voiced, dtype=bool)

    f0_norm = np.zeros(n)
    vi = voiced & (f0_hz > 0)
    f0_norm[vi] = (np.log(f0_hz[vi]) - stats.mu_f0) / stats.sigma_f0

    denom = math.log(stats.e_max) - math.log(stats.e_min)
    energy_norm = (np.log(energy + ENERGY_EPS) - math.log(stats.e_min)) / denom
    energy_norm = np.clip(energy_norm, ENERGY_NORM_MIN, ENERGY_NORM_MAX)

    rate_norm = (rate - stats.mu_rate) / stats.sigma_rate

    return ProsodyTrack(f0_norm, energy_norm, rate_norm, voiced)


def extract_prosody(
    audio: AudioBuffer, stats: SpeakerStats | None = None
) -> tuple[ProsodyTrack, SpeakerStats]:
    """Full sender-side pipeline: features, statistics, normalization."""
    f0, voiced = extract_pitch(audio)
    energy = extract_energy(audio)
    rate = extract_rate(audio)
    if stats is None:
        try:
            stats = stats_from_tracks(f0, voiced, energy, rate)
        except InsufficientVoicedError as exc:
            log.debug("speaker stats fallback: %s", exc)
            stats = DEFAULT_SPEAKER_STATS
    return normalize_track(f0, voiced, energy, rate, stats), stats
