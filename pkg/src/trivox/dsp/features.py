"""Frame-level energy and speaking-rate features at 100 Hz."""

from __future__ import annotations

import numpy as np
from scipy import signal as sp_signal

from .audio import HOP_SAMPLES, AudioBuffer, frame_count

ENERGY_WINDOW = 640  # 40 ms
RATE_WINDOW_FRAMES = 100  # 1 s nucleus-counting window
RATE_BAND_HZ = (300.0, 3000.0)
PEAK_MIN_SEPARATION_FRAMES = 5  # 50 ms
_ENVELOPE_FLOOR = 1e-4  # ignore numerical ripple when picking nuclei


def extract_energy(audio: AudioBuffer) -> np.ndarray:
    """RMS over 40 ms windows at 10 ms hop; tail windows zero-padded.

    Sums of squares of int16-derived samples are exact in float64, so the
    result is bit-identical to direct per-window summation.
    """
    audio.require_nonempty()
    x = audio.normalized()
    n_frames = frame_count(len(x))
    padded = np.zeros((n_frames - 1) * HOP_SAMPLES + ENERGY_WINDOW)
    padded[: len(x)] = x
    sq = np.concatenate(([0.0], np.cumsum(padded * padded)))
    starts = np.arange(n_frames) * HOP_SAMPLES
    totals = sq[starts + ENERGY_WINDOW] - sq[starts]
    return np.sqrt(totals / ENERGY_WINDOW)


def _syllable_envelope(audio: AudioBuffer) -> np.ndarray:
    """Speech-band RMS envelope at the 100 Hz frame rate."""
    x = audio.normalized()
    nyq = audio.sample_rate_hz / 2.0
    sos = sp_signal.butter(
        4, [RATE_BAND_HZ[0] / nyq, RATE_BAND_HZ[1] / nyq], btype="bandpass", output="sos"
    )
    banded = sp_signal.sosfilt(sos, x)
    n_frames = frame_count(len(x))
    padded = np.zeros((n_frames - 1) * HOP_SAMPLES + ENERGY_WINDOW)
    padded[: len(banded)] = banded
    sq = np.concatenate(([0.0], np.cumsum(padded * padded)))
    starts = np.arange(n_frames) * HOP_SAMPLES
    totals = sq[starts + ENERGY_WINDOW] - sq[starts]
    return np.sqrt(totals / ENERGY_WINDOW)


def detect_nuclei(envelope: np.ndarray) -> np.ndarray:
    """Frame indices of syllable nuclei: envelope maxima above an
    adaptive threshold (median + 1.5 * MAD), at least 50 ms apart."""
    if envelope.size == 0 or envelope.max() <= _ENVELOPE_FLOOR:
        return np.zeros(0, dtype=np.int64)
    med = np.median(envelope)
    mad = np.median(np.abs(envelope - med))
    threshold = max(med + 1.5 * mad, _ENVELOPE_FLOOR)
    peaks, _ = sp_signal.find_peaks(
        envelope, height=threshold, distance=PEAK_MIN_SEPARATION_FRAMES
    )
    return peaks


def extract_rate(audio: AudioBuffer) -> np.ndarray:
    """Instantaneous speaking rate (syllables/second) per 10 ms frame,
    counted over a centered 1 s window."""
    audio.require_nonempty()
    envelope = _syllable_envelope(audio)
    n_frames = len(envelope)
    nuclei = detect_nuclei(envelope)
    marks = np.zeros(n_frames)
    marks[nuclei] = 1.0
    half = RATE_WINDOW_FRAMES // 2
    padded = np.concatenate(([0.0], np.cumsum(marks)))
    t = np.arange(n_frames)
    lo = np.maximum(t - half, 0)
    hi = np.minimum(t + half + 1, n_frames)
    counts = padded[hi] - padded[lo]
    return counts / (RATE_WINDOW_FRAMES / 100.0)
