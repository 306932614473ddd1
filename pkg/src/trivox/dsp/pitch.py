"""YIN pitch tracking at 100 Hz over 16 kHz PCM.

Parameters: 25 ms analysis window, search range 50-500 Hz, cumulative
mean normalized difference threshold 0.1, parabolic refinement of the
selected lag. Unvoiced frames report f0 = 0.
"""

from __future__ import annotations

import numpy as np

from ..errors import AudioError
from . import kernels
from .audio import HOP_SAMPLES, AudioBuffer

WINDOW_SAMPLES = 400  # 25 ms
F0_MIN_HZ = 50.0
F0_MAX_HZ = 500.0
CMND_THRESHOLD = 0.1


def _cmnd(diff: np.ndarray) -> np.ndarray:
    """Cumulative mean normalized difference; rows with no signal get 1.0."""
    n_lags = diff.shape[1] - 1
    taus = np.arange(1, n_lags + 1, dtype=np.float64)
    running = np.cumsum(diff[:, 1:], axis=1)
    out = np.ones_like(diff)
    np.divide(diff[:, 1:] * taus, running, out=out[:, 1:], where=running > 0)
    return out


def extract_pitch(audio: AudioBuffer, threshold: float = CMND_THRESHOLD):
    """Per-frame (f0_hz, voiced) arrays of length ceil(n_samples / 160)."""
    audio.require_nonempty()
    if len(audio) < WINDOW_SAMPLES:
        raise AudioError(
            f"buffer shorter than one analysis window "
            f"({len(audio)} < {WINDOW_SAMPLES} samples)"
        )
    sr = audio.sample_rate_hz
    tau_min = int(sr / F0_MAX_HZ)  # 32
    tau_max = int(sr / F0_MIN_HZ)  # 320
    x = audio.normalized()

    diff = kernels.difference_matrix(x, WINDOW_SAMPLES, tau_max, HOP_SAMPLES)
    cmnd = _cmnd(diff)

    n_frames = cmnd.shape[0]
    f0 = np.zeros(n_frames, dtype=np.float64)
    voiced = np.zeros(n_frames, dtype=bool)

    search = cmnd[:, tau_min : tau_max + 1]
    below = search < threshold
    has_dip = below.any(axis=1)
    first = np.argmax(below, axis=1) + tau_min

    for t in np.flatnonzero(has_dip):
        tau = int(first[t])
        row = cmnd[t]
        while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
            tau += 1
        # Parabolic refinement around the minimum lag.
        tau_f = float(tau)
        if tau_min < tau < tau_max:
            a, b, c = row[tau - 1], row[tau], row[tau + 1]
            denom = a - 2.0 * b + c
            if denom > 0:
                tau_f = tau + 0.5 * (a - c) / denom
        est = sr / tau_f
        f0[t] = min(max(est, F0_MIN_HZ), F0_MAX_HZ)
        voiced[t] = True

    return f0, voiced
