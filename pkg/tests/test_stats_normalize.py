import math

import numpy as np
import pytest

from trivox.dsp import (
    DEFAULT_SPEAKER_STATS,
    SpeakerStats,
    estimate_speaker_stats,
    extract_pitch,
    from_float,
    normalize_track,
    stats_from_tracks,
)
from trivox.dsp.track import ENERGY_NORM_MAX, ENERGY_NORM_MIN, SIGMA_FLOOR
from trivox.errors import AudioError, InsufficientVoicedError

from conftest import tone


def test_constant_tone_stats():
    stats = estimate_speaker_stats(from_float(tone(220.0, 4.0)))
    assert stats.mu_f0 == pytest.approx(math.log(220.0), abs=0.01)
    assert stats.sigma_f0 == SIGMA_FLOOR  # degenerate-variance floor


def test_constant_energy_guard():
    # Constant-envelope tracks collapse the percentiles; the separation
    # guard forces e_max = e_min * (1 + 1e-3).
    n = 1000
    f0 = np.full(n, 220.0)
    voiced = np.ones(n, dtype=bool)
    energy = np.full(n, 0.5)
    rate = np.full(n, 4.0)
    stats = stats_from_tracks(f0, voiced, energy, rate)
    assert stats.e_min == pytest.approx(0.5)
    assert stats.e_max == pytest.approx(0.5 * 1.001)


def test_noise_raises_insufficient_voiced():
    rng = np.random.default_rng(7)
    with pytest.raises(InsufficientVoicedError):
        estimate_speaker_stats(from_float(0.4 * rng.standard_normal(4 * 16000)))


def test_too_short_raises():
    with pytest.raises(InsufficientVoicedError):
        estimate_speaker_stats(from_float(tone(220.0, 1.0)))


def test_fallback_defaults_within_conversational_range():
    s = DEFAULT_SPEAKER_STATS
    assert s.mu_f0 == pytest.approx(math.log(150.0))
    assert s.sigma_f0 == 0.3
    assert s.mu_rate == 4.0 and s.sigma_rate == 1.0


def test_stats_invariants_enforced():
    with pytest.raises(ValueError):
        SpeakerStats(5.0, 0.0, 0.01, 0.5, 4.0, 1.0)
    with pytest.raises(ValueError):
        SpeakerStats(5.0, 0.1, 0.5, 0.1, 4.0, 1.0)


def _stats():
    return SpeakerStats(
        mu_f0=math.log(200.0), sigma_f0=0.25, e_min=0.01, e_max=0.4, mu_rate=4.0, sigma_rate=1.0
    )


def test_normalize_anchors():
    stats = _stats()
    f0 = np.array([200.0, 200.0 * math.exp(0.25), 150.0, 0.0])
    voiced = np.array([True, True, True, False])
    energy = np.array([0.4, 0.01, 0.1, 0.0])
    rate = np.array([4.0, 5.0, 3.0, 0.0])
    track = normalize_track(f0, voiced, energy, rate, stats)

    assert track.f0_norm[0] == pytest.approx(0.0, abs=1e-9)  # F0 = exp(mu)
    assert track.f0_norm[1] == pytest.approx(1.0, abs=1e-9)  # one sigma up
    assert track.f0_norm[3] == 0.0  # unvoiced frames carry zero
    assert track.energy_norm[0] == pytest.approx(1.0, abs=1e-3)  # E = e_max
    assert track.energy_norm[1] == pytest.approx(0.0, abs=1e-3)  # E = e_min
    assert track.rate_norm[1] == pytest.approx(1.0)


def test_energy_clamped():
    stats = _stats()
    n = 4
    track = normalize_track(
        np.zeros(n), np.zeros(n, dtype=bool), np.array([0.0, 1.0, 0.2, 0.01]), np.zeros(n), stats
    )
    assert (track.energy_norm >= ENERGY_NORM_MIN).all()
    assert (track.energy_norm <= ENERGY_NORM_MAX).all()


def test_length_mismatch_raises():
    stats = _stats()
    with pytest.raises(AudioError, match="mismatch"):
        normalize_track(np.zeros(5), np.zeros(4, dtype=bool), np.zeros(5), np.zeros(5), stats)


def test_pitch_normalization_invertible():
    # Recover F0 from the normalized track within 1e-6 relative error.
    buf = from_float(tone(256.0, 4.0))
    f0, voiced = extract_pitch(buf)
    stats = estimate_speaker_stats(buf)
    track = normalize_track(f0, voiced, np.full(len(f0), 0.2), np.full(len(f0), 4.0), stats)
    recovered = np.exp(track.f0_norm[voiced] * stats.sigma_f0 + stats.mu_f0)
    assert np.allclose(recovered, f0[voiced], rtol=1e-6)


def test_csv_export(tmp_path):
    stats = _stats()
    track = normalize_track(
        np.array([200.0, 0.0]),
        np.array([True, False]),
        np.array([0.1, 0.0]),
        np.array([4.0, 0.0]),
        stats,
    )
    path = tmp_path / "track.csv"
    track.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "frame_index,f0_norm,energy_norm,rate_norm,voiced"
    assert len(lines) == 3
