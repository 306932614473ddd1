import math

import numpy as np
import pytest

from trivox.config import preset
from trivox.prosody.quantizer import CLAMP_RANGE, QuantizerSpec, spec_for


def oracle_quantize(delta: float, tau: float, alpha: float, max_code: int) -> int:
    """Direct evaluation of the dead-zone uniform quantizer rule."""
    if abs(delta) < tau:
        return 0
    q = min(math.ceil(abs(delta) / alpha), max_code)
    return q if delta > 0 else -q


def test_step_size_rule():
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    assert spec.step == pytest.approx(4.0 / 31)
    assert spec.max_code == 31


def test_dead_zone_example():
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    assert spec.quantize(0.03) == 0  # inside the dead zone
    assert spec.quantize(-0.049) == 0


def test_worked_example_point_two():
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    # alpha = 4/31 ~ 0.1290; ceil(0.20 / alpha) = 2
    assert spec.quantize(0.20) == 2


def test_saturation():
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    assert spec.quantize(-7.0) == -31
    assert spec.quantize(7.0) == 31


def test_dequantize_mid_rise():
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    assert spec.dequantize(0) == 0.0
    assert spec.dequantize(2) == pytest.approx(1.5 * spec.step)  # 0.19355
    assert spec.dequantize(-2) == pytest.approx(-1.5 * spec.step)


def test_matches_oracle_on_grid():
    # Brute-force oracle over a 1e-3 grid on [-clamp, clamp].
    for bits, tau, clamp in [(6, 0.05, 4.0), (5, 0.02, 1.5), (3, 0.05, 4.0), (8, 0.05, 4.0)]:
        spec = QuantizerSpec(bits=bits, dead_zone=tau, clamp_range=clamp)
        grid = np.arange(-clamp, clamp + 1e-9, 1e-3)
        for delta in grid:
            assert spec.quantize(float(delta)) == oracle_quantize(
                float(delta), tau, spec.step, spec.max_code
            )


def test_reconstruction_error_bound():
    # Outside the dead zone and inside the clamp, |x - dq(q(x))| <= step/2.
    for bits, tau, clamp in [(6, 0.05, 4.0), (5, 0.02, 1.5)]:
        spec = QuantizerSpec(bits=bits, dead_zone=tau, clamp_range=clamp)
        grid = np.arange(tau + 1e-6, clamp, 1e-3)
        for delta in np.concatenate([grid, -grid]):
            err = abs(float(delta) - spec.dequantize(spec.quantize(float(delta))))
            assert err <= spec.step / 2 + 1e-12


def test_specs_from_config():
    cfg = preset("balanced")
    pitch = spec_for(cfg, "pitch")
    assert pitch.bits == 6 and pitch.dead_zone == 0.05
    assert pitch.clamp_range == CLAMP_RANGE["pitch"] == 4.0
    energy = spec_for(cfg, "energy")
    assert energy.clamp_range == 1.5
    assert energy.step == pytest.approx(1.5 / 15)


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        QuantizerSpec(bits=1, dead_zone=0.05, clamp_range=4.0)
    with pytest.raises(ValueError):
        QuantizerSpec(bits=6, dead_zone=5.0, clamp_range=4.0)
    spec = QuantizerSpec(bits=6, dead_zone=0.05, clamp_range=4.0)
    with pytest.raises(ValueError):
        spec.dequantize(32)
