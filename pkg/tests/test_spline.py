import numpy as np
import pytest

from trivox.errors import CodecError
from trivox.prosody.spline import natural_spline


def test_single_knot_holds_value():
    out = natural_spline(np.array([5.0]), np.array([0.7]), np.linspace(0, 10, 101))
    assert (out == 0.7).all()


def test_two_knots_linear():
    out = natural_spline(np.array([0.0, 10.0]), np.array([1.0, 3.0]), np.array([0.0, 2.5, 5.0, 10.0]))
    assert np.allclose(out, [1.0, 1.5, 2.0, 3.0])


def test_linear_data_reproduced_exactly():
    # Natural cubic spline through collinear points stays collinear.
    xs = np.array([0.0, 7.0, 20.0, 31.0, 44.0])
    ys = 0.3 * xs - 2.0
    ev = np.linspace(0.0, 44.0, 441)
    out = natural_spline(xs, ys, ev)
    assert np.abs(out - (0.3 * ev - 2.0)).max() <= 1e-9


def test_cubic_polynomial_interior_accuracy():
    # Oracle: evaluate the known cubic. The natural end conditions bend
    # the ends (a cubic has nonzero curvature there) and that boundary
    # error decays by ~(2 - sqrt(3)) per knot moving inward, so deep
    # interior points reproduce the polynomial to 1e-6 relative.
    poly = np.polynomial.Polynomial([3.0, 1.0, -0.2, 0.01])
    xs = np.linspace(0.0, 60.0, 31)
    ev = np.linspace(27.0, 33.0, 200)  # 13+ knots away from each boundary
    out = natural_spline(xs, poly(xs), ev)
    rel = np.abs(out - poly(ev)) / np.maximum(np.abs(poly(ev)), 1e-12)
    assert rel.max() <= 1e-6


def test_passes_through_every_knot():
    rng = np.random.default_rng(9)
    xs = np.sort(rng.choice(np.arange(200), size=12, replace=False)).astype(float)
    ys = rng.standard_normal(12)
    out = natural_spline(xs, ys, xs)
    assert np.allclose(out, ys, atol=1e-10)


def test_hold_outside_span():
    xs = np.array([10.0, 20.0, 30.0])
    ys = np.array([1.0, -1.0, 2.0])
    ev = np.array([0.0, 5.0, 35.0, 99.0])
    out = natural_spline(xs, ys, ev)
    assert np.allclose(out, [1.0, 1.0, 2.0, 2.0])


def test_rejects_empty_and_unsorted():
    with pytest.raises(CodecError):
        natural_spline(np.array([]), np.array([]), np.array([1.0]))
    with pytest.raises(CodecError):
        natural_spline(np.array([3.0, 1.0]), np.array([0.0, 1.0]), np.array([2.0]))
