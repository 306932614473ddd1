"""Natural cubic spline reconstruction of prosody contours.

The receiver rebuilds a continuous 100 Hz track from sparse keyframes:
exact interpolation through every received keyframe, natural (zero second
derivative) boundary conditions, and value-hold before the first / after
the last keyframe. Systems are tiny (tens to hundreds of knots), solved
with the Thomas algorithm.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodecError


def natural_spline(xs: np.ndarray, ys: np.ndarray, eval_x: np.ndarray) -> np.ndarray:
    """Evaluate the natural cubic spline through (xs, ys) at eval_x.

    xs must be strictly increasing. Points outside [xs[0], xs[-1]] hold the
    nearest endpoint value.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    eval_x = np.asarray(eval_x, dtype=np.float64)
    n = len(xs)
    if n == 0:
        raise CodecError("spline needs at least one knot")
    if np.any(np.diff(xs) <= 0):
        raise CodecError("spline knots must be strictly increasing")
    if n == 1:
        return np.full(eval_x.shape, ys[0])

    out = np.empty(eval_x.shape, dtype=np.float64)
    before = eval_x <= xs[0]
    after = eval_x >= xs[-1]
    out[before] = ys[0]
    out[after] = ys[-1]
    interior = ~(before | after)
    if not interior.any():
        return out
    xq = eval_x[interior]

    if n == 2:
        t = (xq - xs[0]) / (xs[1] - xs[0])
        out[interior] = ys[0] + t * (ys[1] - ys[0])
        return out

    h = np.diff(xs)
    # Second derivatives m[1..n-2] from the tridiagonal natural-spline
    # system; m[0] = m[n-1] = 0.
    m = np.zeros(n)
    k = n - 2
    diag = 2.0 * (h[:-1] + h[1:])
    lower = h[1:-1].copy()
    upper = h[1:-1].copy()
    rhs = 6.0 * (np.diff(ys[1:]) / h[1:] - np.diff(ys[:-1]) / h[:-1])

    # Thomas forward sweep / back substitution.
    c_prime = np.zeros(k)
    d_prime = np.zeros(k)
    c_prime[0] = upper[0] / diag[0] if k > 1 else 0.0
    d_prime[0] = rhs[0] / diag[0]
    for i in range(1, k):
        denom = diag[i] - lower[i - 1] * c_prime[i - 1]
        if i < k - 1:
            c_prime[i] = upper[i] / denom
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / denom
    sol = np.zeros(k)
    sol[-1] = d_prime[-1]
    for i in range(k - 2, -1, -1):
        sol[i] = d_prime[i] - c_prime[i] * sol[i + 1]
    m[1:-1] = sol

    seg = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, n - 2)
    x0 = xs[seg]
    x1 = xs[seg + 1]
    hseg = x1 - x0
    a = (x1 - xq) / hseg
    b = (xq - x0) / hseg
    out[interior] = (
        a * ys[seg]
        + b * ys[seg + 1]
        + ((a**3 - a) * m[seg] + (b**3 - b) * m[seg + 1]) * hseg**2 / 6.0
    )
    return out
