#!/usr/bin/env python3
"""Benchmark the pitch-kernel backends: compiled Cython loop vs the
vectorized FFT fallback.

The difference-function matrix is the hot inner computation of pitch
extraction (frames x lags x window multiply-adds). Both backends produce
the same matrix; this script times them on synthetic speech of a few
lengths and checks agreement.

Run:  python benchmarks/bench_kernels.py [seconds ...]
"""

import sys
import time

import numpy as np

from trivox.dsp.kernels import backends
from trivox.dsp.pitch import WINDOW_SAMPLES
from trivox.fixtures import synth_speech

MAX_LAG = 320  # 50 Hz search floor at 16 kHz
HOP = 160


def time_backend(fn, x, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(x, WINDOW_SAMPLES, MAX_LAG, HOP)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    durations = [float(a) for a in sys.argv[1:]] or [5.0, 15.0, 60.0]
    impls = backends()
    print(f"backends available: {', '.join(impls)}")
    print(f"{'audio':>8}  {'frames':>7}  " + "  ".join(f"{name:>12}" for name in impls) + "   speedup")
    for seconds in durations:
        x = synth_speech(seconds, base_f0_hz=150.0, seed=1).normalized()
        times = {}
        outputs = {}
        for name, impl in impls.items():
            times[name], outputs[name] = time_backend(impl.difference_matrix, x)
        frames = next(iter(outputs.values())).shape[0]
        row = f"{seconds:7.1f}s  {frames:7d}  " + "  ".join(
            f"{times[name] * 1e3:10.1f}ms" for name in impls
        )
        if len(times) == 2:
            pure, compiled = times["pure"], times.get("compiled", float("nan"))
            row += f"   {pure / compiled:6.2f}x"
            a, b = outputs["pure"], outputs["compiled"]
            agree = np.allclose(a, b, rtol=1e-9, atol=1e-10)
            row += "   (outputs agree)" if agree else "   (MISMATCH!)"
        print(row)


if __name__ == "__main__":
    main()
