# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pitch kernel: direct-summation windowed difference function.

Same contract as trivox.dsp._yin_pure.difference_matrix; this version is a
tight C loop over (frame, lag, sample).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def difference_matrix(x, int window, int max_lag, int hop):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    # (n + hop - 1) // hop: ceiling that is safe under cdivision.
    cdef Py_ssize_t n_frames = (n + hop - 1) // hop
    cdef Py_ssize_t ext = window + max_lag
    cdef cnp.ndarray[cnp.float64_t, ndim=1] padded = np.zeros(
        (n_frames - 1) * hop + ext, dtype=np.float64
    )
    padded[:n] = xv
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros(
        (n_frames, max_lag + 1), dtype=np.float64
    )

    cdef double[:] p = padded
    cdef double[:, :] d = out
    cdef Py_ssize_t t, tau, i, base
    cdef double acc, diff

    for t in range(n_frames):
        base = t * hop
        for tau in range(max_lag + 1):
            acc = 0.0
            for i in range(window):
                diff = p[base + i] - p[base + tau + i]
                acc += diff * diff
            d[t, tau] = acc
    return out
