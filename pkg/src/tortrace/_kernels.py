"""Compensated-summation kernels: numba-compiled with a pure-numpy fallback.

The lattice traces sum up to ~10^6 amplitude-weighted samples per t-value in
a mandated deterministic order; Kahan accumulation keeps them reproducible
to the last bit.  Set TORTRACE_DISABLE_NUMBA=1 to force the numpy/fsum path
(used by the benchmark and as a safety hatch).
"""

from __future__ import annotations

import math
import os

import numpy as np

NUMBA_DISABLED = os.environ.get("TORTRACE_DISABLE_NUMBA", "").lower() in (
    "1", "true", "yes")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by TORTRACE_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def compensated_dot_numpy(values: np.ndarray, weights: np.ndarray) -> complex:
    """Exactly rounded sum of values*weights via math.fsum on each part."""
    prod = np.asarray(values) * np.asarray(weights)
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


def compensated_sum_numpy(values: np.ndarray) -> complex:
    values = np.asarray(values)
    return complex(math.fsum(values.real), math.fsum(values.imag))


if HAS_NUMBA:

    @njit(cache=True)
    def _kahan_dot(re, im, w):  # pragma: no cover - compiled
        s_re = 0.0
        c_re = 0.0
        s_im = 0.0
        c_im = 0.0
        for i in range(re.shape[0]):
            y = re[i] * w[i] - c_re
            t = s_re + y
            c_re = (t - s_re) - y
            s_re = t
            y = im[i] * w[i] - c_im
            t = s_im + y
            c_im = (t - s_im) - y
            s_im = t
        return s_re, s_im

    def compensated_dot_numba(values: np.ndarray, weights: np.ndarray) -> complex:
        values = np.ascontiguousarray(values, dtype=np.complex128)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        re, im = _kahan_dot(values.real.copy(), values.imag.copy(), weights)
        return complex(re, im)

    @njit(cache=True)
    def _kahan_sum(re, im):  # pragma: no cover - compiled
        s_re = 0.0
        c_re = 0.0
        s_im = 0.0
        c_im = 0.0
        for i in range(re.shape[0]):
            y = re[i] - c_re
            t = s_re + y
            c_re = (t - s_re) - y
            s_re = t
            y = im[i] - c_im
            t = s_im + y
            c_im = (t - s_im) - y
            s_im = t
        return s_re, s_im

    def compensated_sum_numba(values: np.ndarray) -> complex:
        values = np.ascontiguousarray(values, dtype=np.complex128)
        re, im = _kahan_sum(values.real.copy(), values.imag.copy())
        return complex(re, im)

    compensated_dot = compensated_dot_numba
    compensated_sum = compensated_sum_numba
else:
    compensated_dot_numba = None
    compensated_sum_numba = None
    compensated_dot = compensated_dot_numpy
    compensated_sum = compensated_sum_numpy
