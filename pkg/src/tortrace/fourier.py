"""Finite Fourier series on the unit torus T^n.

Frequencies are integer vectors gamma in Z^n and the convention is
g(x) = sum_gamma ghat(gamma) exp(2*pi*i*gamma.x), so the torus mean of g
is ghat(0).  Series are stored sparsely as {gamma: amplitude} with exact
zeros absent.
"""

from __future__ import annotations

import numpy as np

TWO_PI_I = 2j * np.pi


def _as_freq(gamma) -> tuple[int, ...]:
    return tuple(int(g) for g in gamma)


class TorusFourierSeries:
    """Finite complex Fourier series on T^n, immutable by convention."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict | None = None):
        self.n = int(n)
        clean = {}
        for gamma, a in (coeffs or {}).items():
            key = _as_freq(gamma)
            if len(key) != self.n:
                raise ValueError(f"frequency {key} has wrong dimension (expected {self.n})")
            a = complex(a)
            if a != 0:
                clean[key] = clean.get(key, 0j) + a
        self.coeffs = {k: v for k, v in clean.items() if v != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, n: int, value: complex = 1.0) -> "TorusFourierSeries":
        return cls(n, {(0,) * n: value})

    @classmethod
    def cosine(cls, n: int, gamma, amplitude: complex = 1.0) -> "TorusFourierSeries":
        """amplitude * cos(2 pi gamma.x)."""
        g = _as_freq(gamma)
        mg = tuple(-c for c in g)
        half = complex(amplitude) / 2
        return cls(n, {g: half, mg: half})

    @classmethod
    def sine(cls, n: int, gamma, amplitude: complex = 1.0) -> "TorusFourierSeries":
        g = _as_freq(gamma)
        mg = tuple(-c for c in g)
        half = complex(amplitude) / (2j)
        return cls(n, {g: half, mg: -half})

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "TorusFourierSeries") -> "TorusFourierSeries":
        out = dict(self.coeffs)
        for g, a in other.coeffs.items():
            out[g] = out.get(g, 0j) + a
        return TorusFourierSeries(self.n, out)

    def __sub__(self, other: "TorusFourierSeries") -> "TorusFourierSeries":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "TorusFourierSeries":
        c = complex(c)
        return TorusFourierSeries(self.n, {g: c * a for g, a in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TorusFourierSeries):
            out: dict = {}
            for g1, a1 in self.coeffs.items():
                for g2, a2 in other.coeffs.items():
                    g = tuple(c1 + c2 for c1, c2 in zip(g1, g2))
                    out[g] = out.get(g, 0j) + a1 * a2
            return TorusFourierSeries(self.n, out)
        return self.scale(other)

    __rmul__ = __mul__

    def conjugate(self) -> "TorusFourierSeries":
        return TorusFourierSeries(
            self.n, {tuple(-c for c in g): np.conj(a) for g, a in self.coeffs.items()}
        )

    def dx(self, axis: int) -> "TorusFourierSeries":
        """Partial derivative along torus axis: ghat(gamma) -> 2*pi*i*gamma_axis*ghat."""
        return TorusFourierSeries(
            self.n, {g: TWO_PI_I * g[axis] * a for g, a in self.coeffs.items()}
        )

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def mean(self) -> complex:
        """Torus average, i.e. the zero-frequency amplitude."""
        return self.coeffs.get((0,) * self.n, 0j)

    def max_frequency(self) -> int:
        if not self.coeffs:
            return 0
        return max(max(abs(c) for c in g) for g in self.coeffs)

    def max_abs(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(abs(a) for a in self.coeffs.values())

    def is_real_valued(self, tol: float = 1e-13) -> bool:
        scale = self.max_abs() or 1.0
        for g, a in self.coeffs.items():
            mg = tuple(-c for c in g)
            if abs(a - np.conj(self.coeffs.get(mg, 0j))) > tol * scale:
                return False
        return True

    def prune(self, tol: float) -> "TorusFourierSeries":
        scale = self.max_abs()
        if scale == 0.0:
            return self
        return TorusFourierSeries(
            self.n, {g: a for g, a in self.coeffs.items() if abs(a) > tol * scale}
        )

    def allclose(self, other: "TorusFourierSeries", tol: float = 1e-12) -> bool:
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(
            abs(self.coeffs.get(g, 0j) - other.coeffs.get(g, 0j)) <= tol * scale for g in keys
        )

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points x of shape (..., n); returns complex array of shape (...)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for g, a in self.coeffs.items():
            phase = x @ np.asarray(g, dtype=float)
            out += a * np.exp(TWO_PI_I * phase)
        return out

    def __repr__(self):
        inner = ", ".join(f"{g}: {a}" for g, a in sorted(self.coeffs.items()))
        return f"TorusFourierSeries(n={self.n}, {{{inner}}})"
