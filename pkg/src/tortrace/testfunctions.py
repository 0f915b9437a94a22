"""Smooth compactly supported test functions with exact derivatives.

Functions are expression trees over a closed family of primitives:
polynomials, exponentials, the bump exp(-1/(1-u^2)) on (-1,1), its
normalized antiderivative (smoothstep), affine reparameterizations, sums
and products.  Differentiation is exact and stays inside the family, so a
derivative of any order can be evaluated at any point without finite
differences.
"""

from __future__ import annotations

import numpy as np

from .quadrature import gl_rule

_EDGE = 1.5e-3  # inside this margin of u = +-1 the bump underflows to zero anyway


class _BumpRational:
    """num(u) / (1 - u^2)^k: the coefficient ring of bump derivatives.

    Keeping the denominator as an explicit power of 1 - u^2 keeps degrees
    linear in the derivative order (a generic p/q representation doubles
    them each step and underflows).
    """

    __slots__ = ("num", "k")

    _QUAD = np.array([1.0, 0.0, -1.0])  # 1 - u^2

    def __init__(self, num, k: int = 0):
        num = np.trim_zeros(np.asarray(num, dtype=float), "b")
        self.num = num if num.size else np.zeros(1)
        self.k = int(k)

    @classmethod
    def one(cls):
        return cls((1.0,))

    def _raised(self, k: int) -> np.ndarray:
        pv = np.polynomial.polynomial
        num = self.num
        for _ in range(k - self.k):
            num = pv.polymul(num, self._QUAD)
        return num

    def __add__(self, other):
        k = max(self.k, other.k)
        return _BumpRational(
            np.polynomial.polynomial.polyadd(self._raised(k), other._raised(k)), k)

    def __mul__(self, other):
        return _BumpRational(
            np.polynomial.polynomial.polymul(self.num, other.num), self.k + other.k)

    def diff(self):
        pv = np.polynomial.polynomial
        dn = pv.polyder(self.num) if self.num.size > 1 else np.zeros(1)
        num = pv.polyadd(pv.polymul(dn, self._QUAD),
                         pv.polymul(self.num, (0.0, 2.0 * self.k)))
        return _BumpRational(num, self.k + 1)

    def __call__(self, u, q=None):
        if q is None:
            q = 1.0 - u * u
        vals = np.polynomial.polynomial.polyval(u, self.num)
        if self.k:
            vals = vals / q ** self.k
        return vals


def _merge_intervals(pieces):
    pieces = sorted((lo, hi) for lo, hi in pieces if hi > lo)
    out = []
    for lo, hi in pieces:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


class _Node:
    def eval(self, u):
        raise NotImplementedError

    def diff(self):
        raise NotImplementedError

    def support_pieces(self):
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


class _Poly(_Node):
    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def eval(self, u):
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def diff(self):
        if self.coeffs.size <= 1:
            return _Poly([0.0])
        return _Poly(np.polynomial.polynomial.polyder(self.coeffs))

    def support_pieces(self):
        if np.all(self.coeffs == 0):
            return []
        return [(-np.inf, np.inf)]

    def spec(self):
        return "poly(" + ",".join(repr(float(c)) for c in self.coeffs) + ")"


class _Exp(_Node):
    def __init__(self, rate):
        self.rate = float(rate)

    def eval(self, u):
        return np.exp(self.rate * np.asarray(u, dtype=float))

    def diff(self):
        return _Scaled(self.rate, _Exp(self.rate))

    def support_pieces(self):
        return [(-np.inf, np.inf)]

    def spec(self):
        return f"exp({self.rate!r})"


class _BumpCore(_Node):
    """exp(-1/(1-u^2)) * rational(u) on (-1, 1), zero elsewhere."""

    def __init__(self, rational: _BumpRational | None = None):
        self.rational = rational or _BumpRational.one()

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=float)
        q = 1.0 - u * u
        inside = q > _EDGE
        if np.any(inside):
            qi = q[inside]
            out[inside] = np.exp(-1.0 / qi) * self.rational(u[inside], qi)
        return out

    def diff(self):
        # d/du exp(-1/(1-u^2)) = exp(...) * (-2u / (1-u^2)^2)
        chain = _BumpRational((0.0, -2.0), 2)
        return _BumpCore(self.rational * chain + self.rational.diff())

    def support_pieces(self):
        return [(-1.0, 1.0)]

    def spec(self):
        return "bumpcore()"


_BUMP_NORM: float | None = None


def _bump_norm() -> float:
    """Integral of the unit bump over (-1, 1)."""
    global _BUMP_NORM
    if _BUMP_NORM is None:
        x, w = gl_rule(16)
        edges = np.linspace(-1.0, 1.0, 513)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        nodes = mid + half * x[None, :]
        _BUMP_NORM = float(np.sum(_BumpCore().eval(nodes) * (half * w[None, :])))
    return _BUMP_NORM


class _Smoothstep(_Node):
    """S(u) = int_{-1}^u B0 / int_{-1}^1 B0: zero left of -1, one right of 1."""

    _edges = None
    _prefix = None

    @classmethod
    def _table(cls):
        if cls._edges is None:
            x, w = gl_rule(16)
            edges = np.linspace(-1.0, 1.0, 513)
            mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
            half = 0.5 * (edges[1:] - edges[:-1])[:, None]
            vals = np.sum(_BumpCore().eval(mid + half * x[None, :]) * (half * w[None, :]),
                          axis=1)
            cls._edges = edges
            cls._prefix = np.concatenate(([0.0], np.cumsum(vals)))
        return cls._edges, cls._prefix

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        edges, prefix = self._table()
        out = np.zeros(u.shape, dtype=float)
        out[u >= 1.0] = 1.0
        inside = (u > -1.0) & (u < 1.0)
        if np.any(inside):
            ui = u[inside]
            idx = np.clip(np.searchsorted(edges, ui, side="right") - 1, 0, len(edges) - 2)
            a = edges[idx]
            x, w = gl_rule(16)
            mid = 0.5 * (a + ui)[:, None]
            half = 0.5 * (ui - a)[:, None]
            partial = np.sum(_BumpCore().eval(mid + half * x[None, :]) * (half * w[None, :]),
                             axis=1)
            out[inside] = (prefix[idx] + partial) / _bump_norm()
        return out

    def diff(self):
        return _Scaled(1.0 / _bump_norm(), _BumpCore())

    def support_pieces(self):
        return [(-1.0, np.inf)]

    def spec(self):
        return "smoothstep()"


class _Affine(_Node):
    """node(shift + scale * u)."""

    def __init__(self, inner: _Node, shift: float, scale: float):
        self.inner = inner
        self.shift = float(shift)
        self.scale = float(scale)

    def eval(self, u):
        return self.inner.eval(self.shift + self.scale * np.asarray(u, dtype=float))

    def diff(self):
        return _Scaled(self.scale, _Affine(self.inner.diff(), self.shift, self.scale))

    def support_pieces(self):
        pieces = []
        for lo, hi in self.inner.support_pieces():
            a = (lo - self.shift) / self.scale
            b = (hi - self.shift) / self.scale
            pieces.append((min(a, b), max(a, b)))
        return _merge_intervals(pieces)

    def spec(self):
        return f"affine({self.inner.spec()},{self.shift!r},{self.scale!r})"


class _Scaled(_Node):
    def __init__(self, factor: float, inner: _Node):
        self.factor = float(factor)
        self.inner = inner

    def eval(self, u):
        return self.factor * self.inner.eval(u)

    def diff(self):
        return _Scaled(self.factor, self.inner.diff())

    def support_pieces(self):
        if self.factor == 0.0:
            return []
        return self.inner.support_pieces()

    def spec(self):
        return f"scale({self.factor!r},{self.inner.spec()})"


class _Sum(_Node):
    def __init__(self, parts):
        self.parts = list(parts)

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=float)
        for p in self.parts:
            out = out + p.eval(u)
        return out

    def diff(self):
        return _Sum([p.diff() for p in self.parts])

    def support_pieces(self):
        pieces = []
        for p in self.parts:
            pieces.extend(p.support_pieces())
        return _merge_intervals(pieces)

    def spec(self):
        return "sum(" + ",".join(p.spec() for p in self.parts) + ")"


class _Product(_Node):
    def __init__(self, left: _Node, right: _Node):
        self.left = left
        self.right = right

    def eval(self, u):
        return self.left.eval(u) * self.right.eval(u)

    def diff(self):
        return _Sum([
            _Product(self.left.diff(), self.right),
            _Product(self.left, self.right.diff()),
        ])

    def support_pieces(self):
        out = []
        for a, b in self.left.support_pieces():
            for c, d in self.right.support_pieces():
                lo, hi = max(a, c), min(b, d)
                if hi > lo:
                    out.append((lo, hi))
        return _merge_intervals(out)

    def spec(self):
        return f"product({self.left.spec()},{self.right.spec()})"


class TestFunction:
    """Smooth function with exact derivatives of every order and known support."""

    def __init__(self, root: _Node, spec_hint: str | None = None):
        self.root = root
        self._spec_hint = spec_hint
        self._derivs: dict[int, TestFunction] = {0: self}

    def __call__(self, u):
        scalar = np.isscalar(u)
        vals = self.root.eval(np.atleast_1d(np.asarray(u, dtype=float)))
        return float(vals[0]) if scalar else vals

    def derivative(self, r: int = 1) -> "TestFunction":
        if r < 0:
            raise ValueError("derivative order must be non-negative")
        highest = max(self._derivs)
        while highest < r:
            nxt = TestFunction(self._derivs[highest].root.diff())
            highest += 1
            self._derivs[highest] = nxt
            nxt._derivs = {0: nxt}
        return self._derivs[r]

    # -- support and predicates ---------------------------------------------

    def support_pieces(self) -> list[tuple[float, float]]:
        return self.root.support_pieces()

    def support(self) -> tuple[float, float]:
        pieces = self.support_pieces()
        if not pieces:
            return (0.0, 0.0)
        return (pieces[0][0], pieces[-1][1])

    def is_compactly_supported(self) -> bool:
        lo, hi = self.support()
        return np.isfinite(lo) and np.isfinite(hi)

    def supported_in_positive(self) -> bool:
        lo, hi = self.support()
        return lo > 0.0 and np.isfinite(hi)

    def one_plateau_from_zero(self, probe: int = 400, tol: float = 1e-12) -> float:
        """Largest c with f == 1 on [0, c] (0.0 if f(0) != 1), checked numerically."""
        lo, hi = self.support()
        if not np.isfinite(hi) or hi <= 0:
            return 0.0
        grid = np.linspace(0.0, hi, probe)
        vals = self(grid)
        bad = np.abs(vals - 1.0) > tol
        if bad[0]:
            return 0.0
        first = int(np.argmax(bad)) if np.any(bad) else probe
        return float(grid[max(first - 1, 0)])

    def is_one_near_zero(self, tol: float = 1e-12) -> bool:
        return self.one_plateau_from_zero(tol=tol) > 0.0

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(_Sum([self.root, other.root]),
                            f"sum({self.spec()},{other.spec()})")

    def __mul__(self, other):
        if isinstance(other, TestFunction):
            return TestFunction(_Product(self.root, other.root),
                                f"product({self.spec()},{other.spec()})")
        return TestFunction(_Scaled(float(other), self.root),
                            f"scale({float(other)!r},{self.spec()})")

    __rmul__ = __mul__

    def spec(self) -> str:
        return self._spec_hint if self._spec_hint is not None else self.root.spec()

    def __repr__(self):
        return f"TestFunction({self.spec()})"


# -- standard constructors -----------------------------------------------------

def poly(*coeffs) -> TestFunction:
    hint = "poly(" + ",".join(repr(float(c)) for c in coeffs) + ")"
    return TestFunction(_Poly(coeffs), hint)


def identity_function() -> TestFunction:
    return poly(0.0, 1.0)


def exponential(rate: float) -> TestFunction:
    return TestFunction(_Exp(rate), f"exp({float(rate)!r})")


def bump(lo: float, hi: float, height: float = 1.0) -> TestFunction:
    """Bump supported on (lo, hi) with peak value `height` at the midpoint."""
    if hi <= lo:
        raise ValueError("need lo < hi")
    shift = -(lo + hi) / (hi - lo)
    scale = 2.0 / (hi - lo)
    return TestFunction(_Scaled(height * np.e, _Affine(_BumpCore(), shift, scale)),
                        f"bump({float(lo)!r},{float(hi)!r},{float(height)!r})")


def smoothstep_rise(lo: float, hi: float) -> TestFunction:
    """0 for u <= lo, 1 for u >= hi, smooth monotone in between."""
    if hi <= lo:
        raise ValueError("need lo < hi")
    shift = -(lo + hi) / (hi - lo)
    scale = 2.0 / (hi - lo)
    return TestFunction(_Affine(_Smoothstep(), shift, scale),
                        f"rise({float(lo)!r},{float(hi)!r})")


def smoothstep_fall(lo: float, hi: float) -> TestFunction:
    """1 for u <= lo, 0 for u >= hi."""
    if hi <= lo:
        raise ValueError("need lo < hi")
    shift = (lo + hi) / (hi - lo)
    scale = -2.0 / (hi - lo)
    return TestFunction(_Affine(_Smoothstep(), shift, scale),
                        f"fall({float(lo)!r},{float(hi)!r})")


def plateau(a: float, b: float, c: float, d: float) -> TestFunction:
    """Supported in (a, d), identically one on [b, c]."""
    if not (a < b <= c < d):
        raise ValueError("need a < b <= c < d")
    out = smoothstep_rise(a, b) * smoothstep_fall(c, d)
    out._spec_hint = (f"plateau({float(a)!r},{float(b)!r},"
                      f"{float(c)!r},{float(d)!r})")
    return out


def spectral_plateau(one_until: float, falloff: float = 0.5,
                     left_margin: float = 0.5) -> TestFunction:
    """Plateau equal to one on [-left_margin/2, one_until]: the standard choice
    for functions that must be one near the non-positive spectrum."""
    return plateau(-left_margin, -left_margin / 2.0, one_until,
                   one_until + falloff)
