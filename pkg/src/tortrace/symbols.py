"""Homogeneous and poly-homogeneous symbols on T^n x R^n, n in {2, 3}.

A homogeneous symbol of complex degree d is a finite sum of terms
c_alpha(x) * xi^alpha * |xi|^(d - |alpha|), where each c_alpha is a finite
torus Fourier series.  The ring of such terms is closed under products and
under d/dxi_j and d/dx_j, which is all the expansion machinery needs.

A poly-homogeneous symbol of order m is a graded list of homogeneous
components of degrees m, m-1, ..., each glued to zero frequency by a fixed
smooth radial cutoff; the realized symbol is smooth on all of R^n.
"""

from __future__ import annotations

import numpy as np

from .fourier import TorusFourierSeries

DEGREE_TOL = 1e-9


def degrees_close(a: complex, b: complex, tol: float = DEGREE_TOL) -> bool:
    return abs(complex(a) - complex(b)) <= tol


def _as_alpha(alpha) -> tuple[int, ...]:
    a = tuple(int(v) for v in alpha)
    if any(v < 0 for v in a):
        raise ValueError(f"multi-index must be non-negative, got {a}")
    return a


def smooth_transition(r: np.ndarray) -> np.ndarray:
    """Reference radial profile: 0 for r <= 1/2, 1 for r >= 1, smooth between.

    Built from B(u) = exp(-1/u) (u > 0) as B(2r-1) / (B(2r-1) + B(2-2r)).
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    out[r >= 1.0] = 1.0
    mid = (r > 0.5) & (r < 1.0)
    if np.any(mid):
        u = 2.0 * r[mid] - 1.0
        v = 2.0 - 2.0 * r[mid]
        bu = np.exp(-1.0 / u)
        bv = np.exp(-1.0 / v)
        out[mid] = bu / (bu + bv)
    return out


class CutoffSpec:
    """Low-frequency cutoff psi(t*|xi|): vanishes for |xi| <= 1/(2t), one for |xi| >= 1/t."""

    __slots__ = ("t",)

    def __init__(self, t: float = 1.0):
        t = float(t)
        if t <= 0:
            raise ValueError("cutoff radius scale must be positive")
        self.t = t

    @property
    def full_radius(self) -> float:
        """Radius beyond which the cutoff is identically one."""
        return 1.0 / self.t

    @property
    def zero_radius(self) -> float:
        return 0.5 / self.t

    def __call__(self, radii: np.ndarray) -> np.ndarray:
        return smooth_transition(self.t * np.asarray(radii, dtype=float))

    def __eq__(self, other):
        return isinstance(other, CutoffSpec) and self.t == other.t

    def __repr__(self):
        return f"CutoffSpec(t={self.t!r})"


class HomogeneousSymbol:
    """Finite sum of c_alpha(x) xi^alpha |xi|^(d-|alpha|), one fixed degree d."""

    __slots__ = ("n", "degree", "terms")

    def __init__(self, n: int, degree: complex, terms: dict | None = None):
        self.n = int(n)
        self.degree = complex(degree)
        clean: dict[tuple[int, ...], TorusFourierSeries] = {}
        for alpha, coeff in (terms or {}).items():
            a = _as_alpha(alpha)
            if len(a) != self.n:
                raise ValueError(f"multi-index {a} has wrong dimension")
            if not isinstance(coeff, TorusFourierSeries):
                coeff = TorusFourierSeries.constant(self.n, coeff)
            if a in clean:
                coeff = clean[a] + coeff
            if not coeff.is_zero():
                clean[a] = coeff
            elif a in clean:
                del clean[a]
        self.terms = clean

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, n: int, degree: complex) -> "HomogeneousSymbol":
        return cls(n, degree, {})

    @classmethod
    def radial(cls, n: int, s: complex, xcoeff=1.0) -> "HomogeneousSymbol":
        """xcoeff(x) * |xi|^s."""
        return cls(n, s, {(0,) * n: xcoeff})

    @classmethod
    def monomial(cls, n: int, alpha, s: complex = 0.0, xcoeff=1.0) -> "HomogeneousSymbol":
        """xcoeff(x) * xi^alpha * |xi|^s, degree |alpha| + s."""
        a = _as_alpha(alpha)
        return cls(n, sum(a) + complex(s), {a: xcoeff})

    # -- structure -----------------------------------------------------------

    def s_of(self, alpha: tuple[int, ...]) -> complex:
        return self.degree - sum(alpha)

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> float:
        if not self.terms:
            return 0.0
        return max(c.max_abs() for c in self.terms.values())

    def max_frequency(self) -> int:
        if not self.terms:
            return 0
        return max(c.max_frequency() for c in self.terms.values())

    def is_x_independent(self) -> bool:
        zero = (0,) * self.n
        return all(set(c.coeffs) <= {zero} for c in self.terms.values())

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        if abs(self.degree.imag) > DEGREE_TOL:
            return False
        return all(c.is_real_valued(tol) for c in self.terms.values())

    def prune(self, tol: float = 1e-14) -> "HomogeneousSymbol":
        scale = self.max_abs()
        if scale == 0.0:
            return self
        kept = {}
        for a, c in self.terms.items():
            c2 = TorusFourierSeries(
                self.n, {g: v for g, v in c.coeffs.items() if abs(v) > tol * scale}
            )
            if not c2.is_zero():
                kept[a] = c2
        return HomogeneousSymbol(self.n, self.degree, kept)

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "HomogeneousSymbol") -> "HomogeneousSymbol":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if not degrees_close(self.degree, other.degree):
            raise ValueError(
                f"cannot add homogeneous symbols of degrees {self.degree} and {other.degree}"
            )
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return HomogeneousSymbol(self.n, self.degree, out)

    def __sub__(self, other: "HomogeneousSymbol") -> "HomogeneousSymbol":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "HomogeneousSymbol":
        return HomogeneousSymbol(
            self.n, self.degree, {a: coeff.scale(c) for a, coeff in self.terms.items()}
        )

    def __mul__(self, other):
        if not isinstance(other, HomogeneousSymbol):
            return self.scale(other)
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out: dict = {}
        for a1, c1 in self.terms.items():
            for a2, c2 in other.terms.items():
                a = tuple(i + j for i, j in zip(a1, a2))
                c = c1 * c2
                out[a] = out[a] + c if a in out else c
        return HomogeneousSymbol(self.n, self.degree + other.degree, out)

    __rmul__ = __mul__

    def conjugate(self) -> "HomogeneousSymbol":
        """Pointwise complex conjugate; degree becomes conj(degree)."""
        return HomogeneousSymbol(
            self.n,
            np.conj(self.degree),
            {a: c.conjugate() for a, c in self.terms.items()},
        )

    def dxi(self, axis: int) -> "HomogeneousSymbol":
        """Exact d/dxi_axis: degree drops by one.

        Term rule: d/dxi_j (xi^a |xi|^s) = a_j xi^(a-e_j)|xi|^s + s xi^(a+e_j)|xi|^(s-2).
        """
        out: dict = {}

        def add(alpha, coeff):
            if alpha in out:
                out[alpha] = out[alpha] + coeff
            else:
                out[alpha] = coeff

        for a, c in self.terms.items():
            s = self.s_of(a)
            if a[axis] > 0:
                lower = tuple(v - (1 if i == axis else 0) for i, v in enumerate(a))
                add(lower, c.scale(a[axis]))
            if s != 0:
                upper = tuple(v + (1 if i == axis else 0) for i, v in enumerate(a))
                add(upper, c.scale(s))
        return HomogeneousSymbol(self.n, self.degree - 1, out)

    def dx(self, axis: int) -> "HomogeneousSymbol":
        return HomogeneousSymbol(
            self.n, self.degree, {a: c.dx(axis) for a, c in self.terms.items()}
        )

    def dxi_multi(self, alpha) -> "HomogeneousSymbol":
        out = self
        for axis, count in enumerate(_as_alpha(alpha)):
            for _ in range(count):
                out = out.dxi(axis)
        return out

    def dx_multi(self, alpha) -> "HomogeneousSymbol":
        out = self
        for axis, count in enumerate(_as_alpha(alpha)):
            for _ in range(count):
                out = out.dx(axis)
        return out

    def allclose(self, other: "HomogeneousSymbol", tol: float = 1e-11) -> bool:
        if self.n != other.n:
            return False
        if not (self.is_zero() or other.is_zero()):
            if not degrees_close(self.degree, other.degree):
                return False
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        keys = set(self.terms) | set(other.terms)
        zero = TorusFourierSeries(self.n)
        for a in keys:
            c1 = self.terms.get(a, zero)
            c2 = other.terms.get(a, zero)
            for g in set(c1.coeffs) | set(c2.coeffs):
                if abs(c1.coeffs.get(g, 0j) - c2.coeffs.get(g, 0j)) > tol * scale:
                    return False
        return True

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Pointwise values at x (..., n) and xi (..., n), xi away from 0."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        norm = np.sqrt(np.sum(xi * xi, axis=-1))
        out = np.zeros(np.broadcast(norm, np.zeros(x.shape[:-1])).shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            logn = np.log(norm)
        for a, c in self.terms.items():
            s = self.s_of(a)
            mono = np.ones_like(norm, dtype=complex)
            for axis, p in enumerate(a):
                if p:
                    mono = mono * xi[..., axis] ** p
            if s != 0:
                mono = mono * np.exp(s * logn)
            out = out + c.evaluate(x) * mono
        return out

    def fourier_coefficient_at(self, gamma, xi: np.ndarray) -> np.ndarray:
        """Amplitude of exp(2 pi i gamma.x) as a function of xi (no cutoff)."""
        xi = np.asarray(xi, dtype=float)
        g = tuple(int(v) for v in gamma)
        norm = np.sqrt(np.sum(xi * xi, axis=-1))
        out = np.zeros(norm.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            logn = np.log(norm)
        for a, c in self.terms.items():
            amp = c.coeffs.get(g)
            if amp is None:
                continue
            s = self.s_of(a)
            mono = np.ones_like(norm, dtype=complex)
            for axis, p in enumerate(a):
                if p:
                    mono = mono * xi[..., axis] ** p
            if s != 0:
                mono = mono * np.exp(s * logn)
            out = out + amp * mono
        return out

    def __repr__(self):
        parts = []
        for a, c in sorted(self.terms.items()):
            parts.append(f"xi^{a}|xi|^{self.s_of(a)} * {c!r}")
        body = " + ".join(parts) if parts else "0"
        return f"HomogeneousSymbol(deg={self.degree}, {body})"


class PolyHomogeneousSymbol:
    """Classical symbol: finite graded components (h_{m-j}, cutoff_j), j = 0..J."""

    __slots__ = ("n", "order", "components")

    def __init__(self, n: int, order: complex, components):
        self.n = int(n)
        self.order = complex(order)
        comps = []
        for j, entry in enumerate(components):
            if isinstance(entry, HomogeneousSymbol):
                h, cut = entry, CutoffSpec()
            else:
                h, cut = entry
                if not isinstance(cut, CutoffSpec):
                    cut = CutoffSpec(cut)
            if not h.is_zero() and not degrees_close(h.degree, self.order - j):
                raise ValueError(
                    f"component {j} has degree {h.degree}, expected {self.order - j}"
                )
            if h.n != self.n:
                raise ValueError("component dimension mismatch")
            comps.append((h, cut))
        self.components = comps

    @classmethod
    def single(cls, h: HomogeneousSymbol, cutoff: CutoffSpec | float = 1.0):
        cut = cutoff if isinstance(cutoff, CutoffSpec) else CutoffSpec(cutoff)
        return cls(h.n, h.degree, [(h, cut)])

    @property
    def depth(self) -> int:
        return len(self.components)

    def component(self, j: int) -> HomogeneousSymbol:
        if j < len(self.components):
            return self.components[j][0]
        return HomogeneousSymbol.zero(self.n, self.order - j)

    def cutoff(self, j: int) -> CutoffSpec:
        if j < len(self.components):
            return self.components[j][1]
        return CutoffSpec()

    def is_x_independent(self) -> bool:
        return all(h.is_x_independent() for h, _ in self.components)

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        return all(h.is_real_valued(tol) for h, _ in self.components)

    def max_frequency(self) -> int:
        if not self.components:
            return 0
        return max(h.max_frequency() for h, _ in self.components)

    def scale(self, c: complex) -> "PolyHomogeneousSymbol":
        return PolyHomogeneousSymbol(
            self.n, self.order, [(h.scale(c), cut) for h, cut in self.components]
        )

    def evaluate_realized(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Realized symbol sum_j h_j(x, xi) * psi(t_j |xi|); smooth through xi = 0."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        lead = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        x = np.broadcast_to(x, lead + (self.n,))
        xi = np.broadcast_to(xi, lead + (self.n,))
        norm = np.sqrt(np.sum(xi * xi, axis=-1))
        out = np.zeros(lead, dtype=complex)
        for h, cut in self.components:
            w = cut(norm)
            live = w > 0
            if np.any(live):
                out[live] += h.evaluate(x[live], xi[live]) * w[live]
        return out

    def mean_realized(self, xi: np.ndarray) -> np.ndarray:
        """x-mean of the realized symbol at frequencies xi."""
        return self.fourier_realized((0,) * self.n, xi)

    def fourier_realized(self, gamma, xi: np.ndarray) -> np.ndarray:
        """x-Fourier amplitude of the realized symbol at frequency gamma, per xi."""
        xi = np.asarray(xi, dtype=float)
        norm = np.sqrt(np.sum(xi * xi, axis=-1))
        out = np.zeros(norm.shape, dtype=complex)
        for h, cut in self.components:
            w = cut(norm)
            live = w > 0
            if np.any(live):
                out[live] += h.fourier_coefficient_at(gamma, xi[live]) * w[live]
        return out

    def all_frequencies(self) -> list[tuple[int, ...]]:
        freqs = set()
        for h, _ in self.components:
            for c in h.terms.values():
                freqs.update(c.coeffs)
        return sorted(freqs)

    def __repr__(self):
        return (f"PolyHomogeneousSymbol(n={self.n}, order={self.order}, "
                f"J={len(self.components) - 1})")


class EllipticOperator:
    """Real elliptic operator data: symbol ell of real order m0 > 0 with
    ell_{m0}(x, xi) >= c0 |xi|^{m0}, plus the spectral lower-bound shift c1."""

    def __init__(self, symbol: PolyHomogeneousSymbol, c0: float, c1: float = 0.0,
                 validate: bool = True, grid_points: int = 48):
        if abs(symbol.order.imag) > DEGREE_TOL or symbol.order.real <= 0:
            raise ValueError("operator order must be real and positive")
        if c0 <= 0:
            raise ValueError("ellipticity constant c0 must be positive")
        if c1 < 0:
            raise ValueError("lower-bound shift c1 must be non-negative")
        self.symbol = symbol
        self.m0 = float(symbol.order.real)
        self.c0 = float(c0)
        self.c1 = float(c1)
        if validate:
            if not symbol.is_real_valued():
                raise ValueError("elliptic operator symbol must be real-valued")
            self._check_ellipticity(grid_points)
        self._dxi_cache: dict[int, HomogeneousSymbol] = {}
        self._dx_cache: dict[int, HomogeneousSymbol] = {}

    @property
    def n(self) -> int:
        return self.symbol.n

    @property
    def principal(self) -> HomogeneousSymbol:
        return self.symbol.component(0)

    def component(self, j: int) -> HomogeneousSymbol:
        return self.symbol.component(j)

    def dxi_principal(self, axis: int) -> HomogeneousSymbol:
        if axis not in self._dxi_cache:
            self._dxi_cache[axis] = self.principal.dxi(axis)
        return self._dxi_cache[axis]

    def dx_principal(self, axis: int) -> HomogeneousSymbol:
        if axis not in self._dx_cache:
            self._dx_cache[axis] = self.principal.dx(axis)
        return self._dx_cache[axis]

    def principal_values(self, x: np.ndarray, xi_unit: np.ndarray) -> np.ndarray:
        vals = self.principal.evaluate(x, xi_unit)
        return vals.real

    def _check_ellipticity(self, grid_points: int):
        from .spheregrid import SphereGrid

        grid = SphereGrid(self.n, grid_points, max(8, 2 * self.symbol.max_frequency() + 1))
        x, xi = grid.product_nodes()
        vals = self.principal.evaluate(x, xi)
        if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
            raise ValueError("principal symbol is not real on the sample grid")
        bad = vals.real < self.c0
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValueError(
                "ellipticity violated: principal symbol value "
                f"{vals.real.flat[i]:.6g} < c0={self.c0} at x={x.reshape(-1, self.n)[i]}, "
                f"xi={xi.reshape(-1, self.n)[i]}"
            )

    def __repr__(self):
        return f"EllipticOperator(m0={self.m0}, c0={self.c0}, c1={self.c1})"
