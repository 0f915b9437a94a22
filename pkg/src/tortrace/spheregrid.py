"""Product quadrature on S^(n-1) x T^n and closed-form sphere moments.

The circle (n=2) uses the uniform grid, exact for trigonometric polynomials
up to degree node_count - 1.  For n=3 the grid is Gauss-Legendre in the
polar cosine times a uniform azimuth, exact for polynomials of matching
degree.  Torus directions use uniform grids (trapezoid rule), exact for
Fourier modes below the per-axis resolution.
"""

from __future__ import annotations

import math

import numpy as np

# test hook: scales the closed-form moment table; selftest uses it to prove
# the harness actually detects corrupted reference values
_MOMENT_SCALE = 1.0


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sphere_monomial_moment(n: int, alpha) -> float:
    """Closed form for the sphere integral of xi^alpha over S^(n-1).

    Vanishes unless every entry of alpha is even; otherwise equals
    2 * prod Gamma((alpha_i+1)/2) / Gamma((|alpha|+n)/2).
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise ValueError("multi-index dimension mismatch")
    if any(a % 2 for a in alpha):
        return 0.0
    num = 1.0
    for a in alpha:
        num *= math.gamma((a + 1) / 2.0)
    return _MOMENT_SCALE * 2.0 * num / math.gamma((sum(alpha) + n) / 2.0)


class SphereGrid:
    """Quadrature nodes/weights on S^(n-1) plus a uniform torus grid."""

    def __init__(self, n: int, sphere_points: int = 64, torus_points: int = 8):
        if n not in (2, 3):
            raise ValueError("only n in {2, 3} supported")
        self.n = n
        self.torus_points = int(torus_points)
        if n == 2:
            m = int(sphere_points)
            theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
            self.nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            self.weights = np.full(m, 2.0 * np.pi / m)
        else:
            m_polar = max(2, int(round(math.sqrt(sphere_points))))
            m_azim = 2 * m_polar
            z, wz = np.polynomial.legendre.leggauss(m_polar)
            phi = 2.0 * np.pi * (np.arange(m_azim) + 0.5) / m_azim
            rho = np.sqrt(1.0 - z ** 2)
            nodes = np.empty((m_polar, m_azim, 3))
            nodes[..., 0] = rho[:, None] * np.cos(phi)[None, :]
            nodes[..., 1] = rho[:, None] * np.sin(phi)[None, :]
            nodes[..., 2] = z[:, None]
            self.nodes = nodes.reshape(-1, 3)
            self.weights = np.repeat(wz * (2.0 * np.pi / m_azim), m_azim)
        axes = [np.arange(self.torus_points) / self.torus_points] * n
        mesh = np.meshgrid(*axes, indexing="ij")
        self.torus_nodes = np.stack(mesh, axis=-1).reshape(-1, n)
        self.torus_weight = 1.0 / self.torus_points ** n

    def refine(self) -> "SphereGrid":
        return SphereGrid(self.n, 2 * len(self.weights) if self.n == 2
                          else 4 * len(self.weights), 2 * self.torus_points)

    def integrate_sphere(self, values: np.ndarray) -> complex:
        return complex(np.sum(np.asarray(values) * self.weights))

    def product_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """All (x, xi) pairs: x torus nodes tiled against sphere nodes."""
        tn = len(self.torus_nodes)
        sn = len(self.nodes)
        x = np.repeat(self.torus_nodes, sn, axis=0)
        xi = np.tile(self.nodes, (tn, 1))
        return x, xi

    def integrate_product(self, values: np.ndarray) -> complex:
        """Integrate v(x, xi) dx dvarsigma given values at product_nodes order."""
        tn = len(self.torus_nodes)
        sn = len(self.nodes)
        grid = np.asarray(values).reshape(tn, sn)
        return complex(self.torus_weight * np.sum(grid @ self.weights))


def grid_for(symbols, sphere_points: int = 128, min_torus: int = 4) -> SphereGrid:
    """Grid sized so the torus direction resolves all Fourier modes present."""
    n = symbols[0].n
    max_freq = max([s.max_frequency() for s in symbols] + [0])
    torus_points = max(min_torus, 2 * max_freq + 2)
    return SphereGrid(n, sphere_points, torus_points)


def sphere_torus_integral(g, check_tol: float | None = None) -> complex:
    """Integral of a homogeneous symbol over T^n x S^(n-1).

    The x-integral keeps only the zero-frequency amplitude of each term, and
    the sphere factor is the closed-form monomial moment (the |xi|^s factor
    is one on the sphere).  Optionally cross-checked against grid quadrature.
    """
    total = 0.0 + 0.0j
    zero = (0,) * g.n
    for alpha, coeff in sorted(g.terms.items()):
        amp = coeff.coeffs.get(zero, 0j)
        if amp != 0:
            total += amp * sphere_monomial_moment(g.n, alpha)
    if check_tol is not None:
        quad = _sphere_torus_quadrature(g)
        scale = max(abs(total), abs(quad), 1.0)
        if abs(total - quad) > check_tol * scale:
            raise ArithmeticError(
                f"moment formula {total} disagrees with quadrature {quad}"
            )
    return total


def _sphere_torus_quadrature(g, sphere_points: int = 256) -> complex:
    grid = grid_for([g], sphere_points)
    x, xi = grid.product_nodes()
    return grid.integrate_product(g.evaluate(x, xi))


def weighted_coefficient_integral(g, operator, sigma: complex,
                                  rel_tol: float = 1e-10,
                                  max_refinements: int = 6) -> complex:
    """Quadrature of g(x,xi) * ell_m0(x,xi)^(-sigma) over T^n x S^(n-1).

    Refines the product grid (doubling both directions) until the relative
    change drops below rel_tol.  Any non-positive principal value at a node
    aborts with the offending node reported.
    """
    if g.is_zero():
        return 0.0 + 0.0j
    sigma = complex(sigma)
    grid = grid_for([g, operator.principal], sphere_points=64)

    def value_on(grid: SphereGrid) -> complex:
        x, xi = grid.product_nodes()
        ell = operator.principal.evaluate(x, xi).real
        if np.any(ell <= 0):
            i = int(np.argmax(ell <= 0))
            raise ValueError(
                f"ellipticity violated at quadrature node x={x[i]}, xi={xi[i]}: "
                f"principal value {ell[i]:.6g} <= 0"
            )
        vals = g.evaluate(x, xi)
        if sigma != 0:
            vals = vals * np.exp(-sigma * np.log(ell))
        return grid.integrate_product(vals)

    prev = value_on(grid)
    for _ in range(max_refinements):
        grid = grid.refine()
        cur = value_on(grid)
        denom = max(abs(cur), abs(prev), 1e-300)
        change = abs(cur - prev) / denom
        prev = cur
        if change <= rel_tol:
            break
    return prev
