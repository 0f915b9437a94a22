"""Standalone property suites: the invariants that hold by construction.

Each suite returns (name, passed, detail).  run_selftest drives them all
with a fixed seed and reports one line per suite; it is wired to the CLI
and reused by the acceptance tests.
"""

from __future__ import annotations

import numpy as np

from . import spheregrid
from .calculus import adjoint_expansion, compose_expansion
from .expand import mellin_reduction_residual
from .fourier import TorusFourierSeries
from .oracle import lattice_modes, toroidal_matrix
from .parametrix import build_parametrix, verify_parametrix
from .spheregrid import sphere_monomial_moment, sphere_torus_integral
from .symbols import (CutoffSpec, EllipticOperator, HomogeneousSymbol,
                      PolyHomogeneousSymbol)
from .testfunctions import bump, plateau
from .traces import canonical_trace


def random_fourier(rng, n: int, max_freq: int = 2, count: int = 3,
                   real: bool = True) -> TorusFourierSeries:
    coeffs = {}
    for _ in range(count):
        gamma = tuple(int(v) for v in rng.integers(-max_freq, max_freq + 1, n))
        amp = complex(rng.normal(), 0.0 if real else rng.normal())
        coeffs[gamma] = coeffs.get(gamma, 0j) + amp
    series = TorusFourierSeries(n, coeffs)
    if real:
        series = series + series.conjugate()
    return series


def random_homogeneous(rng, n: int, degree: complex, terms: int = 3,
                       max_alpha: int = 3) -> HomogeneousSymbol:
    data = {}
    for _ in range(terms):
        total = int(rng.integers(0, max_alpha + 1))
        alpha = tuple(np.bincount(rng.integers(0, n, total), minlength=n)) \
            if total else (0,) * n
        data[alpha] = random_fourier(rng, n)
    return HomogeneousSymbol(n, degree, data)


def suite_homogeneity(rng, samples: int = 100, tol: float = 1e-10):
    worst = 0.0
    for _ in range(10):
        n = int(rng.choice([2, 3]))
        degree = complex(rng.uniform(-3, 3), rng.uniform(-0.5, 0.5))
        h = random_homogeneous(rng, n, degree)
        x = rng.random((samples // 10, n))
        xi = rng.normal(size=(samples // 10, n))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        lam = rng.uniform(0.1, 10.0, samples // 10)
        base = h.evaluate(x, xi)
        scaled = h.evaluate(x, xi * lam[:, None])
        factor = np.exp(degree * np.log(lam))
        err = np.abs(scaled - factor * base) / np.maximum(np.abs(factor * base), 1e-30)
        worst = max(worst, float(np.max(err)))
    return "homogeneity", worst <= tol, f"max rel defect {worst:.2e}"


def suite_leibniz(rng, tol: float = 1e-12):
    worst = 0.0
    for _ in range(8):
        n = int(rng.choice([2, 3]))
        a = random_homogeneous(rng, n, complex(rng.uniform(-2, 2)))
        b = random_homogeneous(rng, n, complex(rng.uniform(-2, 2)))
        for axis in range(n):
            lhs = (a * b).dxi(axis)
            rhs = a.dxi(axis) * b + a * b.dxi(axis)
            diff = (lhs - rhs).prune(1e-14)
            scale = max(lhs.max_abs(), 1.0)
            worst = max(worst, diff.max_abs() / scale)
            lhs_x = (a * b).dx(axis)
            rhs_x = a.dx(axis) * b + a * b.dx(axis)
            worst = max(worst, (lhs_x - rhs_x).prune(1e-14).max_abs() / scale)
    return "leibniz", worst <= tol, f"max coefficient defect {worst:.2e}"


def suite_sphere_vanishing(rng, cases: int = 20, tol: float = 1e-10):
    """Derivative densities of total degree -n integrate to zero on the sphere."""
    worst = 0.0
    for _ in range(cases):
        n = int(rng.choice([2, 3]))
        total = int(rng.integers(1, 4))
        alpha = tuple(np.bincount(rng.integers(0, n, total), minlength=n))
        # arrange deg(d^alpha b) = -n exactly
        b = random_homogeneous(rng, n, -n + total, terms=2, max_alpha=2)
        density = b.dxi_multi(alpha)
        val = abs(sphere_torus_integral(density))
        scale = max(density.max_abs(), 1.0)
        worst = max(worst, val / scale)
    # counterexample sanity: the lemma needs at least one derivative
    n = 2
    direct = sphere_torus_integral(
        HomogeneousSymbol.monomial(n, (1, 0)).dxi(0))
    sane = abs(direct - 2 * np.pi) < 1e-12
    return ("sphere-vanishing", worst <= tol and sane,
            f"max defect {worst:.2e}; underived counterexample 2pi ok: {sane}")


def suite_moments(rng, tol: float = 1e-10, max_total: int = 8):
    from .calculus import multiindices

    worst = 0.0
    for n in (2, 3):
        for total in range(0, max_total + 1):
            for alpha in multiindices(n, total):
                closed = sphere_monomial_moment(n, alpha)
                quad = spheregrid._sphere_torus_quadrature(
                    HomogeneousSymbol.monomial(n, alpha), sphere_points=512)
                worst = max(worst, abs(closed - quad))
    return "sphere-moments", worst <= tol, f"max closed-vs-quadrature {worst:.2e}"


def suite_mellin(rng, tol: float = 1e-10):
    eta = bump(1.0, 2.0)
    chi = plateau(-0.5, -0.25, 1.0, 1.5)
    worst = 0.0
    for s in (1.5, 2.5, 3.5, 0.75 + 0.4j):
        for r in (1, 2, 3):
            resid = mellin_reduction_residual(eta, s, r)
            worst = max(worst, resid)
    for s in (3.5, 4.25):
        for r in (1, 2):
            resid = mellin_reduction_residual(chi, s, r)
            if resid is not None:
                worst = max(worst, resid)
    return "mellin-reduction", worst <= tol, f"max identity defect {worst:.2e}"


def _variable_operator(n: int = 2) -> EllipticOperator:
    h0 = HomogeneousSymbol.radial(n, 2.0)
    h1 = HomogeneousSymbol.radial(n, 1.0, TorusFourierSeries.cosine(n, (1, 0), 0.1))
    return EllipticOperator(PolyHomogeneousSymbol(n, 2.0, [h0, h1]), c0=0.9)


def suite_parametrix(rng, depth: int = 3, tol: float = 1e-10):
    op = _variable_operator()
    qs = build_parametrix(op, depth)
    report = verify_parametrix(op, qs, depth, samples=100,
                               seed=int(rng.integers(1, 1 << 30)))
    ok = report["symbolic_max"] <= tol and report["numeric_max"] <= tol
    return ("parametrix-residual", ok,
            f"symbolic {report['symbolic_max']:.2e}, numeric {report['numeric_max']:.2e}")


def suite_finite_part(rng, tol: float = 1e-10):
    """The finite part must not move when the split radius does."""
    worst = 0.0
    for _ in range(6):
        n = int(rng.choice([2, 3]))
        m = float(rng.uniform(-n + 0.1, -0.1))
        if abs(m - round(m)) < 0.05:
            m += 0.07
        comps = []
        for j in range(2):
            comps.append((random_homogeneous(rng, n, m - j, terms=2, max_alpha=1),
                          CutoffSpec(float(rng.uniform(0.5, 2.0)))))
        sym = PolyHomogeneousSymbol(n, m, comps)
        base = canonical_trace(sym)
        moved = canonical_trace(sym, split_scale=2.0)
        worst = max(worst, abs(base - moved) / max(abs(base), 1.0))
    return "finite-part-split", worst <= tol, f"max split-shift {worst:.2e}"


def _interior_columns(modes: np.ndarray, margin: int, flat: float) -> np.ndarray:
    inf_norm = np.max(np.abs(modes), axis=1)
    eucl = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
    top = int(np.max(inf_norm))
    return np.nonzero((inf_norm <= top - margin) & (eucl >= flat))[0]


def suite_composition_case0(rng, truncation: int = 8, tol: float = 1e-10):
    """Differential left factor: the finite star product is operator-exact."""
    n = 2
    a = PolyHomogeneousSymbol(n, 2.0, [
        HomogeneousSymbol(n, 2.0, {(2, 0): 1.0, (0, 2): 0.5}),
        HomogeneousSymbol(n, 1.0, {(1, 0): TorusFourierSeries.cosine(n, (1, 0), 0.7)}),
    ])
    b = PolyHomogeneousSymbol(n, -1.0, [
        HomogeneousSymbol.radial(n, -1.0,
                                 TorusFourierSeries.constant(n, 1.0)
                                 + TorusFourierSeries.cosine(n, (0, 1), 0.4)),
    ])
    ab = compose_expansion(a, b, order_count=4)
    modes = lattice_modes(n, truncation)
    m_prod = toroidal_matrix(a.symbol if hasattr(a, "symbol") else a, modes) @ \
        toroidal_matrix(b, modes)
    m_star = toroidal_matrix(ab, modes)
    cols = _interior_columns(modes, margin=2, flat=2.0)
    defect = float(np.max(np.abs(m_prod[:, cols] - m_star[:, cols])))
    return "composition-case0", defect <= tol, f"interior-mode defect {defect:.2e}"


def suite_adjoint_matrix(rng, truncation: int = 8, tol: float = 1e-8):
    n = 2
    a = PolyHomogeneousSymbol(n, 2.0, [
        HomogeneousSymbol(n, 2.0, {(2, 0): TorusFourierSeries.constant(n, 1.0),
                                   (1, 1): TorusFourierSeries.cosine(n, (1, 0), 0.5)}),
        HomogeneousSymbol(n, 1.0, {(0, 1): TorusFourierSeries.sine(n, (0, 1), 0.3)}),
    ])
    adj = adjoint_expansion(a, order_count=4)
    modes = lattice_modes(n, truncation)
    m_a = toroidal_matrix(a, modes)
    m_adj = toroidal_matrix(adj, modes)
    cols = _interior_columns(modes, margin=2, flat=2.0)
    grid = np.ix_(cols, cols)
    defect = float(np.max(np.abs(m_adj[grid] - m_a.conj().T[grid])))
    return "adjoint-matrix", defect <= tol, f"interior-mode defect {defect:.2e}"


ALL_SUITES = [
    suite_homogeneity,
    suite_leibniz,
    suite_sphere_vanishing,
    suite_moments,
    suite_mellin,
    suite_parametrix,
    suite_finite_part,
    suite_composition_case0,
    suite_adjoint_matrix,
]


def run_selftest(seed: int = 20240801, corrupt_moments: bool = False,
                 printer=print) -> bool:
    """Run every suite; returns overall pass.  corrupt_moments perturbs the
    closed-form moment table to prove the suites can actually fail."""
    rng = np.random.default_rng(seed)
    all_ok = True
    old_scale = spheregrid._MOMENT_SCALE
    if corrupt_moments:
        spheregrid._MOMENT_SCALE = 1.0 + 1e-6
    try:
        for suite in ALL_SUITES:
            name, ok, detail = suite(rng)
            all_ok &= ok
            printer(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    finally:
        spheregrid._MOMENT_SCALE = old_scale
    return all_ok
