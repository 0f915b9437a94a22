"""Ground-truth traces on the torus and power-law coefficient recovery.

Two oracles: exact lattice sums for Fourier-multiplier operators, and dense
Hermitian eigendecomposition of Fourier-truncated matrices for variable
coefficients.  Both are deterministic: modes are enumerated in ascending
|k|^2 (lexicographic tie-break) and reduced with compensated summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import compensated_dot
from .symbols import EllipticOperator, PolyHomogeneousSymbol
from .testfunctions import TestFunction


# ---------------------------------------------------------------------------
# Lattice enumeration
# ---------------------------------------------------------------------------

def _lattice_box(n: int, radius: int) -> np.ndarray:
    axes = [np.arange(-radius, radius + 1)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, n)


def _sorted_order(lattice: np.ndarray) -> np.ndarray:
    norm2 = np.sum(lattice.astype(np.int64) ** 2, axis=1)
    keys = tuple(lattice[:, axis] for axis in range(lattice.shape[1] - 1, -1, -1))
    return np.lexsort(keys + (norm2,))


def lattice_modes(n: int, truncation: int) -> np.ndarray:
    """Modes |k|_inf <= truncation in ascending |k|^2, lexicographic order."""
    modes = _lattice_box(n, truncation)
    return modes[_sorted_order(modes)]


def toroidal_matrix(sigma: PolyHomogeneousSymbol, modes: np.ndarray) -> np.ndarray:
    """Matrix of Op(sigma) on the given Fourier modes: M[i, j] = sigma_hat_{k_i - k_j}(k_j)."""
    size = len(modes)
    index = {tuple(k): i for i, k in enumerate(modes)}
    out = np.zeros((size, size), dtype=complex)
    cols = modes.astype(float)
    for gamma in sigma.all_frequencies():
        vals = sigma.fourier_realized(gamma, cols)
        targets = modes + np.asarray(gamma, dtype=int)
        rows = np.fromiter((index.get(tuple(t), -1) for t in targets),
                           dtype=np.int64, count=size)
        live = rows >= 0
        out[rows[live], np.nonzero(live)[0]] += vals[live]
    return out


def _window_radius(operator: EllipticOperator, f_sup: float, t: float) -> int:
    """Box half-width guaranteed to contain {k : t lambda(k) <= f_sup}."""
    m0 = operator.m0
    base = (2.0 * f_sup / (t * operator.c0)) ** (1.0 / m0)
    cut = max(c.full_radius for _, c in operator.symbol.components)
    return int(math.ceil(base + cut)) + 2


def multiplier_trace(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                     f: TestFunction, t: float) -> tuple[complex, dict]:
    """Exact tr(A f(tL)) for an x-independent L: sum of amp_0(k) f(t lambda(k)).

    amp_0(k) is the x-mean of the realized symbol of A at xi = k; the sum runs
    over t lambda(k) in supp f (window f) or t lambda(k) <= sup supp f
    (plateau f), in ascending |k|^2 order with compensated accumulation.
    """
    if not operator.symbol.is_x_independent():
        raise ValueError("multiplier oracle needs an x-independent operator")
    lo, hi = f.support()
    if not np.isfinite(hi):
        raise ValueError("test function must be compactly supported")
    radius = _window_radius(operator, hi, t)
    lattice = _lattice_box(operator.n, radius)
    lam = operator.symbol.mean_realized(lattice.astype(float)).real
    scaled = t * lam
    if f.supported_in_positive():
        mask = (scaled >= lo) & (scaled <= hi)
    else:
        mask = scaled <= hi
    # the ellipticity-based radius must dominate the actual window
    edge = np.max(np.abs(lattice[mask])) if np.any(mask) else 0
    if edge >= radius - 1:
        raise AssertionError("lattice window not contained in the search box")
    picked = lattice[mask]
    order = _sorted_order(picked)
    picked = picked[order]
    amps = symbol.mean_realized(picked.astype(float))
    fvals = f(t * operator.symbol.mean_realized(picked.astype(float)).real)
    value = compensated_dot(amps, np.asarray(fvals, dtype=float))
    diag = {"mode_count": int(picked.shape[0]), "box_radius": radius,
            "spectral_margin": float("inf"), "symmetry_defect": 0.0}
    return value, diag


def multiplier_plain_trace(symbol: PolyHomogeneousSymbol, radius: int) -> tuple[complex, float]:
    """tr(A) for Re(order) < -n as a lattice sum plus the homogeneous tail.

    The partial sum runs over |k|_inf <= radius; beyond the box every cutoff
    is one and the components are exactly homogeneous, so the remainder is
    estimated by the radial integral of each component (the Poisson error of
    that estimate decays faster than any power of the radius).  Returns the
    value and the magnitude of the applied tail correction.
    """
    from .spheregrid import sphere_torus_integral

    n = symbol.n
    if symbol.order.real >= -n:
        raise ValueError("plain trace requires order below -n")
    lattice = _lattice_box(n, radius)
    norm2 = np.sum(lattice ** 2, axis=1)
    inside = norm2 <= radius * radius
    picked = lattice[inside]
    order = _sorted_order(picked)
    picked = picked[order]
    amps = symbol.mean_realized(picked.astype(float))
    partial = compensated_dot(amps, np.ones(len(picked)))
    tail = 0.0 + 0.0j
    for j in range(symbol.depth):
        h = symbol.component(j)
        if h.is_zero():
            continue
        if symbol.cutoff(j).full_radius > radius:
            raise ValueError("radius must exceed every cutoff radius")
        w = h.degree + n
        tail += sphere_torus_integral(h) * (-(radius ** w) / w)
    return partial + tail, abs(tail)


# ---------------------------------------------------------------------------
# Dense truncation oracle
# ---------------------------------------------------------------------------

class TruncatedOperatorOracle:
    """Fourier truncation to modes |k|_inf <= K with a one-time eigensolve.

    The operator matrix is M[i, j] = sigma_hat_{k_i - k_j}(k_j) (toroidal
    quantization); the L-matrix is symmetrized before diagonalizing and the
    defect norm recorded.  Traces tr(M_A f(tH)) then cost one weighted sum
    over eigenvalues per t.
    """

    def __init__(self, symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                 truncation: int):
        self.symbol = symbol
        self.operator = operator
        self.truncation = int(truncation)
        n = operator.n
        self.modes = lattice_modes(n, self.truncation)
        m_l = toroidal_matrix(operator.symbol, self.modes)
        herm = 0.5 * (m_l + m_l.conj().T)
        self.symmetry_defect = float(np.linalg.norm(m_l - m_l.conj().T))
        self.symmetry_defect_rel = self.symmetry_defect / max(
            float(np.linalg.norm(m_l)), 1e-300)
        if np.max(np.abs(herm.imag)) < 1e-14 * max(1.0, np.max(np.abs(herm.real))):
            evals, vecs = np.linalg.eigh(herm.real)
            vecs = vecs.astype(complex)
        else:
            evals, vecs = np.linalg.eigh(herm)
        self.evals = evals
        m_a = toroidal_matrix(symbol, self.modes)
        # diagonal of V^* M_A V without forming the full product twice
        self.weights = np.einsum("ij,ij->j", vecs.conj(), m_a @ vecs)
        self._boundary_floor = self._boundary_min_diagonal()

    def _boundary_min_diagonal(self) -> float:
        layer = np.max(np.abs(self.modes), axis=1) == self.truncation
        diag = self.operator.symbol.mean_realized(
            self.modes[layer].astype(float)).real
        return float(np.min(diag))

    def check_margin(self, f: TestFunction, t: float, factor: float = 2.0):
        sup = f.support()[1]
        margin = t * self._boundary_floor
        if margin < factor * sup:
            raise ValueError(
                f"spectral margin violated: t*min boundary symbol = {margin:.4g} "
                f"< {factor} * sup supp f = {factor * sup:.4g}; raise K or t"
            )

    def trace(self, f: TestFunction, t: float) -> tuple[complex, dict]:
        self.check_margin(f, t)
        fvals = np.asarray(f(t * self.evals), dtype=float)
        value = compensated_dot(self.weights, fvals)
        diag = {"mode_count": len(self.modes),
                "spectral_margin": t * self._boundary_floor,
                "symmetry_defect": self.symmetry_defect,
                "symmetry_defect_rel": self.symmetry_defect_rel}
        return value, diag


def matrix_trace(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                 f: TestFunction, t: float, truncation: int) -> tuple[complex, dict]:
    oracle = TruncatedOperatorOracle(symbol, operator, truncation)
    return oracle.trace(f, t)


# ---------------------------------------------------------------------------
# Series container, least squares, verification
# ---------------------------------------------------------------------------

@dataclass
class OracleSeries:
    """Trace samples (t descending) with per-sample truncation diagnostics."""

    ts: list = field(default_factory=list)
    values: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def add(self, t: float, value: complex, diag: dict):
        if self.ts and t >= self.ts[-1]:
            raise ValueError("t values must be strictly decreasing")
        self.ts.append(float(t))
        self.values.append(complex(value))
        self.diagnostics.append(dict(diag))

    def t_array(self) -> np.ndarray:
        return np.asarray(self.ts, dtype=float)

    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=complex)

    def csv_lines(self) -> list[str]:
        lines = ["t,re_value,im_value,mode_count,spectral_margin,symmetry_defect"]
        for t, v, d in zip(self.ts, self.values, self.diagnostics):
            lines.append(
                f"{t!r},{v.real!r},{v.imag!r},{d.get('mode_count', 0)},"
                f"{d.get('spectral_margin', 0.0)!r},{d.get('symmetry_defect', 0.0)!r}"
            )
        return lines


def geometric_grid(t_min: float, t_max: float, count: int) -> np.ndarray:
    """Geometric t grid returned in decreasing order."""
    return np.geomspace(t_max, t_min, count)


def multiplier_series(symbol, operator, f, ts) -> OracleSeries:
    series = OracleSeries()
    for t in ts:
        value, diag = multiplier_trace(symbol, operator, f, float(t))
        series.add(float(t), value, diag)
    return series


def matrix_series(symbol, operator, f, ts, truncation: int) -> OracleSeries:
    oracle = TruncatedOperatorOracle(symbol, operator, truncation)
    series = OracleSeries()
    for t in ts:
        value, diag = oracle.trace(f, float(t))
        series.add(float(t), value, diag)
    return series


@dataclass
class PowerFit:
    exponents: list
    coefficients: list
    residual_norm: float
    condition_number: float
    usable: bool

    def coefficient_at(self, exponent: float, tol: float = 1e-9) -> complex:
        for e, c in zip(self.exponents, self.coefficients):
            if abs(e - exponent) <= tol:
                return c
        return 0.0 + 0.0j

    def csv_lines(self) -> list[str]:
        lines = ["exponent,re_coefficient,im_coefficient,condition_number,usable"]
        for e, c in zip(self.exponents, self.coefficients):
            lines.append(f"{e!r},{c.real!r},{c.imag!r},"
                         f"{self.condition_number!r},{int(self.usable)}")
        return lines


def fit_powers(series: OracleSeries, exponents, with_constant: bool = False,
               cond_limit: float = 1e8) -> PowerFit:
    """Least squares for sum_j c_j t^(e_j) (exponents real; close ones merged)."""
    exps = []
    for e in exponents:
        e = complex(e)
        if abs(e.imag) > 1e-12:
            raise ValueError("power fitting is restricted to real exponents")
        if not any(abs(e.real - x) <= 1e-9 for x in exps):
            exps.append(e.real)
    if with_constant and not any(abs(x) <= 1e-9 for x in exps):
        exps.append(0.0)
    exps = sorted(exps)
    t = series.t_array()
    if len(t) < 2 * len(exps):
        raise ValueError("need at least two samples per unknown")
    design = np.stack([t ** e for e in exps], axis=1)
    # column scaling keeps the conditioning meaningful across spread exponents
    scales = np.max(np.abs(design), axis=0)
    solution, _, rank, singulars = np.linalg.lstsq(design / scales,
                                                   series.value_array(), rcond=None)
    coeffs = solution / scales
    cond = float(singulars[0] / singulars[-1]) if singulars[-1] > 0 else np.inf
    residual = float(np.linalg.norm(series.value_array() - design @ coeffs))
    usable = bool(rank == len(exps) and cond <= cond_limit)
    return PowerFit(list(exps), list(coeffs), residual, cond, usable)


@dataclass
class VerificationReport:
    coefficient_rows: list  # (exponent, predicted, fitted, rel_error, checked)
    residual_slope: float | None
    expected_next_exponent: float | None
    slope_ok: bool
    coefficients_ok: bool
    fit: PowerFit

    @property
    def passed(self) -> bool:
        return self.coefficients_ok and self.slope_ok and self.fit.usable

    def lines(self) -> list[str]:
        out = []
        for e, pred, fitted, rel, checked in self.coefficient_rows:
            status = "PASS" if (not checked or rel <= self._tol) else "FAIL"
            note = "" if checked else " (below magnitude floor, informational)"
            out.append(f"  exponent {e:+.6f}: predicted {pred:.10g}, "
                       f"fitted {fitted:.10g}, rel err {rel:.3e} {status}{note}")
        if self.residual_slope is not None:
            out.append(f"  residual slope {self.residual_slope:.4f} vs next "
                       f"exponent {self.expected_next_exponent:.4f}: "
                       f"{'PASS' if self.slope_ok else 'FAIL'}")
        out.append(f"  fit condition number {self.fit.condition_number:.3e}"
                   f"{' (usable)' if self.fit.usable else ' (FLAGGED unusable)'}")
        return out

    _tol = 0.01


def verify_expansion(prediction, series: OracleSeries, coeff_rtol: float = 0.01,
                     magnitude_floor: float = 1e-8,
                     next_exponent: float | None = None,
                     slope_slack: float = 0.05) -> VerificationReport:
    """Fit the oracle on the predicted exponents and compare coefficients.

    The residual after subtracting the full prediction is slope-tested on a
    log-log scale against the next exponent of the ladder when provided.
    """
    exps = [e.real for e in prediction.exponents()]
    fit = fit_powers(series, exps)
    rows = []
    ok = True
    for e, pred_c, _ in prediction:
        fitted = fit.coefficient_at(e.real)
        denom = max(abs(pred_c), 1e-300)
        rel = abs(fitted - pred_c) / denom
        checked = abs(pred_c) > magnitude_floor
        if checked and rel > coeff_rtol:
            ok = False
        rows.append((e.real, complex(pred_c), complex(fitted), rel, checked))

    slope = None
    slope_ok = True
    if next_exponent is not None:
        t = series.t_array()
        resid = np.abs(series.value_array() - prediction.evaluate(t))
        scale = np.max(np.abs(series.value_array()))
        good = resid > 1e-13 * max(scale, 1.0)
        if np.count_nonzero(good) >= 3:
            slope = float(np.polyfit(np.log(t[good]), np.log(resid[good]), 1)[0])
            slope_ok = slope >= next_exponent - slope_slack
        else:
            slope = float("inf")  # residual at noise floor: better than any power
            slope_ok = True
    report = VerificationReport(rows, slope, next_exponent, slope_ok, ok, fit)
    report._tol = coeff_rtol
    return report
