"""Power-expansion predictions for tr(A f(tL)) as t -> 0+.

The pipeline reduces every term to a product of three factors: a Mellin
moment of a derivative of the test function, a weighted sphere-torus
integral of a homogeneous symbol against a power of the principal symbol,
and an explicit power of t.  Two assembly modes exist:

  * window functions supported in (0, infinity): a pure power ladder whose
    t^0 coefficient (when present) is the non-commutative residue times the
    logarithmic moment of the window, divided by the operator order;
  * plateau functions equal to one near zero: the same ladder for every
    differentiated term, plus a constant equal to the canonical trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import TWO_PI_I, multi_factorial, multiindices
from .funcalc import FunctionalSymbolExpansion, fc_symbols
from .quadrature import adaptive_quad, graded_quad
from .spheregrid import grid_for, sphere_torus_integral, weighted_coefficient_integral
from .symbols import EllipticOperator, HomogeneousSymbol, PolyHomogeneousSymbol
from .testfunctions import TestFunction
from .traces import canonical_trace, integer_in_zn, residue_density_integrated

EXPONENT_MERGE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Mellin moments
# ---------------------------------------------------------------------------

def _positive_pieces(f: TestFunction):
    return [(max(lo, 0.0), hi) for lo, hi in f.support_pieces() if hi > 0.0]


def mellin_moment(f: TestFunction, s: complex, r: int = 0,
                  rel_tol: float = 1e-12) -> complex:
    """M[f^(r), s] = int_0^inf f^(r)(u) u^(s-1) du.

    Valid whenever the integral converges at zero: either the r-th derivative
    is supported away from [0, eps) on the positive axis, or f has a plateau
    of ones at zero (closed form there) with Re s > 0, or Re s > r.
    """
    s = complex(s)
    fr = f.derivative(r)
    pieces = _positive_pieces(fr)
    if not pieces:
        return 0.0 + 0.0j
    touches_zero = pieces[0][0] <= 0.0
    total = 0.0 + 0.0j
    if touches_zero:
        if r == 0:
            plateau = f.one_plateau_from_zero()
            if plateau > 0.0 and s.real > 0:
                # f == 1 on [0, c]: int_0^c u^(s-1) du = c^s / s exactly
                c = plateau
                total += c ** s / s
                pieces = [(max(lo, c), hi) for lo, hi in pieces if hi > c]
            elif s.real > max(r, 0):
                lo, hi = pieces[0]
                total += graded_quad(
                    lambda u: fr(u) * np.exp((s - 1) * np.log(u)), lo, hi)
                pieces = pieces[1:]
            else:
                raise ValueError(
                    f"Mellin moment of derivative order {r} at s={s} diverges: "
                    "support touches zero and no plateau/positivity applies"
                )
        elif s.real > r:
            lo, hi = pieces[0]
            total += graded_quad(lambda u: fr(u) * np.exp((s - 1) * np.log(u)), lo, hi)
            pieces = pieces[1:]
        else:
            raise ValueError(
                f"Mellin moment of derivative order {r} at s={s} requires the "
                "derivative support to avoid zero (or Re s > r)"
            )
    for lo, hi in pieces:
        val, _ = adaptive_quad(lambda u: fr(u) * np.exp((s - 1) * np.log(u)),
                               lo, hi, rel_tol)
        total += val
    return total


def mellin_reduction_residual(f: TestFunction, s: complex, r: int) -> float | None:
    """|M[f^(r), s] - (-1)^r (s-1)...(s-r) M[f, s-r]|, when both sides converge.

    Returns None when the reduced side is not computable (plateau at zero
    with Re(s - r) <= 0).
    """
    s = complex(s)
    lhs = mellin_moment(f, s, r)
    factor = (-1.0) ** r
    for i in range(1, r + 1):
        factor *= (s - i)
    try:
        rhs = factor * mellin_moment(f, s - r, 0)
    except ValueError:
        return None
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Functional term sums: sum over (p, g, r) of t^p g(x, xi) f^(r)(t ell_m0)
# ---------------------------------------------------------------------------

class FunctionalTermSum:
    """Finite list of (t-power, homogeneous symbol, derivative order) triples."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        merged: dict[tuple[int, int, int], HomogeneousSymbol] = {}
        for p, g, r in terms or []:
            if g.is_zero():
                continue
            key = (int(p), int(r), int(round(g.degree.real * 1e6)))
            if key in merged:
                merged[key] = merged[key] + g
            else:
                merged[key] = g
        self.terms = [(p, g, r) for (p, r, _), g in sorted(merged.items(),
                                                           key=lambda kv: kv[0])
                      if not g.is_zero()]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def dx(self, operator: EllipticOperator, axis: int) -> "FunctionalTermSum":
        """Leibniz plus chain rule: (p,g,r) -> (p, dx g, r) + (p+1, g dx(ell), r+1)."""
        out = []
        for p, g, r in self.terms:
            out.append((p, g.dx(axis), r))
            out.append((p + 1, g * operator.dx_principal(axis), r + 1))
        return FunctionalTermSum(self.n, out)

    def dxi(self, operator: EllipticOperator, axis: int) -> "FunctionalTermSum":
        out = []
        for p, g, r in self.terms:
            out.append((p, g.dxi(axis), r))
            out.append((p + 1, g * operator.dxi_principal(axis), r + 1))
        return FunctionalTermSum(self.n, out)

    def dx_multi(self, operator: EllipticOperator, alpha) -> "FunctionalTermSum":
        out = self
        for axis, count in enumerate(alpha):
            for _ in range(count):
                out = out.dx(operator, axis)
        return out

    def mul_hs(self, g: HomogeneousSymbol) -> "FunctionalTermSum":
        return FunctionalTermSum(self.n, [(p, h * g, r) for p, h, r in self.terms])

    def evaluate(self, operator: EllipticOperator, f: TestFunction, t: float,
                 x, xi) -> np.ndarray:
        ell = operator.principal.evaluate(x, xi).real
        out = np.zeros(np.shape(ell), dtype=complex)
        for p, g, r in self.terms:
            out = out + (t ** p) * g.evaluate(x, xi) * f.derivative(r)(t * ell)
        return out


def functional_term_sum(fc: FunctionalSymbolExpansion, j: int) -> FunctionalTermSum:
    """The order-j symbol of f(tL) as a term sum: t^r d (-1)^r/r! f^(r)(t ell)."""
    terms = [(r, d.scale(scalar), r) for d, r, scalar in fc.terms(j)]
    return FunctionalTermSum(fc.operator.n, terms)


# ---------------------------------------------------------------------------
# Reduction of a single term to (exponent, coefficient)
# ---------------------------------------------------------------------------

def reduce_trace_term(term: tuple, operator: EllipticOperator, f: TestFunction,
                      w_tol: float = 1e-10) -> tuple[complex, complex]:
    """Reduce t^p int g(x,xi) f^(r)(t ell_m0) dx dxi to one power of t.

    Polar coordinates and u = t r^m0 ell_m0 give exponent p - (deg g + n)/m0
    and coefficient (1/m0) M[f^(r), sigma] W(g, sigma) with
    sigma = (deg g + n)/m0.  The low-frequency cutoff discrepancy is O(t^inf)
    because the relevant derivative of f vanishes near zero.
    """
    p, g, r = term
    if g.is_zero():
        return 0.0, 0.0 + 0.0j
    m0 = operator.m0
    sigma = (g.degree + operator.n) / m0
    if r == 0 and not f.supported_in_positive():
        raise ValueError(
            "undifferentiated plateau terms cannot be Mellin-reduced; route "
            "them through the plateau prediction's constant-term handling"
        )
    moment = mellin_moment(f, sigma, r)
    weight = weighted_coefficient_integral(g, operator, sigma)
    return p - sigma, moment * weight / m0


# ---------------------------------------------------------------------------
# Expansion predictions
# ---------------------------------------------------------------------------

@dataclass
class ExpansionPrediction:
    """Sorted list of (exponent, coefficient, provenance) in ascending Re e."""

    terms: list[tuple[complex, complex, str]] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def merged(self) -> "ExpansionPrediction":
        groups: list[list] = []
        for e, c, tag in sorted(self.terms, key=lambda t: (t[0].real, t[0].imag)):
            if groups and abs(groups[-1][0] - e) <= EXPONENT_MERGE_TOL:
                groups[-1][1] += c
                if tag not in groups[-1][2]:
                    groups[-1][2] = groups[-1][2] + "+" + tag
            else:
                groups.append([e, c, tag])
        return ExpansionPrediction([(e, c, tag) for e, c, tag in groups],
                                   dict(self.diagnostics))

    def pruned(self, rel_tol: float = 1e-12) -> "ExpansionPrediction":
        if not self.terms:
            return self
        scale = max(abs(c) for _, c, _ in self.terms)
        kept = [(e, c, tag) for e, c, tag in self.terms if abs(c) > rel_tol * scale]
        dropped = len(self.terms) - len(kept)
        diag = dict(self.diagnostics)
        if dropped:
            diag["pruned_terms"] = diag.get("pruned_terms", 0) + dropped
        return ExpansionPrediction(kept, diag)

    def exponents(self) -> list[complex]:
        return [e for e, _, _ in self.terms]

    def coefficient_at(self, exponent: complex) -> complex:
        for e, c, _ in self.terms:
            if abs(e - exponent) <= EXPONENT_MERGE_TOL:
                return c
        return 0.0 + 0.0j

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for e, c, _ in self.terms:
            out = out + c * t ** e
        return out

    def __iter__(self):
        return iter(self.terms)


def _ladder_exponent(m: complex, n: int, m0: float, jprime: int) -> complex:
    return -(m + n - jprime) / m0


def _collect_pipeline_terms(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                            f: TestFunction, order_count: int,
                            fc: FunctionalSymbolExpansion,
                            skip_undifferentiated: bool) -> list[tuple]:
    """All (exponent, coefficient, provenance, meta) pieces with j + |alpha| +
    j2 < order_count, optionally skipping the r = 0 diagonal family."""
    n = operator.n
    pieces = []
    for j in range(order_count):
        base = functional_term_sum(fc, j)
        if not len(base):
            continue
        for k in range(order_count - j):
            for alpha in multiindices(n, k):
                moved = base.dx_multi(operator, alpha) if k else base
                if not len(moved):
                    continue
                factor = TWO_PI_I ** (-k) / multi_factorial(alpha)
                for j2 in range(order_count - j - k):
                    a_comp = symbol.component(j2)
                    if a_comp.is_zero():
                        continue
                    da = a_comp.dxi_multi(alpha)
                    if da.is_zero():
                        continue
                    for p, g, r in moved:
                        if skip_undifferentiated and r == 0:
                            continue
                        exponent, coeff = reduce_trace_term(
                            (p, da * g, r), operator, f)
                        pieces.append((exponent, coeff * factor,
                                       f"j={j},|a|={k},j2={j2}",
                                       (j, k, j2, p, r)))
    return pieces


def predict_expansion_res(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                          eta: TestFunction, order_count: int,
                          qs=None, check_tol: float = 1e-10) -> ExpansionPrediction:
    """Power ladder of tr(A eta(tL)) for a window eta supported in (0, inf).

    Exponents lie on -(m + n - j')/m0 for j' = 0..order_count-1.  When the
    order is an integer >= -n, the t^0 coefficient is checked against the
    independently computed residue times the logarithmic moment over m0.
    """
    lo, hi = eta.support()
    if lo <= 0.0 or not np.isfinite(hi):
        raise ValueError("window function must be compactly supported in (0, inf)")
    m = symbol.order
    n = operator.n
    m0 = operator.m0
    fc = fc_symbols(operator, order_count - 1, qs)
    pieces = _collect_pipeline_terms(symbol, operator, eta, order_count, fc,
                                     skip_undifferentiated=False)

    ladder = [_ladder_exponent(m, n, m0, jp) for jp in range(order_count)]
    for e, c, tag, meta in pieces:
        if not any(abs(e - le) <= 1e-7 for le in ladder):
            raise AssertionError(f"exponent {e} off the ladder (term {tag})")

    diagnostics: dict = {}
    zero_idx = integer_in_zn(m, n)
    if zero_idx is not None and 0 <= zero_idx + n < order_count:
        # the constant can only come from the undifferentiated principal-route
        # term of the degree -n component; everything else must cancel through
        # the Mellin integration-by-parts zeros or the sphere lemma
        stray = 0.0
        for e, c, tag, meta in pieces:
            j, k, j2, p, r = meta
            if abs(e) <= 1e-7 and (j, k, p, r) != (0, 0, 0, 0):
                stray = max(stray, abs(c))
        diagnostics["t0_stray_contributions"] = stray
        scale = max([abs(c) for _, c, _, _ in pieces] + [1.0])
        if stray > check_tol * scale:
            raise AssertionError(
                f"t^0 coefficient receives non-principal contributions ({stray:.3e})"
            )
        expected = (residue_density_integrated(symbol)
                    * mellin_moment(eta, 0.0, 0) / m0)
        got = sum(c for e, c, _, _ in pieces if abs(e) <= 1e-7)
        diagnostics["t0_vs_residue"] = abs(got - expected)
        if abs(got - expected) > check_tol * max(1.0, abs(expected)):
            raise AssertionError(
                f"t^0 coefficient {got} disagrees with residue route {expected}"
            )

    pred = ExpansionPrediction([(e, c, tag) for e, c, tag, _ in pieces],
                               diagnostics)
    return pred.merged().pruned()


def predict_expansion_tr(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                         chi: TestFunction, order_count: int,
                         qs=None) -> ExpansionPrediction:
    """Expansion of tr(A chi(tL)) for a plateau chi equal to one on [0, c].

    The constant term is the canonical trace.  Undifferentiated plateau terms
    contribute closed-form powers  (1/m0) M[chi, sigma_j2] W(a_{m-j2}, sigma_j2)
    at exponent -sigma_j2 whenever Re sigma_j2 > 0 (their finite-part remainder
    is what builds the canonical trace); every differentiated term reduces as
    in the window case since derivatives of chi vanish near zero.
    """
    m = symbol.order
    n = operator.n
    m0 = operator.m0
    if any(not symbol.component(j).is_zero()
           and abs(symbol.component(j).degree + n) < 1e-9
           for j in range(symbol.depth)):
        raise ValueError(
            f"plateau expansion rejected: order {m} meets the integer ladder "
            f"{{-{n}, -{n}+1, ...}} through a degree -{n} component"
        )
    if not chi.is_one_near_zero():
        raise ValueError("plateau function must equal one on a neighborhood of zero")
    if not chi.is_compactly_supported():
        raise ValueError("plateau function must be compactly supported")

    fc = fc_symbols(operator, order_count - 1, qs)
    pieces = _collect_pipeline_terms(symbol, operator, chi, order_count, fc,
                                     skip_undifferentiated=True)
    terms = [(e, c * 1.0, tag) for e, c, tag, _ in pieces]

    # r = 0 family: per component, an exact scale-invariant power for the
    # growing directions plus the finite-part constant collected below
    for j2 in range(min(symbol.depth, order_count)):
        a_comp = symbol.component(j2)
        if a_comp.is_zero():
            continue
        sigma = (a_comp.degree + n) / m0
        if sigma.real > 1e-9:
            coeff = (mellin_moment(chi, sigma, 0)
                     * weighted_coefficient_integral(a_comp, operator, sigma) / m0)
            terms.append((-sigma, coeff, f"plateau-power,j2={j2}"))

    terms.append((0.0 + 0.0j, canonical_trace(symbol), "canonical-trace"))
    return ExpansionPrediction(terms, {"constant": "canonical-trace"}).merged().pruned()


# ---------------------------------------------------------------------------
# The E_t cross-check integral
# ---------------------------------------------------------------------------

def tr_integral_Et(symbol: PolyHomogeneousSymbol, operator: EllipticOperator,
                   chi: TestFunction, t: float, sphere_points: int = 256) -> complex:
    """Numeric  int (a psi - a_hom) chi(t ell_m0) dxi dx,  component by component.

    For components with Re(deg + n) > 0 this is the cutoff-deficit integral
    int (psi - 1) h chi(t ell); for Re(deg + n) < 0 the realized component is
    integrable at infinity and the plain integral of h psi chi(t ell) is
    taken instead.  As t -> 0 both converge to the finite-part value, so the
    total converges to the canonical trace.
    """
    n = symbol.n
    grid = grid_for([symbol.component(j) for j in range(symbol.depth)]
                    + [operator.principal], sphere_points)
    x, xi = grid.product_nodes()
    ell_unit = operator.principal.evaluate(x, xi).real
    ell_max = float(np.max(ell_unit))
    ell_min = float(np.min(ell_unit))
    m0 = operator.m0
    plateau_end = chi.one_plateau_from_zero()
    if plateau_end <= 0:
        raise ValueError("plateau function must equal one near zero")
    sup_chi = chi.support()[1]

    total = 0.0 + 0.0j
    for j in range(symbol.depth):
        h = symbol.component(j)
        if h.is_zero():
            continue
        cut = symbol.cutoff(j)
        w = h.degree + n
        hvals = h.evaluate(x, xi)

        def profile(r_nodes: np.ndarray) -> np.ndarray:
            """Sphere-torus integral of h * chi(t r^m0 ell) at each radius."""
            out = np.empty(len(r_nodes), dtype=complex)
            for i, r in enumerate(r_nodes):
                out[i] = grid.integrate_product(hvals * chi(t * (r ** m0) * ell_unit))
            return out

        a, b = cut.zero_radius, cut.full_radius
        if w.real > 0:
            # core region where chi(t r^m0 ell) == 1: closed-form power
            r_flat = (plateau_end / (t * ell_max)) ** (1.0 / m0)
            r_core = min(a, r_flat)
            if r_core > 0:
                total -= sphere_torus_integral(h) * (r_core ** w) / w
            if r_core < a:
                val, _ = adaptive_quad(
                    lambda rr: np.exp((w - 1) * np.log(rr)) * profile(rr),
                    r_core, a, 1e-11, max_doublings=8)
                total -= val
            ramp, _ = adaptive_quad(
                lambda rr: (cut(rr) - 1.0) * np.exp((w - 1) * np.log(rr)) * profile(rr),
                a, b, 1e-11, max_doublings=8)
            total += ramp
        else:
            ramp, _ = adaptive_quad(
                lambda rr: cut(rr) * np.exp((w - 1) * np.log(rr)) * profile(rr),
                a, b, 1e-11, max_doublings=8)
            total += ramp
            r_max = (sup_chi / (t * ell_min)) ** (1.0 / m0)
            if r_max > b:
                tail, _ = adaptive_quad(
                    lambda rr: np.exp((w - 1) * np.log(rr)) * profile(rr),
                    b, r_max, 1e-11, max_doublings=10)
                total += tail
    return total
