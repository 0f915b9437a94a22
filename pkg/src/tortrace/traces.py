"""Non-commutative residue, smoothing trace, and the canonical trace.

All three are radial-times-sphere factorizations.  Writing w_j = m - j + n
for the component of degree m - j, the xi-integral of h_j * psi(t_j |xi|)
splits into the sphere-torus moment of h_j times a radial factor:

  * full integral (Re w_j < 0):  int_0^inf psi(t_j r) r^(w_j - 1) dr
  * finite part (w_j != 0):      int_0^R psi(t_j r) r^(w_j - 1) dr - R^w_j / w_j,
                                 independent of the split radius R >= 1/t_j.

The residue is the sphere-torus moment of the degree -n component alone.
"""

from __future__ import annotations

import numpy as np

from .quadrature import adaptive_quad, power_integral
from .spheregrid import sphere_torus_integral
from .symbols import CutoffSpec, PolyHomogeneousSymbol

_INT_TOL = 1e-9


def integer_in_zn(m: complex, n: int, tol: float = _INT_TOL) -> int | None:
    """The integer m if m lies in {-n, -n+1, ...} (within tol), else None."""
    m = complex(m)
    if abs(m.imag) > tol:
        return None
    k = int(round(m.real))
    if abs(m.real - k) > tol:
        return None
    return k if k >= -n else None


def residue_density_integrated(symbol: PolyHomogeneousSymbol) -> complex:
    """Sphere-torus integral of the degree -n component; zero off the integer ladder."""
    n = symbol.n
    if integer_in_zn(symbol.order, n) is None:
        return 0.0 + 0.0j
    j = int(round((symbol.order + n).real))
    if j < 0 or j >= symbol.depth:
        return 0.0 + 0.0j
    return sphere_torus_integral(symbol.component(j))


def _radial_full(cutoff: CutoffSpec, w: complex, rel_tol: float = 1e-12) -> complex:
    """int_0^inf psi(t r) r^(w-1) dr for Re w < 0: numeric ramp + exact tail."""
    a, b = cutoff.zero_radius, cutoff.full_radius
    ramp, _ = adaptive_quad(lambda r: cutoff(r) * np.exp((w - 1) * np.log(r)),
                            a, b, rel_tol)
    return ramp + (-b ** w / w)


def _radial_finite_part(cutoff: CutoffSpec, w: complex, split_scale: float = 1.0,
                        rel_tol: float = 1e-12) -> complex:
    """Finite part of the radial integral against r^(w-1).

    Computed as int_0^R psi(t r) r^(w-1) dr - R^w / w with R = split_scale / t.
    The two terms move together when R changes: the value is R-independent
    for any R >= 1/t, which is the correctness certificate for the formula.
    """
    if abs(w) < 1e-12:
        raise ValueError("finite part undefined at w = 0 (logarithmic case)")
    if split_scale < 1.0:
        raise ValueError("split radius must lie in the region where the cutoff is one")
    t = cutoff.t
    a, b = cutoff.zero_radius, cutoff.full_radius
    big_r = split_scale / t
    ramp, _ = adaptive_quad(lambda r: cutoff(r) * np.exp((w - 1) * np.log(r)),
                            a, b, rel_tol)
    if big_r > b:
        # numeric continuation across the flat region exercises the
        # compensation against the -R^w/w term
        flat, _ = adaptive_quad(lambda r: np.exp((w - 1) * np.log(r)), b, big_r, rel_tol)
    else:
        flat = 0.0
    return ramp + flat - big_r ** w / w


def smoothing_trace(symbol: PolyHomogeneousSymbol, rel_tol: float = 1e-12) -> complex:
    """Exact trace of an operator of order below -n: the plain symbol integral."""
    n = symbol.n
    if symbol.order.real >= -n:
        raise ValueError(
            f"smoothing trace needs Re(order) < -{n}, got {symbol.order}"
        )
    total = 0.0 + 0.0j
    for j in range(symbol.depth):
        h = symbol.component(j)
        if h.is_zero():
            continue
        moment = sphere_torus_integral(h)
        if moment == 0:
            continue
        total += moment * _radial_full(symbol.cutoff(j), h.degree + n, rel_tol)
    return total


def canonical_trace(symbol: PolyHomogeneousSymbol, split_scale: float = 1.0,
                    rel_tol: float = 1e-12) -> complex:
    """Canonical trace via the Hadamard finite part of the xi-integral.

    Requires order outside {-n, -n+1, ...}; then no component degree hits -n,
    every radial power w_j = m - j + n is nonzero, and the finite part drops
    exactly the pure power R^(w_j) terms (no logarithms can arise).  For
    Re(order) < -n this reduces to the convergent integral, i.e. the trace.
    """
    n = symbol.n
    bad = [j for j in range(symbol.depth)
           if not symbol.component(j).is_zero()
           and abs(symbol.component(j).degree + n) < 1e-9]
    if bad:
        raise ValueError(
            f"canonical trace undefined: component {bad[0]} has degree -{n} "
            f"(order {symbol.order} meets the integer ladder {{-{n}, -{n}+1, ...}}; "
            "non-integer order hypothesis violated)"
        )
    total = 0.0 + 0.0j
    for j in range(symbol.depth):
        h = symbol.component(j)
        if h.is_zero():
            continue
        moment = sphere_torus_integral(h)
        if moment == 0:
            continue
        w = h.degree + n
        total += moment * _radial_finite_part(symbol.cutoff(j), w, split_scale, rel_tol)
    return total
