"""Asymptotic composition and adjoint for poly-homogeneous symbols.

Composition follows the star-product expansion
    a # b ~ sum_alpha (2 pi i)^(-|alpha|) / alpha! * d_xi^alpha a * d_x^alpha b,
graded by total homogeneity drop.  When the left factor is polynomial in xi
the sum terminates and the truncation is exact.
"""

from __future__ import annotations

import math

import numpy as np

from .symbols import CutoffSpec, HomogeneousSymbol, PolyHomogeneousSymbol

TWO_PI_I = 2j * np.pi


def multiindices(n: int, total: int) -> list[tuple[int, ...]]:
    """All alpha in N0^n with |alpha| = total, lexicographic order."""
    if n == 1:
        return [(total,)]
    out = []
    for head in range(total, -1, -1):
        for tail in multiindices(n - 1, total - head):
            out.append((head,) + tail)
    return out


def multi_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def _default_order_count(order_sum: complex, n: int) -> int:
    # keep components until the dropped remainder has order < -n - 1
    return max(1, int(math.floor(order_sum.real + n + 1)) + 2)


def compose_expansion(a: PolyHomogeneousSymbol, b: PolyHomogeneousSymbol,
                      order_count: int | None = None) -> PolyHomogeneousSymbol:
    """Truncated star product of order m_a + m_b with order_count components."""
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    n = a.n
    order = a.order + b.order
    if order_count is None:
        order_count = _default_order_count(order, n)
    components = []
    for jprime in range(order_count):
        comp = HomogeneousSymbol.zero(n, order - jprime)
        t_min = None
        for j1 in range(jprime + 1):
            for j2 in range(jprime + 1 - j1):
                k = jprime - j1 - j2
                left = a.component(j1)
                right = b.component(j2)
                if left.is_zero() or right.is_zero():
                    continue
                for alpha in multiindices(n, k):
                    dl = left.dxi_multi(alpha)
                    if dl.is_zero():
                        continue
                    dr = right.dx_multi(alpha)
                    if dr.is_zero():
                        continue
                    factor = TWO_PI_I ** (-k) / multi_factorial(alpha)
                    comp = comp + (dl * dr).scale(factor)
                # the coarser participating cutoff wins; the discrepancy is a
                # compactly supported smoothing term and shifts no coefficient
                t_candidate = min(a.cutoff(j1).t, b.cutoff(j2).t)
                t_min = t_candidate if t_min is None else min(t_min, t_candidate)
        components.append((comp, CutoffSpec(t_min if t_min else 1.0)))
    return PolyHomogeneousSymbol(n, order, components)


def adjoint_expansion(a: PolyHomogeneousSymbol,
                      order_count: int | None = None) -> PolyHomogeneousSymbol:
    """Truncated symbol of the formal adjoint: sum of dxi^a dx^a conj(a)/stuff."""
    n = a.n
    order = np.conj(a.order)
    if order_count is None:
        order_count = _default_order_count(order, n)
    components = []
    for jprime in range(order_count):
        comp = HomogeneousSymbol.zero(n, order - jprime)
        t_min = None
        for j in range(jprime + 1):
            k = jprime - j
            base = a.component(j)
            if base.is_zero():
                continue
            conj = base.conjugate()
            for alpha in multiindices(n, k):
                term = conj.dxi_multi(alpha).dx_multi(alpha)
                if term.is_zero():
                    continue
                factor = TWO_PI_I ** (-k) / multi_factorial(alpha)
                comp = comp + term.scale(factor)
            t_candidate = a.cutoff(j).t
            t_min = t_candidate if t_min is None else min(t_min, t_candidate)
        components.append((comp, CutoffSpec(t_min if t_min else 1.0)))
    return PolyHomogeneousSymbol(n, order, components)
