"""Symbol expansion of f(L) from the resolvent parametrix.

Each resolvent power (ell_m0 - z)^(-1-r) turns into (-1)^r f^(r)(ell_m0)/r!
under the Cauchy integral, so the order-j symbol of f(L) is the finite sum
sum_p d_p * (-1)^(p-1)/(p-1)! * f^(p-1)(ell_m0) with the parametrix
coefficients d_p.  Everything here is f-independent data; f enters only at
evaluation time.
"""

from __future__ import annotations

import math

import numpy as np

from .parametrix import ResolventSymbol, build_parametrix
from .symbols import EllipticOperator, HomogeneousSymbol


class FunctionalSymbolExpansion:
    """Graded term lists [(d, r, scalar)]: order j holds sum d*scalar*f^(r)(ell_m0)."""

    def __init__(self, operator: EllipticOperator, orders: list[list[tuple]]):
        self.operator = operator
        self.orders = orders

    @property
    def depth(self) -> int:
        return len(self.orders) - 1

    def terms(self, j: int) -> list[tuple[HomogeneousSymbol, int, complex]]:
        return self.orders[j]

    def evaluate_order(self, j: int, f, x, xi, t: float = 1.0) -> np.ndarray:
        """Values of the order-j symbol of f(tL): sum t^r d (-1)^r/r! f^(r)(t ell)."""
        ell = self.operator.principal.evaluate(x, xi).real
        out = np.zeros(np.shape(ell), dtype=complex)
        for d, r, scalar in self.orders[j]:
            out = out + d.evaluate(x, xi) * (scalar * t ** r) * f.derivative(r)(t * ell)
        return out

    def identity_reconstruction(self, j: int) -> HomogeneousSymbol:
        """Order-j symbol for f(lambda) = lambda, computed symbolically.

        Only r = 0 (giving d * ell_m0) and r = 1 (giving -d) survive; the
        result must reproduce the operator component ell_{m0-j} exactly.
        """
        out = HomogeneousSymbol.zero(self.operator.n,
                                     self.operator.m0 - j)
        for d, r, scalar in self.orders[j]:
            if r == 0:
                out = out + (d * self.operator.principal).scale(scalar)
            elif r == 1:
                out = out + d.scale(scalar)
        return out


def fc_symbols(operator: EllipticOperator, depth: int,
               qs: list[ResolventSymbol] | None = None) -> FunctionalSymbolExpansion:
    """Functional-calculus symbol data of f(L) up to expansion order depth."""
    if qs is None:
        qs = build_parametrix(operator, depth)
    orders = []
    for j in range(depth + 1):
        terms = []
        for p, d in sorted(qs[j].powers.items()):
            r = p - 1
            scalar = (-1.0) ** r / math.factorial(r)
            terms.append((d, r, scalar))
        orders.append(terms)
    return FunctionalSymbolExpansion(operator, orders)
