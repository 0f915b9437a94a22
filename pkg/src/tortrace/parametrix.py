"""Symbolic resolvent parametrix for an elliptic operator.

The approximate inverse of (L - z) is built order by order: the order-j
piece is a finite sum  sum_p d_p(x, xi) * (ell_m0(x, xi) - z)^(-p)  whose
coefficients d_p are z-free homogeneous symbols of degree -j + (p-1)*m0.
The recursion never forms rational functions of z: multiplying or dividing
by (ell_m0 - z) is a shift of the power index.
"""

from __future__ import annotations

import numpy as np

from .calculus import TWO_PI_I, multi_factorial, multiindices
from .symbols import EllipticOperator, HomogeneousSymbol, degrees_close


def _merge_tag(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


class ResolventSymbol:
    """Finite map p -> coefficient of (ell_m0 - z)^(-p), one expansion order j.

    provenance[p] = (kmax, dxi_max, dx_max): the coefficient is a combination
    of products of dxi^a dx^b ell_{m0-k'} with k' <= kmax, |a| <= dxi_max,
    |b| <= dx_max.
    """

    __slots__ = ("n", "j", "m0", "powers", "provenance")

    def __init__(self, n: int, j: int, m0: float, powers: dict | None = None,
                 provenance: dict | None = None, validate: bool = True):
        self.n = int(n)
        self.j = int(j)
        self.m0 = float(m0)
        self.powers: dict[int, HomogeneousSymbol] = {}
        for p, d in (powers or {}).items():
            p = int(p)
            if d.is_zero():
                continue
            if validate:
                expected = -self.j + (p - 1) * self.m0
                if not degrees_close(d.degree, expected):
                    raise ValueError(
                        f"coefficient at power {p} has degree {d.degree}, "
                        f"expected {expected} for order tag j={self.j}"
                    )
            self.powers[p] = d
        self.provenance = {p: tuple(tag) for p, tag in (provenance or {}).items()
                           if p in self.powers}

    @classmethod
    def unit(cls, n: int, m0: float) -> "ResolventSymbol":
        one = HomogeneousSymbol.radial(n, 0.0)
        return cls(n, 0, m0, {1: one}, {1: (0, 0, 0)})

    def is_zero(self) -> bool:
        return not self.powers

    def add(self, other: "ResolventSymbol") -> "ResolventSymbol":
        if (self.n, self.j) != (other.n, other.j):
            raise ValueError("cannot add resolvent symbols with different tags")
        powers = dict(self.powers)
        prov = dict(self.provenance)
        for p, d in other.powers.items():
            powers[p] = powers[p] + d if p in powers else d
            prov[p] = _merge_tag(prov.get(p, (0, 0, 0)),
                                 other.provenance.get(p, (0, 0, 0)))
        return ResolventSymbol(self.n, self.j, self.m0, powers, prov)

    def scale(self, c: complex) -> "ResolventSymbol":
        return ResolventSymbol(
            self.n, self.j, self.m0,
            {p: d.scale(c) for p, d in self.powers.items()}, dict(self.provenance))

    def mul_hs(self, g: HomogeneousSymbol, tag=(0, 0, 0)) -> "ResolventSymbol":
        """Multiply every power coefficient by the homogeneous symbol g."""
        powers = {}
        prov = {}
        for p, d in self.powers.items():
            powers[p] = d * g
            prov[p] = _merge_tag(self.provenance.get(p, (0, 0, 0)), tag)
        return ResolventSymbol(self.n, self.j, self.m0, powers, prov, validate=False)

    def dxi(self, axis: int, operator: EllipticOperator) -> "ResolventSymbol":
        """Exact d/dxi: the chain rule on (ell - z)^(-p) raises p; tag j + 1."""
        powers: dict = {}
        prov: dict = {}
        dl = operator.dxi_principal(axis)
        for p, d in self.powers.items():
            tag = self.provenance.get(p, (0, 0, 0))
            dd = d.dxi(axis)
            if not dd.is_zero():
                powers[p] = powers[p] + dd if p in powers else dd
                prov[p] = _merge_tag(prov.get(p, (0, 0, 0)),
                                     (tag[0], tag[1] + 1, tag[2]))
            chain = (d * dl).scale(-p)
            if not chain.is_zero():
                powers[p + 1] = powers[p + 1] + chain if p + 1 in powers else chain
                prov[p + 1] = _merge_tag(prov.get(p + 1, (0, 0, 0)),
                                         (tag[0], max(tag[1], 1), tag[2]))
        return ResolventSymbol(self.n, self.j + 1, self.m0, powers, prov)

    def dx(self, axis: int, operator: EllipticOperator) -> "ResolventSymbol":
        """Exact d/dx: order unchanged, power structure widens by the chain rule."""
        powers: dict = {}
        prov: dict = {}
        dl = operator.dx_principal(axis)
        for p, d in self.powers.items():
            tag = self.provenance.get(p, (0, 0, 0))
            dd = d.dx(axis)
            if not dd.is_zero():
                powers[p] = powers[p] + dd if p in powers else dd
                prov[p] = _merge_tag(prov.get(p, (0, 0, 0)),
                                     (tag[0], tag[1], tag[2] + 1))
            chain = (d * dl).scale(-p)
            if not chain.is_zero():
                powers[p + 1] = powers[p + 1] + chain if p + 1 in powers else chain
                prov[p + 1] = _merge_tag(prov.get(p + 1, (0, 0, 0)),
                                         (tag[0], tag[1], max(tag[2], 1)))
        return ResolventSymbol(self.n, self.j, self.m0, powers, prov)

    def dx_multi(self, alpha, operator: EllipticOperator) -> "ResolventSymbol":
        out = self
        for axis, count in enumerate(alpha):
            for _ in range(count):
                out = out.dx(axis, operator)
        return out

    def shift_up(self) -> "ResolventSymbol":
        """Multiply by (ell_m0 - z)^(-1): every power index grows by one."""
        return ResolventSymbol(
            self.n, self.j, self.m0,
            {p + 1: d for p, d in self.powers.items()},
            {p + 1: tag for p, tag in self.provenance.items()}, validate=False)

    def apply_ell_minus_z(self) -> dict[int, HomogeneousSymbol]:
        """Coefficients of (ell_m0 - z) * self, keyed by power (p = 0 allowed)."""
        return {p - 1: d for p, d in self.powers.items()}

    def evaluate(self, x, xi, z: complex, operator: EllipticOperator) -> np.ndarray:
        ell = operator.principal.evaluate(x, xi)
        out = np.zeros(np.shape(ell), dtype=complex)
        base = ell - z
        for p, d in sorted(self.powers.items()):
            out = out + d.evaluate(x, xi) * base ** (-p)
        return out

    def max_power(self) -> int:
        return max(self.powers) if self.powers else 0

    def min_power(self) -> int:
        return min(self.powers) if self.powers else 0

    def __repr__(self):
        keys = ", ".join(str(p) for p in sorted(self.powers))
        return f"ResolventSymbol(j={self.j}, powers=[{keys}])"


def build_parametrix(operator: EllipticOperator, depth: int) -> list[ResolventSymbol]:
    """Resolvent parametrix coefficients q_j for j = 0..depth.

    q_0 = (ell_m0 - z)^(-1); for j >= 1 the order-(-j) relation of the star
    product with (sum_k ell_{m0-k} - z) is solved by collecting every
    non-diagonal contribution at that order and dividing by (ell_m0 - z).
    All coefficients stay z-free; the power index is bounded by 1 + 2j.
    """
    n = operator.n
    m0 = operator.m0
    qs = [ResolventSymbol.unit(n, m0)]
    for j in range(1, depth + 1):
        powers: dict[int, HomogeneousSymbol] = {}
        prov: dict[int, tuple] = {}
        for j1 in range(j + 1):
            for j2 in range(j + 1 - j1):
                k = j - j1 - j2
                if j1 == 0 and k == 0:
                    continue  # the (ell_m0 - z) q_j diagonal being solved for
                ell_comp = operator.component(j1)
                if ell_comp.is_zero() or qs[j2].is_zero():
                    continue
                for alpha in multiindices(n, k):
                    dl = ell_comp.dxi_multi(alpha)
                    if dl.is_zero():
                        continue
                    moved = qs[j2].dx_multi(alpha, operator)
                    factor = TWO_PI_I ** (-k) / multi_factorial(alpha)
                    term = moved.mul_hs(dl.scale(factor), tag=(j1, k, 0))
                    for p, d in term.powers.items():
                        powers[p] = powers[p] + d if p in powers else d
                        prov[p] = _merge_tag(prov.get(p, (0, 0, 0)),
                                             term.provenance.get(p, (0, 0, 0)))
        q_powers = {p + 1: d.scale(-1.0) for p, d in powers.items()}
        q_prov = {p + 1: tag for p, tag in prov.items()}
        qs.append(ResolventSymbol(n, j, m0, q_powers, q_prov))
    return qs


def compose_with_operator(operator: EllipticOperator, qs: list[ResolventSymbol],
                          depth: int) -> list[dict[int, HomogeneousSymbol]]:
    """Components of (sum_k ell_{m0-k} - z) # (sum_j q_j) up to order depth.

    Entry j' maps power -> coefficient of (ell_m0 - z)^(-power); exactness of
    the parametrix means entry 0 is {0: 1} and all other entries cancel.
    """
    n = operator.n
    out = []
    for jprime in range(depth + 1):
        acc: dict[int, HomogeneousSymbol] = {}

        def add_to(p, d):
            if d.is_zero():
                return
            acc[p] = acc[p] + d if p in acc else d

        for p, d in qs[jprime].apply_ell_minus_z().items():
            add_to(p, d)
        for j1 in range(jprime + 1):
            for j2 in range(jprime + 1 - j1):
                k = jprime - j1 - j2
                if j1 == 0 and k == 0:
                    continue
                ell_comp = operator.component(j1)
                if ell_comp.is_zero() or qs[j2].is_zero():
                    continue
                for alpha in multiindices(n, k):
                    dl = ell_comp.dxi_multi(alpha)
                    if dl.is_zero():
                        continue
                    moved = qs[j2].dx_multi(alpha, operator)
                    factor = TWO_PI_I ** (-k) / multi_factorial(alpha)
                    for p, d in moved.powers.items():
                        add_to(p, (d * dl).scale(factor))
        out.append({p: d for p, d in acc.items() if not d.is_zero()})
    return out


def verify_parametrix(operator: EllipticOperator, qs: list[ResolventSymbol],
                      depth: int, samples: int = 100, seed: int = 7) -> dict:
    """Residual report for the defining relation of the parametrix.

    Checks symbolically that the order-0 component of the composition is 1
    and the higher components cancel, then evaluates the residual numerically
    at random (x, xi, z) with |xi| = 1 and |Im z| >= 1.
    """
    comps = compose_with_operator(operator, qs, depth)
    n = operator.n
    report = {"orders": len(comps)}

    unit = HomogeneousSymbol.radial(n, 0.0)
    defect = 0.0
    for p, d in comps[0].items():
        diff = d - unit if p == 0 else d
        defect = max(defect, diff.max_abs())
    for comp in comps[1:]:
        for d in comp.values():
            defect = max(defect, d.max_abs())
    report["symbolic_max"] = defect

    rng = np.random.default_rng(seed)
    x = rng.random((samples, n))
    xi = rng.normal(size=(samples, n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    z = (rng.uniform(-3.0, 3.0, samples)
         + 1j * np.where(rng.random(samples) < 0.5, -1.0, 1.0)
         * rng.uniform(1.0, 4.0, samples))
    ell = operator.principal.evaluate(x, xi)
    numeric = np.full(samples, -1.0 + 0j)
    for comp in comps:
        for p, d in sorted(comp.items()):
            numeric += d.evaluate(x, xi) * (ell - z) ** (-p)
    report["numeric_max"] = float(np.max(np.abs(numeric)))
    return report
