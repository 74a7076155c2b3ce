"""Third invariant by quadrature when lambda does not vanish.

With two coordinates eliminated through K1 and K2, the characteristic
system reduces along a chosen pivot coordinate p to

    d xi / xi = kappa(p, k1, k2) dp,   kappa = lambda / c_p,

where c_p is the pivot's component of the characteristic field.  Hence
K3 = xi / H with H = exp(int kappa dp).  The lower limit of the integral is
an arbitrary function of (k1, k2) (the ``anchor``); changing it rescales K3 by
a constant on each level set of (K1, K2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

from ..errors import PreconditionError, QuadratureError, SingularDenominatorError
from ..expr import Expr, as_expr, lambdify, subs, to_string
from ..expr.nodes import div, sub
from ..poisson import StructureMatrix
from ..verify import DEFAULT_CONFIG, SamplingConfig, VerificationReport, check_identities
from .core import characteristic_field, lambda_of

Anchor = Union[None, float, Callable[[float, float], float]]


def _others(S: StructureMatrix, pivot: str) -> tuple[str, str]:
    if pivot not in S.variables:
        raise ValueError(f"pivot {pivot!r} is not one of {S.variables}")
    return tuple(v for v in S.variables if v != pivot)


def verify_elimination(
    S: StructureMatrix,
    K1,
    K2,
    pivot: str,
    alpha,
    beta,
    cfg: SamplingConfig = DEFAULT_CONFIG,
) -> VerificationReport:
    """Check that alpha(pivot, k1, k2) and beta(pivot, k1, k2) give back the two
    non-pivot coordinates (in increasing index order) once k1 <- K1(x) and
    k2 <- K2(x)."""
    first, second = _others(S, pivot)
    table = {"k1": as_expr(K1), "k2": as_expr(K2)}
    residuals = [
        sub(subs(as_expr(alpha), table), as_expr(first)),
        sub(subs(as_expr(beta), table), as_expr(second)),
    ]
    return check_identities(
        residuals, S.domain, cfg, S.variables, S.params, S.param_ranges, label=f"elimination on {pivot}"
    )


def simpson(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-8,
            start: int = 8, max_panels: int = 1 << 18) -> float:
    """Composite Simpson rule, doubling the panel count until two successive
    estimates agree to ``rtol`` (relative to max(1, |estimate|))."""
    if a == b:
        return 0.0
    n = start
    h = (b - a) / n
    ends = f(a) + f(b)
    odd = sum(f(a + i * h) for i in range(1, n, 2))
    even = sum(f(a + i * h) for i in range(2, n, 2))
    estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    while n < max_panels:
        n *= 2
        h = (b - a) / n
        even += odd
        odd = sum(f(a + i * h) for i in range(1, n, 2))
        refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        if abs(refined - estimate) <= rtol * max(1.0, abs(refined)):
            return refined
        estimate = refined
    raise QuadratureError(f"Simpson rule did not converge on [{a}, {b}] with {max_panels} panels")


@dataclass
class Quadrature:
    S: StructureMatrix
    K1: Expr
    K2: Expr
    pivot: str
    numerator: Expr
    denominator: Expr
    anchor: Anchor
    params: dict
    rtol: float = 1e-8
    guard: float = 1e-8

    def __post_init__(self):
        self._kappa = lambdify([self.numerator, self.denominator], [self.pivot, "k1", "k2"], self.params)
        self._invariants = lambdify([self.K1, self.K2], list(self.S.variables), self.params)
        self._index = list(self.S.variables).index(self.pivot)

    @property
    def kappa(self) -> Expr:
        return div(self.numerator, self.denominator)

    def anchor_for(self, k1: float, k2: float) -> float:
        if callable(self.anchor):
            return float(self.anchor(k1, k2))
        if self.anchor is None:
            i = self._index
            return 0.5 * (self.S.domain.lower[i] + self.S.domain.upper[i])
        return float(self.anchor)

    def integrand(self, p: float, k1: float, k2: float) -> float:
        num, den = self._kappa(p, k1, k2)
        if abs(den) < self.guard:
            raise SingularDenominatorError(
                f"characteristic component for {self.pivot} is {den:.3e} at {self.pivot}={p:.6g} "
                f"(k1={k1:.6g}, k2={k2:.6g}), below guard {self.guard:g}"
            )
        return num / den

    def log_h(self, p: float, k1: float, k2: float) -> float:
        p0 = self.anchor_for(k1, k2)
        return simpson(lambda s: self.integrand(s, k1, k2), p0, p, self.rtol)

    def h(self, p: float, k1: float, k2: float) -> float:
        """H(p, k1, k2) = exp(int_{anchor}^{p} kappa)."""
        return math.exp(self.log_h(p, k1, k2))

    def invariants(self, point: Sequence[float]) -> tuple[float, float]:
        return self._invariants(*point)

    def k3(self, point: Sequence[float], xi: float) -> float:
        k1, k2 = self.invariants(point)
        return xi / self.h(point[self._index], k1, k2)

    def xi_branch(self, g: Union[Expr, str, Callable[[float, float], float]]) -> Callable[[Sequence[float]], float]:
        """Explicit solution xi(x) = H(p, K1, K2) * g(K1, K2)."""
        if callable(g) and not isinstance(g, Expr):
            g_fn = g
        else:
            compiled = lambdify([as_expr(g)], ["k1", "k2"], self.params)
            g_fn = lambda k1, k2: compiled(k1, k2)[0]  # noqa: E731

        def xi(point):
            k1, k2 = self.invariants(point)
            return self.h(point[self._index], k1, k2) * g_fn(k1, k2)

        return xi


def quadrature_K3(
    S: StructureMatrix,
    K1,
    K2,
    pivot: str,
    alpha,
    beta,
    anchor: Anchor = None,
    cfg: SamplingConfig = DEFAULT_CONFIG,
    params: Optional[Mapping[str, float]] = None,
    rtol: float = 1e-8,
    guard: float = 1e-8,
    check: bool = True,
) -> Quadrature:
    """Set up the third invariant K3 = xi / H(pivot, K1, K2).

    ``alpha`` and ``beta`` express the two non-pivot coordinates (increasing
    index order) through the pivot, k1 and k2; they are verified first unless
    ``check`` is False.
    """
    K1, K2, alpha, beta = (as_expr(e) for e in (K1, K2, alpha, beta))
    if check:
        report = verify_elimination(S, K1, K2, pivot, alpha, beta, cfg)
        if not report.ok:
            raise PreconditionError(f"elimination is inconsistent: {report.summary()}", report)
    first, second = _others(S, pivot)
    index = list(S.variables).index(pivot)
    component = characteristic_field(S)[index]
    table = {first: alpha, second: beta}
    numerator = subs(lambda_of(S), table)
    denominator = subs(component, table)
    values = dict(S.params)
    values.update(params or {})
    return Quadrature(S, K1, K2, pivot, numerator, denominator, anchor, values, rtol, guard)


def describe(q: Quadrature) -> str:
    return f"kappa({q.pivot}, k1, k2) = {to_string(q.kappa)}"
