"""New solutions from a known one.

Adding the same function xi to all three entries of a known solution turns
the Jacobi equation into a linear first-order PDE for xi,

    (u0 - v0) d1 xi + (w0 - u0) d2 xi + (v0 - w0) d3 xi = lambda * xi,
    lambda = d1(u0 - v0) + d2(w0 - u0) + d3(v0 - w0),

whose characteristics always conserve x1 + x2 + x3 and every Casimir of the
known solution.  When lambda vanishes, any function of those two invariants
is a solution (``case1_family``).  Otherwise one can move to coordinates where
the transformed structure has lambda = 0, build the family there and pull it
back (``case3_family``); the pulled-back perturbation is then scaled by
per-entry multipliers instead of being the same in all three entries.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from ..errors import PreconditionError
from ..expr import (
    GENERATOR_SYMBOLS,
    ONE,
    RESERVED,
    ZERO,
    Expr,
    as_expr,
    diff,
    free_symbols,
    subs,
    sum_exprs,
    to_string,
)
from ..expr.nodes import add, mul, sub
from ..poisson import StructureMatrix, VectorFieldExpr, bracket, is_casimir
from ..transform import Diffeomorphism, compose, congruence, jacobian, pushforward_source, require_diffeomorphism
from ..verify import DEFAULT_CONFIG, SamplingConfig, VerificationReport, check_identities, check_jacobi

# the constant skew matrix with A12 = A31 = A23 = 1
SKEW_ONES = [
    [ZERO, ONE, -ONE],
    [-ONE, ZERO, ONE],
    [ONE, -ONE, ZERO],
]


class Case(str, enum.Enum):
    CASE_I = "I"
    CASE_II_OR_III = "II_or_III"

    def __str__(self):
        return self.value


def lambda_of(S: StructureMatrix) -> Expr:
    u, v, w = S.entries
    a, b, c = S.variables
    return add(add(diff(sub(u, v), a), diff(sub(w, u), b)), diff(sub(v, w), c))


def characteristic_field(S: StructureMatrix) -> VectorFieldExpr:
    u, v, w = S.entries
    return VectorFieldExpr((sub(u, v), sub(w, u), sub(v, w)), S.variables)


def pde_residual(S: StructureMatrix, xi) -> Expr:
    """Left side minus right side of the linear PDE for ``xi``."""
    xi = as_expr(xi)
    field_ = characteristic_field(S)
    lhs = sum_exprs(mul(c, diff(xi, v)) for c, v in zip(field_, S.variables))
    return sub(lhs, mul(lambda_of(S), xi))


def _check(S: StructureMatrix, exprs, cfg: SamplingConfig, label: str) -> VerificationReport:
    return check_identities(exprs, S.domain, cfg, S.variables, S.params, S.param_ranges, label=label)


def lambda_report(S: StructureMatrix, cfg: SamplingConfig = DEFAULT_CONFIG) -> VerificationReport:
    return _check(S, lambda_of(S), cfg, "lambda")


def classify_case(S: StructureMatrix, cfg: SamplingConfig = DEFAULT_CONFIG) -> Case:
    """Case I iff lambda vanishes on the domain.

    Cases II and III differ only in whether the caller can eliminate two
    coordinates through the invariants, so they are reported together.
    """
    return Case.CASE_I if lambda_report(S, cfg).ok else Case.CASE_II_OR_III


def check_pde(S: StructureMatrix, xi, cfg: SamplingConfig = DEFAULT_CONFIG) -> VerificationReport:
    return _check(S, pde_residual(S, xi), cfg, f"pde xi = {to_string(as_expr(xi))}")


@dataclass(frozen=True)
class SolutionFamily:
    """base + psi(K1, K2) * multipliers, with psi a formula in k1, k2.

    ``materialize`` substitutes k1 <- K1(x), k2 <- K2(x).  ``K3`` optionally
    holds a third invariant (a Quadrature) for Case II bookkeeping.
    """

    base: StructureMatrix
    K1: Expr
    K2: Expr
    psi: Expr = ZERO
    multipliers: tuple[Expr, Expr, Expr] = (ONE, ONE, ONE)
    K3: Optional[object] = None
    kind: str = "case1"
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "K1", as_expr(self.K1))
        object.__setattr__(self, "K2", as_expr(self.K2))
        object.__setattr__(self, "psi", as_expr(self.psi))
        object.__setattr__(self, "multipliers", tuple(as_expr(m) for m in self.multipliers))

    def generator(self, psi=None) -> Expr:
        """psi(K1(x), K2(x)) as an expression in the base variables."""
        psi = self.psi if psi is None else as_expr(psi)
        stray = {s for s in free_symbols(psi) if s in RESERVED and s not in GENERATOR_SYMBOLS[:2]}
        if stray:
            raise ValueError(f"psi may only use k1, k2 and parameters; found {sorted(stray)}")
        return subs(psi, {"k1": self.K1, "k2": self.K2})

    def materialize(self, psi=None) -> StructureMatrix:
        g = self.generator(psi)
        entries = [add(e, mul(g, m)) for e, m in zip(self.base.entries, self.multipliers)]
        label = to_string(self.psi if psi is None else as_expr(psi))
        return self.base.with_entries(*entries, name=f"{self.base.name}[psi={label}]")

    def with_multipliers(self, multipliers) -> "SolutionFamily":
        return SolutionFamily(self.base, self.K1, self.K2, self.psi, tuple(multipliers), self.K3, self.kind, self.notes)

    def describe(self) -> str:
        mult = ", ".join(to_string(m) for m in self.multipliers)
        return f"{self.base} + psi({to_string(self.K1)}, {to_string(self.K2)}) * {{{mult}}}"


def _require(report: VerificationReport, message: str):
    if not report.ok:
        raise PreconditionError(f"{message}: {report.summary()}", report)


def case1_family(
    S: StructureMatrix,
    casimir,
    psi=ZERO,
    cfg: SamplingConfig = DEFAULT_CONFIG,
    verify_result: bool = True,
) -> SolutionFamily:
    """Family S + psi(x1 + x2 + x3, C) {1, 1, 1} for a structure with lambda = 0."""
    _require(lambda_report(S, cfg), "lambda is not identically zero, Case I does not apply")
    casimir = as_expr(casimir)
    _require(is_casimir(casimir, S, cfg), f"{to_string(casimir)} is not a Casimir of the base structure")
    K1 = sum_exprs(as_expr(v) for v in S.variables)
    family = SolutionFamily(S, K1, casimir, psi, kind="case1")
    if verify_result:
        _require(check_jacobi(family.materialize(), cfg), "materialised family fails the Jacobi identity")
    return family


def case3_family(
    S: StructureMatrix,
    phi: Diffeomorphism,
    target: StructureMatrix,
    casimir_y,
    psi=ZERO,
    cfg: SamplingConfig = DEFAULT_CONFIG,
    match_tol: float = 1e-8,
    verify_result: bool = True,
) -> SolutionFamily:
    """Family built in the coordinates y = phi(x) where ``target`` has lambda = 0,
    then pulled back: S + psi(K1, K2) {M12, M31, M23} with

        K1 = (y1 + y2 + y3)(x),   K2 = casimir_y(y(x)),
        M_ij = sum_kl (dx_i/dy_k) A_kl (dx_j/dy_l),

    A being the constant skew matrix with A12 = A31 = A23 = 1.
    """
    domain = S.domain.intersect(phi.domain)
    require_diffeomorphism(phi, domain, cfg, S.params)
    checked = S if domain == S.domain else StructureMatrix(
        *S.entries, domain=domain, params=S.params, param_ranges=S.param_ranges, variables=S.variables, name=S.name
    )

    def on_x(exprs, tol, label):
        return _check(checked, [compose(e, phi) for e in exprs], cfg.replace(tol=tol), label)

    pushed = pushforward_source(S, phi)
    mismatch = [sub(p, compose(t, phi)) for p, t in zip(pushed, target.entries)]
    _require(_check(checked, mismatch, cfg.replace(tol=match_tol), "pushforward vs target"),
             "pushforward of the base structure does not match the target")
    _require(on_x([lambda_of(target)], cfg.tol, "target lambda"),
             "target structure has non-zero lambda")
    casimir_y = as_expr(casimir_y)
    brackets = [bracket(casimir_y, v, target) for v in target.variables]
    _require(on_x(brackets, cfg.tol, "target casimir"),
             f"{to_string(casimir_y)} is not a Casimir of the target structure")

    K1 = compose(sum_exprs(as_expr(v) for v in target.variables), phi)
    K2 = compose(casimir_y, phi)
    M = congruence(jacobian(phi, "inverse"), SKEW_ONES)
    multipliers = tuple(compose(m, phi) for m in (M[0][1], M[2][0], M[1][2]))
    family = SolutionFamily(checked, K1, K2, psi, multipliers, kind="case3",
                            notes={"diffeomorphism": phi, "target": target, "casimir_y": casimir_y})
    if verify_result:
        _require(check_jacobi(family.materialize(), cfg), "materialised family fails the Jacobi identity")
    return family


class LVExponents(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    sign: int


def _tidy(value: float) -> Union[int, Fraction, float]:
    """Exact int or small-denominator fraction when ``value`` is one to rounding."""
    close = Fraction(value).limit_denominator(1000)
    if abs(float(close) - value) > 1e-15 * max(1.0, abs(value)):
        return value
    return int(close) if close.denominator == 1 else close


def lv_exponents(a12: float, a31: float, a23: float) -> LVExponents:
    """Exponents of y = (x1^alpha, x2^beta, x3^gamma) mapping the Lotka-Volterra
    structure {a12 x1x2, a31 x1x3, a23 x2x3} to s {y1y2, y1y3, y2y3}.

    Solves a12 alpha beta = a31 alpha gamma = a23 beta gamma = s with
    s = sign(a12 a31 a23), taking the positive root alpha beta gamma =
    1 / sqrt|a12 a31 a23|.  The negated triple is the other solution.
    """
    if 0 in (a12, a31, a23):
        raise ValueError("all Lotka-Volterra coefficients must be non-zero")
    s = 1 if a12 * a31 * a23 > 0 else -1
    p = 1.0 / math.sqrt(abs(a12 * a31 * a23))
    return LVExponents(_tidy(p * a23 * s), _tidy(p * a31 * s), _tidy(p * a12 * s), s)
