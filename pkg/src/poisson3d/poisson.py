"""3D Poisson structures stored as the entry triple (u, v, w) = (J12, J31, J23).

Skew-symmetry is structural: the full matrix is always assembled from the
triple, so it cannot be violated.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .expr import (
    VARIABLES,
    ZERO,
    Domain,
    Expr,
    as_expr,
    diff,
    evaluate,
    parse,
    to_string,
)
from .expr.nodes import add, mul, neg, sub
from .verify import DEFAULT_CONFIG, SamplingConfig, VerificationReport, check_identities


@dataclass(frozen=True)
class StructureMatrix:
    u: Expr
    v: Expr
    w: Expr
    domain: Domain = field(default_factory=lambda: Domain.box(-1.0, 1.0))
    params: Mapping[str, float] = field(default_factory=dict)
    param_ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    variables: tuple[str, str, str] = VARIABLES
    name: str = ""
    verified: bool = False

    def __post_init__(self):
        for attr in ("u", "v", "w"):
            object.__setattr__(self, attr, as_expr(getattr(self, attr)))
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "param_ranges", {k: tuple(v) for k, v in self.param_ranges.items()})
        object.__setattr__(self, "variables", tuple(self.variables))

    @classmethod
    def from_strings(cls, u: str, v: str, w: str, **kwargs) -> "StructureMatrix":
        return cls(parse(u), parse(v), parse(w), **kwargs)

    @property
    def entries(self) -> tuple[Expr, Expr, Expr]:
        return (self.u, self.v, self.w)

    def matrix(self) -> list[list[Expr]]:
        u, v, w = self.u, self.v, self.w
        return [
            [ZERO, u, neg(v)],
            [neg(u), ZERO, w],
            [v, neg(w), ZERO],
        ]

    def entry(self, i: int, j: int) -> Expr:
        """J_ij with 1-based indices."""
        return self.matrix()[i - 1][j - 1]

    def with_entries(self, u, v, w, **changes) -> "StructureMatrix":
        return replace(self, u=as_expr(u), v=as_expr(v), w=as_expr(w), verified=False, **changes)

    def numeric_entries(self, point: Sequence[float], params: Optional[Mapping[str, float]] = None):
        values = dict(self.params)
        values.update(params or {})
        values.update(zip(self.variables, point))
        return tuple(evaluate(e, values) for e in self.entries)

    def __str__(self):
        return "{" + ", ".join(to_string(e) for e in self.entries) + "}"


@dataclass(frozen=True)
class VectorFieldExpr:
    components: tuple[Expr, Expr, Expr]
    variables: tuple[str, str, str] = VARIABLES

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __str__(self):
        return "(" + ", ".join(to_string(c) for c in self.components) + ")"


def jacobi_residual(S: StructureMatrix) -> Expr:
    """u d1v - v d1u + w d2u - u d2w + v d3w - w d3v, unsimplified."""
    u, v, w = S.entries
    a, b, c = S.variables
    terms = [
        mul(u, diff(v, a)),
        neg(mul(v, diff(u, a))),
        mul(w, diff(u, b)),
        neg(mul(u, diff(w, b))),
        mul(v, diff(w, c)),
        neg(mul(w, diff(v, c))),
    ]
    total = terms[0]
    for t in terms[1:]:
        total = add(total, t)
    return total


def bracket(f, g, S: StructureMatrix) -> Expr:
    """sum_ij d_i f J_ij d_j g."""
    f, g = as_expr(f), as_expr(g)
    J = S.matrix()
    df = [diff(f, v) for v in S.variables]
    dg = [diff(g, v) for v in S.variables]
    total: Expr = ZERO
    for i in range(3):
        for j in range(3):
            total = add(total, mul(mul(df[i], J[i][j]), dg[j]))
    return total


def is_casimir(C, S: StructureMatrix, cfg: SamplingConfig = DEFAULT_CONFIG) -> VerificationReport:
    """Zero verdict iff {C, x_i} vanishes on the domain for i = 1, 2, 3."""
    C = as_expr(C)
    brackets = [bracket(C, v, S) for v in S.variables]
    return check_identities(
        brackets,
        S.domain,
        cfg,
        variables=S.variables,
        params=S.params,
        param_ranges=S.param_ranges,
        label=f"casimir {to_string(C)}",
    )


def hamiltonian_vector_field(S: StructureMatrix, H) -> VectorFieldExpr:
    """Component i is sum_j J_ij d_j H."""
    H = as_expr(H)
    J = S.matrix()
    grad = [diff(H, v) for v in S.variables]
    comps = []
    for i in range(3):
        total: Expr = ZERO
        for j in range(3):
            total = add(total, mul(J[i][j], grad[j]))
        comps.append(total)
    return VectorFieldExpr(tuple(comps), S.variables)


def rank_at(
    S: StructureMatrix,
    point: Sequence[float],
    tol: float = 1e-12,
    params: Optional[Mapping[str, float]] = None,
    warn: bool = False,
) -> int:
    """Rank (0 or 2) of the skew matrix at ``point``."""
    entries = S.numeric_entries(point, params)
    rank = 2 if max(abs(e) for e in entries) > tol else 0
    if warn and rank == 0:
        warnings.warn(f"structure {S.name or S} has rank 0 at {tuple(point)}", RuntimeWarning, stacklevel=2)
    return rank


def general_jacobi_residual(S: StructureMatrix, i: int, j: int, k: int) -> Expr:
    """The n-dimensional Jacobi expression for indices (i, j, k), 1-based.

    sum_l ( J_li d_l J_jk + J_lj d_l J_ki + J_lk d_l J_ij ).
    """
    J = S.matrix()
    i, j, k = i - 1, j - 1, k - 1
    total: Expr = ZERO
    for l, var in enumerate(S.variables):
        total = add(total, mul(J[l][i], diff(J[j][k], var)))
        total = add(total, mul(J[l][j], diff(J[k][i], var)))
        total = add(total, mul(J[l][k], diff(J[i][j], var)))
    return total


def difference(S: StructureMatrix, T: StructureMatrix) -> tuple[Expr, Expr, Expr]:
    return tuple(sub(a, b) for a, b in zip(S.entries, T.entries))
