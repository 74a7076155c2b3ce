"""Minimal symbolic expression engine over x1, x2, x3, reserved auxiliary
symbols (k1..k3, y1..y3) and named real parameters."""
from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .calculus import diff, directional_derivative, gradient
from .domain import Domain
from .nodes import (
    GENERATOR_SYMBOLS,
    ONE,
    RESERVED,
    TRANSFORMED,
    VARIABLES,
    ZERO,
    Add,
    Const,
    Div,
    Exp,
    Expr,
    Ln,
    Mul,
    Neg,
    Pow,
    Sub,
    Symbol,
    as_expr,
    const,
    constant_value,
    count_nodes,
    exp,
    free_symbols,
    ln,
    power,
    simplify,
    subs,
    sum_exprs,
    sym,
)
from .numeric import evaluate, evaluate_array, lambdify
from .parser import parse, tokenize
from .printer import format_number, to_string

x1, x2, x3 = (Symbol(v) for v in VARIABLES)
k1, k2, k3 = (Symbol(v) for v in GENERATOR_SYMBOLS)
y1, y2, y3 = (Symbol(v) for v in TRANSFORMED)


def is_zero_on(
    e,
    domain: Domain,
    n: int = 1000,
    seed: int = 42,
    tol: float = 1e-9,
    variables: Sequence[str] = VARIABLES,
    params: Optional[Mapping[str, float]] = None,
    param_ranges=None,
    guard: float = 1e6,
):
    """Sampling verdict on whether ``e`` vanishes identically on ``domain``.

    Returns a VerificationReport; its ``witness`` is set when the verdict is
    NonZero.
    """
    from ..verify import SamplingConfig, check_identities

    cfg = SamplingConfig(n_points=n, seed=seed, tol=tol, guard=guard)
    return check_identities(as_expr(e), domain, cfg, variables, params, param_ranges)


__all__ = [
    "Add", "Const", "Div", "Domain", "Exp", "Expr", "GENERATOR_SYMBOLS", "Ln", "Mul", "Neg",
    "ONE", "Pow", "RESERVED", "Sub", "Symbol", "TRANSFORMED", "VARIABLES", "ZERO", "as_expr",
    "const", "constant_value", "count_nodes", "diff", "directional_derivative", "evaluate",
    "evaluate_array", "exp", "format_number", "free_symbols", "gradient", "is_zero_on",
    "k1", "k2", "k3", "lambdify", "ln", "parse", "power", "simplify", "subs", "sum_exprs",
    "sym", "to_string", "tokenize", "x1", "x2", "x3", "y1", "y2", "y3",
]
