from __future__ import annotations

from typing import Sequence

from .nodes import (
    ONE,
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
    add,
    as_expr,
    div,
    mul,
    neg,
    power,
    sub,
)


def diff(e: Expr, var: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``var``."""
    if isinstance(var, Symbol):
        var = var.name
    e = as_expr(e)
    memo: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out = ZERO
        elif isinstance(node, Symbol):
            out = ONE if node.name == var else ZERO
        elif isinstance(node, Neg):
            out = neg(d(node.arg))
        elif isinstance(node, Add):
            out = add(d(node.left), d(node.right))
        elif isinstance(node, Sub):
            out = sub(d(node.left), d(node.right))
        elif isinstance(node, Mul):
            out = add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        elif isinstance(node, Div):
            num, den = node.left, node.right
            dnum, dden = d(num), d(den)
            out = sub(div(dnum, den), div(mul(num, dden), power(den, 2)))
        elif isinstance(node, Pow):
            c = node.exponent
            out = mul(mul(Const(c), power(node.base, c - 1)), d(node.base))
        elif isinstance(node, Exp):
            out = mul(node, d(node.arg))
        elif isinstance(node, Ln):
            out = div(d(node.arg), node.arg)
        else:  # pragma: no cover
            raise TypeError(f"cannot differentiate {type(node).__name__}")
        memo[node] = out
        return out

    return d(e)


def gradient(e: Expr, variables: Sequence[str]) -> tuple[Expr, ...]:
    return tuple(diff(e, v) for v in variables)


def directional_derivative(e: Expr, field: Sequence[Expr], variables: Sequence[str]) -> Expr:
    """``sum_i field_i * d e / d variables_i``."""
    total: Expr = ZERO
    for component, v in zip(field, variables):
        total = add(total, mul(component, diff(e, v)))
    return total
