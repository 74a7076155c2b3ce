"""Render expressions in the formula grammar accepted by ``parse``.

Output is re-parseable and reproduces the same tree for anything the parser
itself builds; right operands of left-associative operators are
parenthesised when they share the operator's precedence, except for
products nested on the right, which are printed flat.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .nodes import Add, Const, Div, Exp, Expr, Ln, Mul, Neg, Pow, Sub, Symbol

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def format_number(value) -> str:
    """Decimal literal without exponent notation (the grammar has none)."""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return np.format_float_positional(float(value), unique=True, trim="-")


def _const_precedence(value) -> int:
    if value < 0:
        return _NEG
    if isinstance(value, Fraction) and value.denominator != 1:
        return _MUL
    return _ATOM


def _precedence(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _ADD
    if isinstance(e, (Mul, Div)):
        return _MUL
    if isinstance(e, Neg):
        # "-a*b" reads as (-a)*b, which has the same value as -(a*b)
        return _MUL if _precedence(e.arg) == _MUL else _NEG
    if isinstance(e, Pow):
        return _POW
    if isinstance(e, Const):
        return _const_precedence(e.value)
    return _ATOM


def _render(e: Expr, memo: dict) -> str:
    hit = memo.get(e)
    if hit is not None:
        return hit

    def wrap(child, minimum):
        text = _render(child, memo)
        return f"({text})" if _precedence(child) < minimum else text

    if isinstance(e, Const):
        out = format_number(e.value)
    elif isinstance(e, Symbol):
        out = e.name
    elif isinstance(e, Exp):
        out = f"exp({_render(e.arg, memo)})"
    elif isinstance(e, Ln):
        out = f"ln({_render(e.arg, memo)})"
    elif isinstance(e, Neg):
        out = "-" + wrap(e.arg, _MUL)
    elif isinstance(e, Add):
        out = f"{wrap(e.left, _ADD)} + {wrap(e.right, _ADD + 1)}"
    elif isinstance(e, Sub):
        out = f"{wrap(e.left, _ADD)} - {wrap(e.right, _ADD + 1)}"
    elif isinstance(e, Mul):
        # a*(b*c) prints flat; the value differs from (a*b)*c only by rounding
        right = _MUL if isinstance(e.right, Mul) else _MUL + 1
        out = f"{wrap(e.left, _MUL)}*{wrap(e.right, right)}"
    elif isinstance(e, Div):
        out = f"{wrap(e.left, _MUL)}/{wrap(e.right, _MUL + 1)}"
    elif isinstance(e, Pow):
        exponent = e.exponent
        text = format_number(exponent)
        if _const_precedence(exponent) != _ATOM:
            text = f"({text})"
        out = f"{wrap(e.base, _ATOM)}^{text}"
    else:  # pragma: no cover
        raise TypeError(f"cannot print {type(e).__name__}")
    memo[e] = out
    return out


def to_string(e: Expr) -> str:
    return _render(e, {})
