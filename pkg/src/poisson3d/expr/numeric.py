"""Numeric evaluation: a reference scalar walker, a vectorised numpy walker
with validity masks, and a code generator for hot loops (ODE right-hand sides,
quadrature integrands)."""
from __future__ import annotations

import math
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ..errors import DomainError, UnboundSymbolError
from .nodes import Add, Const, Div, Exp, Expr, Ln, Mul, Neg, Pow, Sub, Symbol, is_integral


def evaluate(e: Expr, values: Mapping[str, float]) -> float:
    """Evaluate at one point; raises DomainError outside the real domain."""
    memo: dict[Expr, float] = {}

    def ev(node: Expr) -> float:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out = float(node.value)
        elif isinstance(node, Symbol):
            try:
                out = float(values[node.name])
            except KeyError:
                raise UnboundSymbolError(f"symbol {node.name!r} is not bound") from None
        elif isinstance(node, Neg):
            out = -ev(node.arg)
        elif isinstance(node, Add):
            out = ev(node.left) + ev(node.right)
        elif isinstance(node, Sub):
            out = ev(node.left) - ev(node.right)
        elif isinstance(node, Mul):
            out = ev(node.left) * ev(node.right)
        elif isinstance(node, Div):
            den = ev(node.right)
            if den == 0.0:
                raise DomainError("division by zero")
            out = ev(node.left) / den
        elif isinstance(node, Pow):
            base, c = ev(node.base), node.exponent
            if is_integral(c):
                if base == 0.0 and c < 0:
                    raise DomainError("zero raised to a negative power")
                try:
                    out = base ** int(c)
                except OverflowError:
                    raise DomainError("overflow in power") from None
            else:
                if base < 0.0 or (base == 0.0 and c < 0):
                    raise DomainError(f"non-integer power of {base!r}")
                try:
                    out = math.pow(base, float(c))
                except OverflowError:
                    raise DomainError("overflow in power") from None
        elif isinstance(node, Exp):
            try:
                out = math.exp(ev(node.arg))
            except OverflowError:
                raise DomainError("overflow in exp") from None
        elif isinstance(node, Ln):
            arg = ev(node.arg)
            if arg <= 0.0:
                raise DomainError(f"ln of non-positive value {arg!r}")
            out = math.log(arg)
        else:  # pragma: no cover
            raise TypeError(type(node).__name__)
        if not math.isfinite(out):
            raise DomainError("non-finite intermediate value")
        memo[node] = out
        return out

    return ev(e)


def evaluate_array(
    e: Expr, env: Mapping[str, object], guard: Optional[float] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised evaluation over arrays of points.

    Returns ``(values, ok)``.  ``ok`` is False wherever some subexpression is
    undefined, non-finite, or (with ``guard``) larger than ``guard`` in
    magnitude; ``values`` there is unspecified.
    """
    arrays = {k: np.asarray(v, dtype=float) for k, v in env.items()}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    memo: dict[Expr, tuple[np.ndarray, np.ndarray]] = {}

    def ev(node: Expr):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            val = np.full(shape, float(node.value))
            ok = np.ones(shape, dtype=bool)
        elif isinstance(node, Symbol):
            if node.name not in arrays:
                raise UnboundSymbolError(f"symbol {node.name!r} is not bound")
            val = np.broadcast_to(arrays[node.name], shape).astype(float)
            ok = np.isfinite(val)
        elif isinstance(node, (Neg, Exp, Ln, Pow)):
            a, ok = ev(node.children[0])
            if isinstance(node, Neg):
                val = -a
            elif isinstance(node, Exp):
                val = np.exp(a)
            elif isinstance(node, Ln):
                good = a > 0
                ok = ok & good
                val = np.log(np.where(good, a, 1.0))
            else:
                c = node.exponent
                if is_integral(c):
                    k = int(c)
                    if k < 0:
                        good = a != 0
                        ok = ok & good
                        val = np.power(np.where(good, a, 1.0), float(k))
                    else:
                        val = np.power(a, k)
                else:
                    good = (a > 0) | ((a == 0) & (c > 0))
                    ok = ok & good
                    val = np.power(np.where(good, a, 1.0), float(c))
        else:
            a, ok_a = ev(node.left)
            b, ok_b = ev(node.right)
            ok = ok_a & ok_b
            if isinstance(node, Add):
                val = a + b
            elif isinstance(node, Sub):
                val = a - b
            elif isinstance(node, Mul):
                val = a * b
            else:
                good = b != 0
                ok = ok & good
                val = a / np.where(good, b, 1.0)
        ok = ok & np.isfinite(val)
        if guard is not None:
            ok = ok & (np.abs(val) <= guard)
        memo[node] = (val, ok)
        return val, ok

    with np.errstate(all="ignore"):
        return ev(e)


_MATH_NAMESPACE = {"exp": math.exp, "log": math.log, "pow": math.pow, "isfinite": math.isfinite}


def lambdify(
    exprs: Sequence[Expr],
    args: Sequence[str],
    params: Optional[Mapping[str, float]] = None,
) -> Callable[..., tuple[float, ...]]:
    """Compile expressions into one Python function of ``args``.

    Parameters are baked in as constants.  Shared subtrees are computed once.
    The function raises DomainError where ``evaluate`` would.
    """
    params = dict(params or {})
    lines: list[str] = []
    names: dict[Expr, str] = {}
    arg_names = {a: f"a{i}" for i, a in enumerate(args)}

    def emit(node: Expr) -> str:
        hit = names.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            return repr(float(node.value))
        if isinstance(node, Symbol):
            if node.name in arg_names:
                return arg_names[node.name]
            if node.name in params:
                return repr(float(params[node.name]))
            raise UnboundSymbolError(f"symbol {node.name!r} is not bound")
        if isinstance(node, Neg):
            code = f"-{emit(node.arg)}"
        elif isinstance(node, Exp):
            code = f"exp({emit(node.arg)})"
        elif isinstance(node, Ln):
            code = f"log({emit(node.arg)})"
        elif isinstance(node, Pow):
            c = node.exponent
            base = emit(node.base)
            code = f"({base}) ** {int(c)}" if is_integral(c) else f"pow({base}, {float(c)!r})"
        else:
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
            code = f"{emit(node.left)} {op} {emit(node.right)}"
        name = f"t{len(names)}"
        lines.append(f"        {name} = {code}")
        names[node] = name
        return name

    outputs = [emit(e) for e in exprs]
    signature = ", ".join(arg_names[a] for a in args)
    body = "\n".join(lines) if lines else "        pass"
    result = ", ".join(outputs) + ("," if len(outputs) == 1 else "")
    source = (
        f"def _compiled({signature}):\n"
        f"    try:\n{body}\n"
        f"    except (ValueError, ZeroDivisionError, OverflowError) as exc:\n"
        f"        raise DomainError(str(exc)) from None\n"
        f"    out = ({result})\n"
        f"    for value in out:\n"
        f"        if not isfinite(value):\n"
        f"            raise DomainError('non-finite value')\n"
        f"    return out\n"
    )
    namespace = dict(_MATH_NAMESPACE, DomainError=DomainError)
    exec(compile(source, "<lambdify>", "exec"), namespace)
    fn = namespace["_compiled"]
    fn.source = source
    return fn
