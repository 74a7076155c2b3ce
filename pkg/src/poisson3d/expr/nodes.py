"""Immutable expression trees with light, local simplification.

Nodes are hash-consed by structure: two trees built the same way compare
equal and hash equal, which lets evaluators and the differentiator memoize on
nodes directly.  The smart constructors (``add``, ``mul`` ...) apply only
cheap local rewrites; ``simplify`` additionally cancels like terms in flat
sums.  Whether an expression is identically zero is never decided here.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

Number = Union[int, float, Fraction]

VARIABLES = ("x1", "x2", "x3")
GENERATOR_SYMBOLS = ("k1", "k2", "k3")
TRANSFORMED = ("y1", "y2", "y3")
RESERVED = VARIABLES + GENERATOR_SYMBOLS + TRANSFORMED
FUNCTIONS = ("exp", "ln")


def _normalize(value) -> Number:
    if isinstance(value, bool):
        raise TypeError("booleans are not expression constants")
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, int):
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    return value


def is_integral(value: Number) -> bool:
    if isinstance(value, int):
        return True
    if isinstance(value, Fraction):
        return value.denominator == 1
    return float(value).is_integer()


class Expr:
    __slots__ = ("_key", "_hash")

    def __init__(self, key):
        self._key = key
        self._hash = hash(key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return self._key == other._key

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __repr__(self):
        return f"Expr({str(self)!r})"

    @property
    def children(self) -> tuple["Expr", ...]:
        return ()

    # arithmetic sugar; everything goes through the smart constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return neg(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        value = _normalize(value)
        self.value = value
        super().__init__(("const", value))

    def is_zero(self):
        return self.value == 0

    def is_one(self):
        return self.value == 1


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        super().__init__(("sym", name))

    @property
    def is_variable(self) -> bool:
        return self.name in RESERVED

    @property
    def is_parameter(self) -> bool:
        return self.name not in RESERVED


class Unary(Expr):
    __slots__ = ("arg",)
    tag = ""

    def __init__(self, arg: Expr):
        self.arg = arg
        super().__init__((self.tag, arg))

    @property
    def children(self):
        return (self.arg,)


class Neg(Unary):
    __slots__ = ()
    tag = "neg"


class Exp(Unary):
    __slots__ = ()
    tag = "exp"


class Ln(Unary):
    __slots__ = ()
    tag = "ln"


class Binary(Expr):
    __slots__ = ("left", "right")
    tag = ""

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right
        super().__init__((self.tag, left, right))

    @property
    def children(self):
        return (self.left, self.right)


class Add(Binary):
    __slots__ = ()
    tag = "add"


class Sub(Binary):
    __slots__ = ()
    tag = "sub"


class Mul(Binary):
    __slots__ = ()
    tag = "mul"


class Div(Binary):
    __slots__ = ()
    tag = "div"


class Pow(Expr):
    """``base ^ exponent`` with a real constant exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent):
        self.base = base
        self.exponent = _normalize(exponent)
        super().__init__(("pow", base, self.exponent))

    @property
    def children(self):
        return (self.base,)


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    return Const(value)


def sym(name: str) -> Symbol:
    return Symbol(name)


def const(value) -> Const:
    return Const(value)


def _is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold_div(a: Number, b: Number) -> Number:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return float(a) / float(b)


def _fold_pow(base: Number, exponent: Number):
    """Exact power of constants, or None when undefined over the reals."""
    if is_integral(exponent):
        k = int(exponent)
        if base == 0 and k < 0:
            return None
        if isinstance(base, (int, Fraction)):
            return Fraction(base) ** k
        return float(base) ** k
    if base < 0 or (base == 0 and exponent < 0):
        return None
    return math.pow(float(base), float(exponent))


# --- smart constructors ---------------------------------------------------


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _negated(e: Expr):
    """``e`` without its leading minus sign, or None when it has none."""
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Mul):
        inner = _negated(e.left)
        if inner is not None:
            return mul(inner, e.right)
    if isinstance(e, Const) and e.value < 0:
        return Const(-e.value)
    return None


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    positive = _negated(b)
    if positive is not None:
        return sub(a, positive)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if a == b:
        return ZERO
    positive = _negated(b)
    if positive is not None:
        return add(a, positive)
    return Sub(a, b)


def _coefficient(e: Expr):
    """(c, rest) for ``c*rest``, (c, None) for a bare constant, (None, e) otherwise."""
    if isinstance(e, Const):
        return e.value, None
    if isinstance(e, Mul) and isinstance(e.left, Const):
        return e.left.value, e.right
    return None, e


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return neg(b)
    if _is_const(b, -1):
        return neg(a)
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    # gather numeric coefficients at the front: (2*x)*(3*y) -> 6*(x*y)
    ca, ra = _coefficient(a)
    cb, rb = _coefficient(b)
    if ra is None and cb is not None and rb is not None:
        return mul(Const(ca * cb), rb)
    if ra is not None and rb is not None and (ca is not None or cb is not None):
        c = (1 if ca is None else ca) * (1 if cb is None else cb)
        return mul(Const(c), mul(ra, rb))
    if isinstance(a, Div) and isinstance(b, Div):
        return div(mul(a.left, b.left), mul(a.right, b.right))
    if isinstance(b, Div):
        return div(mul(a, b.left), b.right)
    if isinstance(a, Div):
        return div(mul(a.left, b), a.right)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and b.value == 0:
        return Div(a, b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_fold_div(a.value, b.value))
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    if _is_const(b, -1):
        return neg(a)
    if a == b:
        return ONE
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    if isinstance(b, Neg):
        return neg(div(a, b.arg))
    if isinstance(a, Div):
        return div(a.left, mul(a.right, b))
    if isinstance(b, Div):
        return div(mul(a, b.right), b.left)
    return Div(a, b)


def power(base: Expr, exponent) -> Expr:
    if isinstance(exponent, Expr):
        if not isinstance(exponent, Const):
            raise TypeError("exponents must be real constants")
        exponent = exponent.value
    exponent = _normalize(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        folded = _fold_pow(base.value, exponent)
        if folded is not None:
            return Const(folded)
    # (b^p)^q = b^(pq) unless p is an integer and q is not: (x^2)^(1/2) is |x|
    if isinstance(base, Pow) and (is_integral(exponent) or not is_integral(base.exponent)):
        return power(base.base, _normalize(base.exponent * exponent))
    return Pow(base, exponent)


def exp(a: Expr) -> Expr:
    if _is_const(a, 0):
        return ONE
    if isinstance(a, Const):
        try:
            return Const(math.exp(a.value))
        except OverflowError:
            pass
    # exp(ln g) is left alone: it equals g only where g > 0
    return Exp(a)


def ln(a: Expr) -> Expr:
    if _is_const(a, 1):
        return ZERO
    if isinstance(a, Exp):
        return a.arg
    if isinstance(a, Const) and a.value > 0:
        return Const(math.log(a.value))
    return Ln(a)


def rebuild(e: Expr, children: tuple[Expr, ...]) -> Expr:
    """Reassemble ``e`` from new children using the smart constructors."""
    if isinstance(e, (Const, Symbol)):
        return e
    if isinstance(e, Neg):
        return neg(children[0])
    if isinstance(e, Exp):
        return exp(children[0])
    if isinstance(e, Ln):
        return ln(children[0])
    if isinstance(e, Pow):
        return power(children[0], e.exponent)
    op = {Add: add, Sub: sub, Mul: mul, Div: div}[type(e)]
    return op(children[0], children[1])


def transform(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    """Bottom-up rewrite: ``leaf`` maps symbols/constants, inner nodes rebuild."""
    memo: dict[Expr, Expr] = {}

    def walk(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, (Const, Symbol)):
            out = leaf(node)
        else:
            out = rebuild(node, tuple(walk(c) for c in node.children))
        memo[node] = out
        return out

    return walk(e)


def subs(e: Expr, mapping: Mapping[str, object]) -> Expr:
    """Replace symbols by expressions (or numbers), simultaneously."""
    table = {name: as_expr(v) for name, v in mapping.items()}

    def leaf(node):
        if isinstance(node, Symbol):
            return table.get(node.name, node)
        return node

    return transform(e, leaf)


def free_symbols(e: Expr) -> set[str]:
    out: set[str] = set()
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Symbol):
            out.add(node.name)
        stack.extend(node.children)
    return out


def count_nodes(e: Expr) -> int:
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) not in seen:
            seen.add(id(node))
            stack.extend(node.children)
    return len(seen)


# --- like-term cancellation -------------------------------------------------


def _terms(e: Expr, sign: Number, out: list):
    if isinstance(e, Add):
        _terms(e.left, sign, out)
        _terms(e.right, sign, out)
    elif isinstance(e, Sub):
        _terms(e.left, sign, out)
        _terms(e.right, -sign, out)
    elif isinstance(e, Neg):
        _terms(e.arg, -sign, out)
    elif isinstance(e, Const):
        out.append((sign * e.value, None))
    elif isinstance(e, Mul) and isinstance(e.left, Const):
        out.append((sign * e.left.value, e.right))
    else:
        out.append((sign, e))


def _collect(e: Expr) -> Expr:
    raw: list = []
    _terms(e, 1, raw)
    coeffs: dict = {}
    for c, term in raw:
        coeffs[term] = coeffs.get(term, 0) + c
    result = None
    constant = coeffs.pop(None, 0)
    items = [(t, c) for t, c in coeffs.items() if c != 0]
    if constant != 0:
        items.append((None, constant))
    for term, c in items:
        magnitude = abs(c)
        if term is None:
            piece: Expr = Const(magnitude)
        else:
            piece = term if magnitude == 1 else mul(Const(magnitude), term)
        if result is None:
            result = piece if c > 0 else neg(piece)
        elif c > 0:
            result = add(result, piece)
        else:
            result = sub(result, piece)
    return ZERO if result is None else result


def simplify(e: Expr) -> Expr:
    """Best-effort cleanup: constant folding, 0/1 identities, like-term cancellation."""
    memo: dict[Expr, Expr] = {}

    def walk(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, (Const, Symbol)):
            out = node
        else:
            out = rebuild(node, tuple(walk(c) for c in node.children))
            if isinstance(out, (Add, Sub, Neg)):
                out = _collect(out)
        memo[node] = out
        return out

    return walk(e)


def constant_value(e: Expr):
    """Exact value of a symbol-free expression, or None."""
    if free_symbols(e):
        return None
    folded = simplify(e)
    return folded.value if isinstance(folded, Const) else None


def sum_exprs(items: Iterable[Expr]) -> Expr:
    total: Expr = ZERO
    for item in items:
        total = add(total, as_expr(item))
    return total
