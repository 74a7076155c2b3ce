"""Recursive-descent parser for the formula grammar.

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" signed)*         exponent must fold to a constant
    signed := "-" signed | atom
    atom   := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"

Binary operators associate to the left.  The parser builds raw nodes; no
simplification happens here, so ``x1 - x1`` stays a subtraction.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Optional

from ..errors import ParseError, UnknownSymbolError
from .nodes import (
    FUNCTIONS,
    RESERVED,
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
    constant_value,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?|\.\d+)|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, parameters: Optional[set[str]]):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.parameters = parameters

    @property
    def current(self):
        return self.tokens[self.i]

    def error(self, message, cls=ParseError, position=None):
        if position is None:
            position = self.current[2]
        return cls(message, self.text, position)

    def expect(self, value):
        kind, text, _ = self.current
        if kind != "op" or text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise self.error(f"expected {value!r}, found {found}")
        self.i += 1

    def parse(self) -> Expr:
        if self.current[0] == "end":
            raise self.error("empty formula")
        e = self.expr()
        if self.current[0] != "end":
            raise self.error(f"unexpected {self.current[1]!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.current[0] == "op" and self.current[1] in "+-":
            op = self.current[1]
            self.i += 1
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.current[0] == "op" and self.current[1] in "*/":
            op = self.current[1]
            self.i += 1
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.current[0] == "op" and self.current[1] == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        while self.current[0] == "op" and self.current[1] == "^":
            self.i += 1
            position = self.current[2]
            exponent = self.signed_atom()
            value = constant_value(exponent)
            if value is None:
                raise self.error("exponent must be a real constant", position=position)
            base = Pow(base, value)
        return base

    def signed_atom(self) -> Expr:
        # exponent operand: "x^-2" is allowed, "x^2^3" groups as (x^2)^3
        if self.current[0] == "op" and self.current[1] == "-":
            self.i += 1
            return Neg(self.signed_atom())
        return self.atom()

    def atom(self) -> Expr:
        kind, text, position = self.current
        if kind == "number":
            self.i += 1
            return Const(Fraction(text))
        if kind == "ident":
            self.i += 1
            if self.current[0] == "op" and self.current[1] == "(":
                if text not in FUNCTIONS:
                    raise self.error(f"unknown function {text!r}", UnknownSymbolError, position)
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Exp(arg) if text == "exp" else Ln(arg)
            if text in FUNCTIONS:
                raise self.error(f"function {text!r} needs an argument", position=position)
            if self.parameters is not None and text not in RESERVED and text not in self.parameters:
                raise self.error(f"unknown symbol {text!r}", UnknownSymbolError, position)
            return Symbol(text)
        if kind == "op" and text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {text!r}")


def parse(text: str, parameters: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``text`` into an expression tree.

    When ``parameters`` is given, any identifier that is neither a reserved
    variable nor listed there raises UnknownSymbolError; otherwise every
    non-reserved identifier is taken as a parameter.
    """
    declared = None if parameters is None else set(parameters)
    return _Parser(text, declared).parse()
