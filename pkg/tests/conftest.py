"""Shared helpers: random polynomials, test diffeomorphisms and an independent
sympy oracle."""
import numpy as np
import pytest
import sympy

from poisson3d.expr import parse, to_string
from poisson3d.transform import Diffeomorphism, linear_map

SYMPY_LOCALS = {"ln": sympy.log, "exp": sympy.exp}


def to_sympy(e):
    """Independent reading of a formula (or Expr) by sympy."""
    text = e if isinstance(e, str) else to_string(e)
    return sympy.sympify(text.replace("^", "**"), locals=SYMPY_LOCALS)


def sympy_value(e, point: dict) -> float:
    return float(to_sympy(e).subs({sympy.Symbol(k): v for k, v in point.items()}).evalf(30))


def random_polynomial(rng: np.random.Generator, n_terms: int = 4, max_degree: int = 3) -> str:
    """Random polynomial in x1, x2, x3 with small integer coefficients, as text."""
    terms = []
    for _ in range(n_terms):
        coeff = int(rng.integers(-3, 4)) or 1
        powers = rng.integers(0, max_degree + 1, size=3)
        factors = [str(coeff)] + [f"x{i + 1}^{p}" for i, p in enumerate(powers) if p > 0]
        terms.append("*".join(factors))
    return " + ".join(f"({t})" for t in terms)


def test_maps() -> dict:
    """Five diffeomorphisms of R^3 with exact inverses."""
    return {
        "identity": Diffeomorphism.identity(),
        "scale": linear_map([[2, 0, 0], [0, 2, 0], [0, 0, 2]]),
        "translation": linear_map(np.eye(3), offset=(1.0, -2.0, 0.5)),
        "shear": linear_map([[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
        # y = (x1, x2 + x1^2, x3 + x1*x2), inverted by back substitution
        "triangular": Diffeomorphism(
            ("x1", "x2 + x1^2", "x3 + x1*x2"),
            ("y1", "y2 - y1^2", "y3 - y1*(y2 - y1^2)"),
            name="triangular",
        ),
    }


test_maps.__test__ = False


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def poly(rng):
    return lambda **kw: parse(random_polynomial(rng, **kw))
