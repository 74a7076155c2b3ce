"""Built-in structures: constant, so(3), ray optics, Kermack-McKendrick,
Lotka-Volterra and the Darboux canonical form, with Casimirs and expected
lambda.  Parameter defaults are positive so every domain is well defined."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import Poisson3DError
from .expr import Domain, Expr, parse, to_string
from .family import lv_exponents
from .poisson import StructureMatrix
from .transform import Diffeomorphism, power_map


class UnknownEntryError(Poisson3DError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


@dataclass(frozen=True)
class Elimination:
    pivot: str
    alpha: Expr
    beta: Expr


@dataclass(frozen=True)
class Case3Recipe:
    diffeomorphism: Diffeomorphism
    target: StructureMatrix
    casimir_y: Expr


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    structure: StructureMatrix
    casimir: Expr
    lambda_expected: Expr
    description: str
    notes: str = ""
    params: dict = field(default_factory=dict)
    elimination: Optional[Elimination] = None
    case3: Optional[Case3Recipe] = None
    case1: bool = True

    @property
    def domain(self) -> Domain:
        return self.structure.domain


def _structure(name, u, v, w, domain, params=None) -> StructureMatrix:
    return StructureMatrix(parse(u), parse(v), parse(w), domain=domain, params=params or {}, name=name)


def _constant(u0=1.0, v0=2.0, w0=3.0):
    params = {"u0": u0, "v0": v0, "w0": w0}
    return CatalogEntry(
        name="constant",
        structure=_structure("constant", "u0", "v0", "w0", Domain.box(-25.0, 25.0), params),
        casimir=parse("w0*x1 + v0*x2 + u0*x3"),
        lambda_expected=parse("0"),
        description="constant skew matrix {u0, v0, w0}; Casimir w0 x1 + v0 x2 + u0 x3",
        notes="every constant skew matrix is a structure matrix; lambda = 0",
        params=params,
    )


def _so3():
    return CatalogEntry(
        name="so3",
        structure=_structure("so3", "x3", "x2", "x1", Domain.box(-5.0, 5.0)),
        casimir=parse("x1^2 + x2^2 + x3^2"),
        lambda_expected=parse("0"),
        description="Lie-Poisson structure of so(3), {x3, x2, x1}; Casimir x1^2 + x2^2 + x3^2",
        notes="lambda = 0",
    )


def _ray_optics():
    return CatalogEntry(
        name="ray_optics",
        structure=_structure("ray_optics", "4*x3", "-2*x1", "-2*x2", Domain.box(-10.0, 10.0)),
        casimir=parse("x1*x2 - x3^2"),
        lambda_expected=parse("0"),
        description="Hamiltonian ray optics structure {4x3, -2x1, -2x2}; Casimir x1 x2 - x3^2",
        notes="lambda = 0",
    )


def _kermack_mckendrick(r=1.0, a=1.0):
    params = {"r": r, "a": a}
    return CatalogEntry(
        name="kermack_mckendrick",
        structure=_structure(
            "kermack_mckendrick", "-r*x1*x2", "0", "-a*x2",
            Domain((1e-3,) * 3, (10.0,) * 3, (True,) * 3), params,
        ),
        casimir=parse("x3 + (a/r)*ln(x1)"),
        lambda_expected=parse("r*(x1 - x2) - a"),
        description=(
            "Kermack-McKendrick epidemic structure {-r x1 x2, 0, -a x2} on the positive orthant; "
            "Casimir x3 + (a/r) ln x1"
        ),
        notes="lambda = r(x1 - x2) - a; xi = k x1 x2 solves the linear PDE",
        params=params,
        elimination=Elimination(
            "x3",
            parse("exp((r/a)*(k2 - x3))"),
            parse("k1 - x3 - exp((r/a)*(k2 - x3))"),
        ),
        case1=False,
    )


def _lotka_volterra(a12=1.0, a31=1.0, a23=4.0):
    params = {"a12": a12, "a31": a31, "a23": a23}
    alpha, beta, gamma, s = lv_exponents(a12, a31, a23)
    domain = Domain.positive_orthant(0.1, 5.0)
    structure = _structure("lotka_volterra", "a12*x1*x2", "a31*x1*x3", "a23*x2*x3", domain, params)
    phi = power_map((alpha, beta, gamma), domain=domain)
    sign = "" if s > 0 else "-"
    target = StructureMatrix(
        parse(f"{sign}y1*y2"), parse(f"{sign}y1*y3"), parse(f"{sign}y2*y3"),
        domain=Domain(
            tuple(lo**e if e > 0 else hi**e for lo, hi, e in zip(domain.lower, domain.upper, (alpha, beta, gamma))),
            tuple(hi**e if e > 0 else lo**e for lo, hi, e in zip(domain.lower, domain.upper, (alpha, beta, gamma))),
            (True,) * 3,
        ),
        variables=("y1", "y2", "y3"),
        name="lotka_volterra_target",
    )
    return CatalogEntry(
        name="lotka_volterra",
        structure=structure,
        casimir=parse("exp(a23*ln(x1) + a31*ln(x2) + a12*ln(x3))"),
        lambda_expected=parse("(a31 - a12)*x1 + (a12 - a23)*x2 + (a23 - a31)*x3"),
        description=(
            "Lotka-Volterra structure {a12 x1 x2, a31 x1 x3, a23 x2 x3} on the positive orthant; "
            "Casimir x1^a23 x2^a31 x3^a12"
        ),
        notes=(
            f"power map y = (x1^{alpha}, x2^{beta}, x3^{gamma}) sends it to "
            f"{'' if s > 0 else '-'}{{y1y2, y1y3, y2y3}}, where lambda = 0"
        ),
        params=params,
        case3=Case3Recipe(phi, target, parse("y1*y2*y3")),
        case1=(a12 == a31 == a23),
    )


def _darboux():
    return CatalogEntry(
        name="darboux",
        structure=_structure("darboux", "1", "0", "0", Domain.box(-25.0, 25.0)),
        casimir=parse("x3"),
        lambda_expected=parse("0"),
        description="Darboux canonical form {1, 0, 0}; Casimir x3",
        notes="constant rank-2 structure used as a Case III target",
    )


_BUILDERS = {
    "constant": _constant,
    "so3": _so3,
    "ray_optics": _ray_optics,
    "kermack_mckendrick": _kermack_mckendrick,
    "lotka_volterra": _lotka_volterra,
    "darboux": _darboux,
}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str, **params) -> CatalogEntry:
    """Catalog entry by name; keyword arguments override parameter defaults."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownEntryError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}") from None
    return builder(**params)


def list_entries() -> list[tuple[str, str]]:
    return [(n, get(n).description) for n in _BUILDERS]


def case1_entries() -> list[CatalogEntry]:
    return [e for e in (get(n) for n in _BUILDERS) if e.case1]


def summary(entry: CatalogEntry) -> str:
    return f"{entry.name}: {entry.structure}  C = {to_string(entry.casimir)}"
