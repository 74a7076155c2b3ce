"""Families of three-dimensional Poisson structures.

Given one structure matrix {u, v, w} (u = J12, v = J31, w = J23) that
satisfies the Jacobi identity, build and verify infinite families of new
ones by adding a common perturbation, either directly (lambda = 0) or
through a change of coordinates.
"""
from .errors import (
    DomainError,
    ParseError,
    Poisson3DError,
    PreconditionError,
    QuadratureError,
    SamplingError,
    SingularDenominatorError,
    StepRejectedError,
    UnboundSymbolError,
    UnknownSymbolError,
)
from .expr import Domain, Expr, diff, evaluate, is_zero_on, parse, simplify, to_string
from .poisson import (
    StructureMatrix,
    VectorFieldExpr,
    bracket,
    hamiltonian_vector_field,
    is_casimir,
    jacobi_residual,
    rank_at,
)
from .verify import (
    SamplingConfig,
    Verdict,
    VerificationReport,
    check_family,
    check_jacobi,
    conservation_report,
)
from .transform import Diffeomorphism, jacobian, linear_map, power_map, pushforward
from .family import (
    Case,
    SolutionFamily,
    Trajectory,
    case1_family,
    case3_family,
    characteristic_field,
    check_pde,
    classify_case,
    integrate_characteristics,
    lambda_of,
    lv_exponents,
    quadrature_K3,
    verify_elimination,
)
from . import catalog

__version__ = "0.1.0"
