"""Construction of new Poisson structures from a known one."""
from .characteristics import Trajectory, integrate_characteristics
from .core import (
    SKEW_ONES,
    Case,
    LVExponents,
    SolutionFamily,
    case1_family,
    case3_family,
    characteristic_field,
    check_pde,
    classify_case,
    lambda_of,
    lambda_report,
    lv_exponents,
    pde_residual,
)
from .quadrature import Quadrature, quadrature_K3, simpson, verify_elimination

__all__ = [
    "Case", "LVExponents", "Quadrature", "SKEW_ONES", "SolutionFamily", "Trajectory", "case1_family",
    "case3_family", "characteristic_field", "check_pde", "classify_case", "integrate_characteristics",
    "lambda_of", "lambda_report", "lv_exponents", "pde_residual", "quadrature_K3", "simpson",
    "verify_elimination",
]
