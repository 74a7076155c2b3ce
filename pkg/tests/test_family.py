import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_polynomial
from poisson3d import catalog
from poisson3d.errors import DomainError, PreconditionError, SingularDenominatorError, StepRejectedError
from poisson3d.expr import Domain, directional_derivative, evaluate, is_zero_on, parse, simplify, subs, to_string
from poisson3d.family import (
    Case,
    SolutionFamily,
    case1_family,
    case3_family,
    characteristic_field,
    check_pde,
    classify_case,
    integrate_characteristics,
    lambda_of,
    lv_exponents,
    pde_residual,
    quadrature_K3,
    simpson,
    verify_elimination,
)
from poisson3d.poisson import StructureMatrix, jacobi_residual
from poisson3d.transform import Diffeomorphism, compose, pushforward_source
from poisson3d.verify import DEFAULT_PSI_SET, SamplingConfig, check_family, check_jacobi, conservation_report

SO3 = catalog.get("so3")
KM = catalog.get("kermack_mckendrick")
LV = catalog.get("lotka_volterra")
DARBOUX = catalog.get("darboux")
CASE1_NAMES = [e.name for e in catalog.case1_entries()]
TO_Y = {"x1": "y1", "x2": "y2", "x3": "y3"}


def _values(e, points, params=None):
    return np.array([evaluate(e, {**(params or {}), **dict(zip(("x1", "x2", "x3"), p))}) for p in points])


# -- lambda and classification ------------------------------------------------------

def test_lambda_vanishes_for_so3():
    assert to_string(simplify(lambda_of(SO3.structure))) == "0"


def test_lambda_kermack_mckendrick(rng):
    lam = lambda_of(KM.structure)
    expected = parse("r*(x1 - x2) - a")
    for r, a in [(1.0, 1.0), (0.3, 2.5), (4.0, 0.1)]:
        pts = rng.uniform(0.01, 10, size=(50, 3))
        params = {"r": r, "a": a}
        assert np.allclose(_values(lam, pts, params), _values(expected, pts, params), atol=1e-12)


def test_lambda_lotka_volterra_with_sampled_coefficients():
    S = StructureMatrix(
        *LV.structure.entries, domain=LV.domain,
        param_ranges={"a12": (-3, 3), "a31": (-3, 3), "a23": (-3, 3)},
    )
    expected = parse("(a31 - a12)*x1 + (a12 - a23)*x2 + (a23 - a31)*x3")
    report = is_zero_on(lambda_of(S) - expected, S.domain, param_ranges=S.param_ranges, tol=1e-10)
    assert report.verdict == "Zero"


@pytest.mark.parametrize(
    "name, case",
    [
        ("constant", Case.CASE_I),
        ("so3", Case.CASE_I),
        ("ray_optics", Case.CASE_I),
        ("darboux", Case.CASE_I),
        ("kermack_mckendrick", Case.CASE_II_OR_III),
        ("lotka_volterra", Case.CASE_II_OR_III),
    ],
)
def test_classify_case(name, case):
    assert classify_case(catalog.get(name).structure) is case


def test_equal_coefficient_lotka_volterra_is_case_one():
    S = catalog.get("lotka_volterra", a12=2.0, a31=2.0, a23=2.0).structure
    assert classify_case(S) is Case.CASE_I


# -- characteristic field -----------------------------------------------------------

def test_characteristic_field_so3():
    assert [to_string(c) for c in characteristic_field(SO3.structure)] == ["x3 - x2", "x1 - x3", "x2 - x1"]


def test_characteristic_field_equal_constants_vanishes():
    S = catalog.get("constant", u0=2.0, v0=2.0, w0=2.0).structure
    for c in characteristic_field(S):
        assert evaluate(c, S.params) == 0.0
    bare = StructureMatrix.from_strings("2", "2", "2")
    assert [to_string(c) for c in characteristic_field(bare)] == ["0", "0", "0"]


def test_characteristic_field_darboux():
    assert [to_string(c) for c in characteristic_field(DARBOUX.structure)] == ["1", "-1", "0"]


@pytest.mark.parametrize("name", catalog.names())
def test_sum_of_coordinates_and_casimir_are_first_integrals(name):
    entry = catalog.get(name)
    S = entry.structure
    field_ = characteristic_field(S).components
    for quantity, tol in [(parse("x1 + x2 + x3"), 1e-12), (entry.casimir, 1e-8)]:
        rate = directional_derivative(quantity, field_, S.variables)
        assert is_zero_on(rate, S.domain, params=S.params, tol=tol).verdict == "Zero"


# -- the linear PDE -----------------------------------------------------------------

@pytest.mark.parametrize("base", ["so3", "kermack_mckendrick", "ray_optics", "lotka_volterra"])
def test_ansatz_turns_jacobi_into_linear_pde(base, rng):
    """Jacobi residual of base + xi {1,1,1} equals the linear PDE residual: the quadratic terms cancel."""
    S = catalog.get(base).structure
    for _ in range(5):
        xi = parse(random_polynomial(rng))
        perturbed = S.with_entries(*(e + xi for e in S.entries))
        diff_ = jacobi_residual(perturbed) - pde_residual(S, xi)
        pts = rng.uniform(0.1, 2.0, size=(100, 3))
        assert np.allclose(_values(diff_, pts, S.params), 0.0, atol=1e-8)


def test_check_pde_examples():
    assert check_pde(KM.structure, "3*x1*x2").verdict == "Zero"
    assert check_pde(SO3.structure, "0").verdict == "Zero"
    report = check_pde(SO3.structure, "x1")
    assert report.verdict == "NonZero"
    w = report.witness
    assert w["residual"] == pytest.approx(abs(w["x3"] - w["x2"]))


def test_check_pde_with_symbolic_constant():
    S = StructureMatrix(*KM.structure.entries, domain=KM.domain, params=KM.params, param_ranges={"k": (-5, 5)})
    report = check_pde(S, parse("k*x1*x2"))
    assert report.verdict == "Zero"
    assert report.max_abs_residual < 1e-9


def test_every_xi_solves_the_pde_for_equal_constants(rng):
    S = catalog.get("constant", u0=1.5, v0=1.5, w0=1.5).structure
    for _ in range(5):
        assert check_pde(S, parse(random_polynomial(rng)) * parse("exp(x1)")).verdict == "Zero"


# -- Case I ----------------------------------------------------------------------

def test_case1_so3_with_k1():
    F = case1_family(SO3.structure, SO3.casimir, "k1")
    M = F.materialize()
    K1 = parse("x1 + x2 + x3")
    for got, base in zip(M.entries, ("x3", "x2", "x1")):
        assert is_zero_on(got - (parse(base) + K1), M.domain, tol=1e-12).verdict == "Zero"
    assert check_jacobi(M.with_entries(*M.entries, domain=Domain.box(-1, 1))).verdict == "Zero"


def test_case1_zero_psi_returns_base():
    F = case1_family(SO3.structure, SO3.casimir)
    assert F.materialize("0").entries == SO3.structure.entries


def test_case1_ray_optics_with_k2():
    e = catalog.get("ray_optics")
    M = case1_family(e.structure, e.casimir, "k2").materialize()
    for got, base in zip(M.entries, e.structure.entries):
        assert simplify(got - base - parse("x1*x2 - x3^2")) == parse("0")


@pytest.mark.parametrize("name", CASE1_NAMES)
def test_case1_families_pass_for_the_standard_generators(name):
    entry = catalog.get(name)
    F = case1_family(entry.structure, entry.casimir)
    report = check_family(F, DEFAULT_PSI_SET)
    assert report.ok, report.to_dict()
    assert all(r.max_abs_residual < 1e-8 for r in report.reports.values())


def test_case1_refused_when_lambda_nonzero():
    with pytest.raises(PreconditionError, match="lambda") as info:
        case1_family(KM.structure, KM.casimir)
    assert info.value.report.verdict == "NonZero"


def test_case1_refused_for_a_false_casimir():
    with pytest.raises(PreconditionError, match="Casimir"):
        case1_family(SO3.structure, "x1")


def test_generator_rejects_third_invariant():
    F = case1_family(SO3.structure, SO3.casimir)
    with pytest.raises(ValueError, match="k3"):
        F.materialize("k3")


def test_nonpolynomial_generator():
    F = case1_family(SO3.structure, SO3.casimir)
    member = F.materialize("exp(k1/10)*k2 - ln(k2 + 1)")
    assert check_jacobi(member).verdict == "Zero"


# -- Case II elimination and quadrature -------------------------------------------

def test_kermack_mckendrick_elimination():
    el = KM.elimination
    report = verify_elimination(KM.structure, "x1 + x2 + x3", KM.casimir, el.pivot, el.alpha, el.beta)
    assert report.verdict == "Zero"


def test_wrong_elimination_detected():
    el = KM.elimination
    report = verify_elimination(KM.structure, "x1 + x2 + x3", KM.casimir, "x3", "k2", el.beta)
    assert report.verdict == "NonZero"
    assert report.witness is not None


def test_quadrature_refuses_inconsistent_elimination():
    with pytest.raises(PreconditionError):
        quadrature_K3(KM.structure, "x1 + x2 + x3", KM.casimir, "x3", "k2", "k1")


def test_simpson_on_known_integrals():
    assert simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-9)
    assert simpson(lambda s: 1 / s, 1.0, 5.0) == pytest.approx(math.log(5), rel=1e-9)
    assert simpson(lambda s: s**3, 2.0, 2.0) == 0.0
    assert simpson(lambda s: s, 1.0, -1.0) == pytest.approx(0.0, abs=1e-15)


def test_quadrature_degenerates_when_lambda_vanishes():
    # darboux: lambda = 0, pivot x1 has component u - v = 1
    S = DARBOUX.structure
    q = quadrature_K3(S, "x1 + x2 + x3", "x3", "x1", "k1 - x1 - k2", "k2", anchor=0.0)
    assert to_string(simplify(q.kappa)) == "0"
    for p in [(0.3, -1.0, 2.0), (5.0, 5.0, 5.0)]:
        assert q.h(p[0], *q.invariants(p)) == 1.0
        assert q.k3(p, 2.5) == 2.5


def _km_trajectories(n, rng):
    S = KM.structure
    starts = rng.uniform(0.5, 1.5, size=(n, 3))
    return [integrate_characteristics(S, x0, 1.0, 1e-3, xi0=float(x0[0] * x0[1])) for x0 in starts]


def test_quadrature_invariant_matches_closed_form_up_to_level_constant(rng):
    S = KM.structure
    el = KM.elimination
    r, a = KM.params["r"], KM.params["a"]
    for traj in _km_trajectories(3, rng):
        # the anchor must lie on the same branch of the level curve as the path
        q = quadrature_K3(S, "x1 + x2 + x3", KM.casimir, el.pivot, el.alpha, el.beta, anchor=traj.points[0][2])
        ratios = []
        for p, xi in zip(traj.points[::50], traj.xi[::50]):
            numeric = q.k3(p, xi)
            closed = xi / p[1] * math.exp(r * p[2] / a)
            ratios.append(numeric / closed)
        ratios = np.array(ratios)
        assert np.max(np.abs(ratios / ratios[0] - 1)) < 1e-5


def test_quadrature_invariant_is_constant_along_carried_xi():
    S = KM.structure
    el = KM.elimination
    traj = integrate_characteristics(S, (1.0, 2.0, 3.0), 1.0, 1e-3, xi0=2.0)
    q = quadrature_K3(S, "x1 + x2 + x3", KM.casimir, el.pivot, el.alpha, el.beta, anchor=3.0)
    report = conservation_report(traj, {"K3": lambda p, xi: q.k3(p, xi)})
    assert report.drifts["K3"] < 1e-5


def test_explicit_branch_solves_the_pde(rng):
    S = KM.structure
    el = KM.elimination
    q = quadrature_K3(S, "x1 + x2 + x3", KM.casimir, el.pivot, el.alpha, el.beta, anchor=3.0)
    xi = q.xi_branch("k1 + k2^2")
    # the PDE says d xi / dt = lambda xi along characteristics
    traj = integrate_characteristics(S, (1.0, 2.0, 3.0), 0.5, 1e-3)
    lam = lambda_of(S)
    values = np.array([xi(p) for p in traj.points])
    rates = np.gradient(values, traj.t)
    expected = _values(lam, traj.points, S.params) * values
    assert np.allclose(rates[5:-5], expected[5:-5], rtol=1e-5)


def test_quadrature_guard_trips_on_vanishing_component():
    # so3 with pivot x1: component x3 - x2 vanishes where x2 = x3
    S = SO3.structure
    q = quadrature_K3(
        S, "x1 + x2 + x3", SO3.casimir, "x1", "(k1 - x1)/2", "(k1 - x1)/2", check=False, anchor=0.0
    )
    with pytest.raises(SingularDenominatorError, match="guard"):
        q.h(1.0, 3.0, 3.0)


# -- characteristics ---------------------------------------------------------------

def test_so3_characteristics_conserve_invariants():
    traj = integrate_characteristics(SO3.structure, (1.0, 2.0, 3.0), 10.0, 1e-3)
    report = conservation_report(traj, {"K1": "x1 + x2 + x3", "C": SO3.casimir})
    assert report.drifts["K1"] < 1e-6 and report.drifts["C"] < 1e-6
    assert traj.t[-1] == pytest.approx(10.0)
    assert np.all(np.diff(traj.t) > 0)
    assert not traj.halted


def test_zero_field_is_stationary():
    S = catalog.get("constant", u0=1.0, v0=1.0, w0=1.0).structure
    traj = integrate_characteristics(S, (1.0, 2.0, 3.0), 1.0, 0.1)
    assert np.all(traj.points == np.array([1.0, 2.0, 3.0]))
    assert len(traj) == 11


def test_kermack_mckendrick_characteristics_conserve_invariants():
    traj = integrate_characteristics(KM.structure, (1.0, 2.0, 3.0), 1.0, 1e-3)
    report = conservation_report(traj, {"K1": "x1 + x2 + x3", "K2": "x3 + ln(x1)"}, KM.params)
    assert report.drifts["K1"] < 1e-6
    assert report.drifts["K2"] < 1e-6
    assert traj.points[0] == pytest.approx([1, 2, 3])


def test_carried_xi_follows_closed_form():
    # xi = x1 x2 solves the PDE, so the carried value must track it
    traj = integrate_characteristics(KM.structure, (1.0, 2.0, 3.0), 1.0, 1e-3, xi0=2.0)
    assert np.allclose(traj.xi, traj.points[:, 0] * traj.points[:, 1], rtol=1e-9)


def test_leaving_the_domain_halts():
    S = DARBOUX.structure  # field (1, -1, 0) on (-25, 25)^3
    traj = integrate_characteristics(S, (20.0, 0.0, 0.0), 10.0, 0.01)
    assert traj.halted and "domain" in traj.halt_reason
    assert traj.points[-1][0] < 25.0
    assert all(S.domain.contains(p) for p in traj.points)


def test_start_outside_domain_rejected():
    with pytest.raises(DomainError):
        integrate_characteristics(KM.structure, (-1.0, 1.0, 1.0), 1.0, 0.01)


def test_oversized_step_rejected_with_partial_trajectory():
    S = StructureMatrix.from_strings("x1^2", "0", "0", domain=Domain.box(0.5, 1e6))
    with pytest.raises(StepRejectedError) as info:
        integrate_characteristics(S, (1.0, 1.0, 1.0), 1.0, 0.2)
    partial = info.value.trajectory
    assert partial is not None and partial.halted


def test_invalid_step_arguments():
    with pytest.raises(ValueError):
        integrate_characteristics(SO3.structure, (1, 2, 3), 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_characteristics(SO3.structure, (1, 2, 3), -1.0, 0.1)


# -- Case III -------------------------------------------------------------------

def test_darboux_identity_family_matches_closed_form(rng):
    S = DARBOUX.structure
    phi = Diffeomorphism.identity()
    target = StructureMatrix.from_strings("1", "0", "0", variables=("y1", "y2", "y3"), domain=S.domain)
    F = case3_family(S, phi, target, "y3", "k1*k2 + k1^2")
    member = F.materialize()
    psi = parse("(x1 + x2 + x3)*x3 + (x1 + x2 + x3)^2")
    expected = [parse("1") + psi, psi, psi]
    pts = rng.uniform(-5, 5, size=(100, 3))
    for got, want in zip(member.entries, expected):
        assert np.allclose(_values(got, pts), _values(want, pts), atol=1e-12, rtol=0)


@pytest.mark.parametrize("name", CASE1_NAMES)
def test_identity_case3_reduces_to_case1(name, rng):
    entry = catalog.get(name)
    S = entry.structure
    phi = Diffeomorphism.identity()
    target = StructureMatrix(
        *(subs(e, TO_Y) for e in S.entries), domain=S.domain, params=S.params, variables=("y1", "y2", "y3")
    )
    F3 = case3_family(S, phi, target, subs(entry.casimir, TO_Y), "k1*k2")
    F1 = case1_family(S, entry.casimir, "k1*k2")
    assert [to_string(m) for m in F3.multipliers] == ["1", "1", "1"]
    pts = S.domain.sample(rng, 100)
    for a, b in zip(F3.materialize().entries, F1.materialize().entries):
        assert np.allclose(_values(a, pts, S.params), _values(b, pts, S.params), atol=1e-12, rtol=0)


def test_lotka_volterra_multipliers(rng):
    recipe = LV.case3
    F = case3_family(LV.structure, recipe.diffeomorphism, recipe.target, recipe.casimir_y, "k1")
    alpha, beta, gamma, s = (float(v) for v in lv_exponents(1, 1, 4))
    a12, a31, a23 = 1.0, 1.0, 4.0
    pts = LV.domain.sample(rng, 100)
    x1, x2, x3 = pts.T
    expected = [
        s * a12 * x1 ** (1 - alpha) * x2 ** (1 - beta),
        s * a31 * x1 ** (1 - alpha) * x3 ** (1 - gamma),
        s * a23 * x2 ** (1 - beta) * x3 ** (1 - gamma),
    ]
    for m, want in zip(F.multipliers, expected):
        assert np.allclose(_values(m, pts, LV.params), want, rtol=1e-12)


@pytest.mark.parametrize("psi", ["k1", "k2", "k1*k2", "k1^2 - k2", "1"])
def test_lotka_volterra_family_satisfies_jacobi(psi):
    recipe = LV.case3
    F = case3_family(LV.structure, recipe.diffeomorphism, recipe.target, recipe.casimir_y, psi)
    report = check_jacobi(F.materialize())
    assert report.verdict == "Zero", report.summary()


@pytest.mark.parametrize("coeffs", [(2.0, 3.0, 0.5), (-1.0, 2.0, 1.5), (-1.0, -1.0, -1.0)])
def test_lotka_volterra_family_other_coefficients(coeffs):
    entry = catalog.get("lotka_volterra", a12=coeffs[0], a31=coeffs[1], a23=coeffs[2])
    recipe = entry.case3
    F = case3_family(entry.structure, recipe.diffeomorphism, recipe.target, recipe.casimir_y, "k1*k2")
    assert check_jacobi(F.materialize()).verdict == "Zero"


def test_case3_rejects_mismatched_target():
    recipe = LV.case3
    wrong = recipe.target.with_entries("y1*y2", "y1*y3", "2*y2*y3")
    with pytest.raises(PreconditionError, match="pushforward"):
        case3_family(LV.structure, recipe.diffeomorphism, wrong, recipe.casimir_y)


def test_case3_rejects_target_with_nonzero_lambda():
    S = KM.structure
    phi = Diffeomorphism.identity()
    target = StructureMatrix(*(subs(e, TO_Y) for e in S.entries), params=S.params, variables=("y1", "y2", "y3"))
    with pytest.raises(PreconditionError, match="lambda"):
        case3_family(S, phi, target, subs(KM.casimir, TO_Y))


def test_case3_rejects_false_target_casimir():
    recipe = LV.case3
    with pytest.raises(PreconditionError, match="Casimir"):
        case3_family(LV.structure, recipe.diffeomorphism, recipe.target, "y1")


def test_case3_rejects_broken_inverse():
    recipe = LV.case3
    phi = recipe.diffeomorphism
    broken = Diffeomorphism(phi.forward, (parse("y1"), *phi.inverse[1:]), phi.domain)
    with pytest.raises(PreconditionError, match="diffeomorphism"):
        case3_family(LV.structure, broken, recipe.target, recipe.casimir_y)


def test_corrupted_multiplier_is_detected():
    recipe = LV.case3
    F = case3_family(LV.structure, recipe.diffeomorphism, recipe.target, recipe.casimir_y, "k1*k2")
    m12, m31, m23 = F.multipliers
    bad = F.with_multipliers((m12 * 2, m31, m23))
    report = check_family(bad, ["k1*k2"])
    assert not report.ok
    assert report.reports["k1*k2"].witness is not None


# -- exponents for the Lotka-Volterra power map ---------------------------------------

@pytest.mark.parametrize(
    "coeffs, expected",
    [
        ((1, 1, 1), (1, 1, 1, 1)),
        ((1, 1, 4), (2, 0.5, 0.5, 1)),
        ((-1, -1, -1), (1, 1, 1, -1)),
    ],
)
def test_lv_exponent_examples(coeffs, expected):
    assert tuple(lv_exponents(*coeffs)) == expected


def test_lv_exponents_exact_products_for_default_coefficients():
    alpha, beta, gamma, s = lv_exponents(1, 1, 4)
    assert 1 * alpha * beta == 1 and 1 * alpha * gamma == 1 and 4 * beta * gamma == 1


nonzero = st.floats(0.05, 20.0).flatmap(lambda x: st.sampled_from([x, -x]))


@settings(max_examples=100, deadline=None)
@given(a12=nonzero, a31=nonzero, a23=nonzero)
def test_lv_exponent_products(a12, a31, a23):
    alpha, beta, gamma, s = lv_exponents(a12, a31, a23)
    assert s == (1 if a12 * a31 * a23 > 0 else -1)
    for product in (a12 * alpha * beta, a31 * alpha * gamma, a23 * beta * gamma):
        assert float(product) == pytest.approx(s, rel=1e-12)


def test_lv_exponents_reject_zero():
    with pytest.raises(ValueError):
        lv_exponents(1, 0, 2)


def test_lotka_volterra_pushforward_matches_target():
    recipe = LV.case3
    pushed = pushforward_source(LV.structure, recipe.diffeomorphism)
    mismatch = [p - compose(t, recipe.diffeomorphism) for p, t in zip(pushed, recipe.target.entries)]
    report = is_zero_on(mismatch[0], LV.domain, params=LV.params, tol=1e-9)
    assert report.verdict == "Zero"
    for m in mismatch[1:]:
        assert is_zero_on(m, LV.domain, params=LV.params, tol=1e-9).verdict == "Zero"


def test_solution_family_description():
    F = case1_family(SO3.structure, SO3.casimir)
    assert isinstance(F, SolutionFamily)
    assert "x1 + x2 + x3" in F.describe()
    assert F.kind == "case1"


def test_custom_sampling_config_is_respected():
    cfg = SamplingConfig(n_points=50, seed=3)
    report = check_pde(SO3.structure, "x1", cfg)
    assert report.n_samples == 50 and report.seed == 3
