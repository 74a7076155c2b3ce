import numpy as np
import pytest

from poisson3d import catalog
from poisson3d.catalog import UnknownEntryError
from poisson3d.expr import evaluate_array, parse, simplify, to_string
from poisson3d.family import Case, check_pde, classify_case, lambda_of
from poisson3d.poisson import is_casimir
from poisson3d.verify import check_jacobi

NAMES = ["constant", "so3", "ray_optics", "kermack_mckendrick", "lotka_volterra", "darboux"]


def test_get_so3():
    e = catalog.get("so3")
    assert str(e.structure) == "{x3, x2, x1}"
    assert to_string(e.casimir) == "x1^2 + x2^2 + x3^2"


def test_get_constant_binds_defaults():
    e = catalog.get("constant")
    assert e.params == {"u0": 1.0, "v0": 2.0, "w0": 3.0}
    # with (1, 2, 3) the Casimir is 3 x1 + 2 x2 + x3
    pts = np.array([[0.5, -1.0, 2.0], [3.0, 1.0, -4.0]])
    vals, _ = evaluate_array(e.casimir, {**e.params, "x1": pts[:, 0], "x2": pts[:, 1], "x3": pts[:, 2]})
    assert np.allclose(vals, 3 * pts[:, 0] + 2 * pts[:, 1] + pts[:, 2])


def test_get_ray_optics():
    e = catalog.get("ray_optics")
    assert str(e.structure) == "{4*x3, -2*x1, -2*x2}"
    assert to_string(e.casimir) == "x1*x2 - x3^2"


def test_parameter_defaults_and_overrides():
    assert catalog.get("kermack_mckendrick").params == {"r": 1.0, "a": 1.0}
    assert catalog.get("lotka_volterra").params == {"a12": 1.0, "a31": 1.0, "a23": 4.0}
    km = catalog.get("kermack_mckendrick", r=2.0, a=0.5)
    assert km.structure.params == {"r": 2.0, "a": 0.5}
    assert check_jacobi(km.structure).ok
    assert is_casimir(km.casimir, km.structure).ok


def test_unknown_name():
    with pytest.raises(UnknownEntryError, match="unknown catalog entry 'nope'"):
        catalog.get("nope")
    with pytest.raises(KeyError):
        catalog.get("nope")


def test_list_entries():
    listing = catalog.list_entries()
    assert [n for n, _ in listing] == NAMES
    assert listing == catalog.list_entries()
    for name, description in listing:
        assert catalog.get(name).name == name
        assert description
    km = dict(listing)["kermack_mckendrick"]
    assert "positive orthant" in km


@pytest.mark.parametrize("name", NAMES)
def test_entry_passes_jacobi(name):
    report = check_jacobi(catalog.get(name).structure)
    assert report.verdict == "Zero" and report.max_abs_residual < 1e-9


@pytest.mark.parametrize("name", NAMES)
def test_entry_casimir(name):
    e = catalog.get(name)
    assert is_casimir(e.casimir, e.structure).verdict == "Zero"


@pytest.mark.parametrize("name", NAMES)
def test_entry_lambda_matches_expected(name, rng):
    e = catalog.get(name)
    pts = e.domain.sample(rng, 100)
    env = {**e.params, "x1": pts[:, 0], "x2": pts[:, 1], "x3": pts[:, 2]}
    ours, ok1 = evaluate_array(lambda_of(e.structure), env)
    want, ok2 = evaluate_array(e.lambda_expected, env)
    assert ok1.all() and ok2.all()
    assert np.max(np.abs(np.broadcast_to(ours, (100,)) - np.broadcast_to(want, (100,)))) <= 1e-10


@pytest.mark.parametrize("name", NAMES)
def test_domains_are_well_defined(name):
    e = catalog.get(name)
    pts = e.domain.sample(np.random.default_rng(0), 500)
    env = {**e.params, "x1": pts[:, 0], "x2": pts[:, 1], "x3": pts[:, 2]}
    for expr in (*e.structure.entries, e.casimir):
        _, ok = evaluate_array(expr, env)
        assert ok.all()


def test_case1_flags():
    assert [e.name for e in catalog.case1_entries()] == ["constant", "so3", "ray_optics", "darboux"]
    for e in catalog.case1_entries():
        assert classify_case(e.structure) is Case.CASE_I
    assert classify_case(catalog.get("kermack_mckendrick").structure) is not Case.CASE_I


def test_equal_constant_entries_make_pde_trivial():
    e = catalog.get("constant", u0=2.0, v0=2.0, w0=2.0)
    assert classify_case(e.structure) is Case.CASE_I
    for xi in ("x1*x2 + exp(x3/10)", "x1^3 - 7", "0"):
        assert check_pde(e.structure, xi).verdict == "Zero"


def test_unequal_constant_entries_constrain_xi():
    e = catalog.get("constant")
    assert check_pde(e.structure, "x1^2").verdict == "NonZero"


def test_lotka_volterra_case3_recipe():
    e = catalog.get("lotka_volterra")
    assert e.case3 is not None and not e.case1
    assert e.case3.target.variables == ("y1", "y2", "y3")
    assert to_string(e.case3.casimir_y) == "y1*y2*y3"


def test_kermack_mckendrick_elimination_recipe():
    e = catalog.get("kermack_mckendrick")
    assert e.elimination.pivot == "x3"
    assert to_string(simplify(parse("k1 - x3") - e.elimination.beta - e.elimination.alpha)) == "0"


def test_summary_line():
    assert catalog.summary(catalog.get("so3")) == "so3: {x3, x2, x1}  C = x1^2 + x2^2 + x3^2"
