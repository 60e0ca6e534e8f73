import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc
from scipy import stats

from hnsm.hfunctions import (
    HFunctionSpec,
    catalog,
    catalog_by_id,
    eval_h,
    uniformity_check,
)

UNIT = st.floats(min_value=1e-6, max_value=1 - 1e-6, allow_nan=False)


def test_catalog_size_and_unique_ids():
    members = catalog()
    assert len(members) == 16
    ids = [m.id for m in members]
    assert len(set(ids)) == 16
    assert not any(m.is_auxiliary for m in members)
    with_aux = catalog(include_auxiliary=True)
    assert len(with_aux) == 48
    assert len({m.id for m in with_aux}) == 48


def test_catalog_by_id_round_trip():
    table = catalog_by_id()
    for m in catalog(include_auxiliary=True):
        assert table[m.id] == m


def test_product_log_closed_form():
    spec = HFunctionSpec("product-log", 1.0, "positive")
    x, y = 0.3, 0.7
    expected = x * y * (1 - np.log(x * y))
    assert eval_h(spec, x, y) == pytest.approx(expected, abs=1e-12)


def test_product_log_matches_gamma_shape_one():
    # negated unit exponentials are the shape-1 gamma recipe
    pl = HFunctionSpec("product-log", 1.0, "positive")
    g1 = HFunctionSpec("gamma-recipe", 1.0, "positive")
    grid = np.linspace(0.05, 0.95, 13)
    a = eval_h(pl, grid[:, None], grid[None, :])
    b = eval_h(g1, grid[:, None], grid[None, :])
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_gamma_half_exponential_convolution():
    # for shape 1/2 the convolution CDF is F12(z) = e^z on z < 0
    spec = HFunctionSpec("gamma-recipe", 0.5, "positive")
    for x, y in [(0.2, 0.8), (0.5, 0.5), (0.05, 0.95)]:
        z = -(sc.gammainccinv(0.5, x) + sc.gammainccinv(0.5, y))
        assert eval_h(spec, x, y) == pytest.approx(np.exp(z), rel=1e-10)


def test_negative_association_is_reflection():
    pos = HFunctionSpec("gamma-recipe", 2.0, "positive")
    neg = HFunctionSpec("gamma-recipe", 2.0, "negative")
    x, y = 0.37, 0.61
    assert eval_h(neg, x, y) == pytest.approx(eval_h(pos, 1 - x, 1 - y), abs=1e-12)


def test_tilt_reflections():
    base = HFunctionSpec("gamma-recipe", 0.5, "positive")
    tx = HFunctionSpec("gamma-recipe", 0.5, "positive", tilt="x")
    ty = HFunctionSpec("gamma-recipe", 0.5, "positive", tilt="y")
    assert tx.is_auxiliary and ty.is_auxiliary
    x, y = 0.25, 0.65
    assert eval_h(tx, x, y) == pytest.approx(eval_h(base, 1 - x, y), abs=1e-12)
    assert eval_h(ty, x, y) == pytest.approx(eval_h(base, x, 1 - y), abs=1e-12)


def test_domain_validation():
    spec = catalog()[0]
    with pytest.raises(ValueError):
        eval_h(spec, 0.0, 0.5)
    with pytest.raises(ValueError):
        eval_h(spec, 0.5, 1.0)
    with pytest.raises(ValueError):
        eval_h(spec, np.array([0.2, 1.2]), np.array([0.5, 0.5]))


@settings(max_examples=50, deadline=None)
@given(x=UNIT, y=UNIT, dx=st.floats(min_value=1e-6, max_value=0.1))
def test_positive_members_nondecreasing(x, y, dx):
    spec = HFunctionSpec("gamma-recipe", 1.5, "positive")
    x2 = min(x + dx, 1 - 1e-9)
    assert eval_h(spec, x2, y) >= eval_h(spec, x, y) - 1e-12


@settings(max_examples=50, deadline=None)
@given(x=UNIT, y=UNIT, dx=st.floats(min_value=1e-6, max_value=0.1))
def test_negative_members_nonincreasing(x, y, dx):
    spec = HFunctionSpec("gamma-recipe", 1.5, "negative")
    x2 = min(x + dx, 1 - 1e-9)
    assert eval_h(spec, x2, y) <= eval_h(spec, x, y) + 1e-12


@settings(max_examples=40, deadline=None)
@given(x=UNIT, y=UNIT)
def test_symmetry_in_arguments(x, y):
    # F1 = F2, so every untilted member is symmetric
    for spec in (
        HFunctionSpec("gamma-recipe", 0.25, "positive"),
        HFunctionSpec("product-log", 1.0, "negative"),
    ):
        assert eval_h(spec, x, y) == pytest.approx(eval_h(spec, y, x), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(x=UNIT, y=UNIT)
def test_output_in_unit_interval(x, y):
    for spec in catalog(include_auxiliary=True):
        v = eval_h(spec, x, y)
        assert 0.0 < v < 1.0


def test_monte_carlo_oracle_gamma_recipe():
    # independent check of F12(F1^{-1}(x) + F1^{-1}(y)) by direct simulation
    # of the two negated gamma variables
    rng = np.random.default_rng(42)
    n = 200_000
    for shape in (0.5, 2.0):
        spec = HFunctionSpec("gamma-recipe", shape, "positive")
        g1 = -rng.gamma(shape, size=n)
        g2 = -rng.gamma(shape, size=n)
        for x, y in [(0.3, 0.6), (0.8, 0.8)]:
            thresh = -(sc.gammainccinv(shape, x) + sc.gammainccinv(shape, y))
            mc = np.mean(g1 + g2 <= thresh)
            assert eval_h(spec, x, y) == pytest.approx(mc, abs=0.005)


def test_uniformity_quick():
    # the defining identity at moderate n, full-scale run lives in acceptance
    for spec in catalog():
        d = uniformity_check(spec, 20_000, seed=1)
        crit = stats.ksone.isf(0.0005, 20_000)  # generous two-sided bound
        assert d < 2 * crit, spec.id


def test_uniformity_check_rejects_tiny_n():
    with pytest.raises(ValueError):
        uniformity_check(catalog()[0], 10)
