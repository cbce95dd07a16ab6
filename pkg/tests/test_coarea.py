import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carnot_paths.coarea import (MULTIPLICITY, LambdaCurves, commuting_data, slope_check,
                                 tau_commuting, tau_numeric)
from carnot_paths.errors import BadDimensions, NotCommuting, ZeroTarget

from conftest import random_commuting, random_structure


def test_worked_example(commuting):
    assert tau_commuting(commuting, [0.0, 1.0]) == pytest.approx(6.0, rel=1e-12)
    assert tau_numeric(commuting, [0.0, 1.0]) == pytest.approx(6.0, rel=1e-8)


def test_worked_example_single_count(commuting):
    data = commuting_data(commuting, [0.0, 1.0])
    assert np.allclose(np.sort(np.abs(data.m)), [1.0, 2.0])
    assert tau_commuting(commuting, [0.0, 1.0]) / MULTIPLICITY == pytest.approx(3.0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), d=st.sampled_from([4, 6, 8]))
def test_closed_form_matches_quadrature(seed, d):
    rng = np.random.default_rng(seed)
    W = random_commuting(rng, d)
    p = rng.standard_normal(2)
    t = tau_commuting(W, p)
    assert abs(tau_numeric(W, p) - t) <= 1e-4 * max(t, 1e-12) + 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10 ** 6), c=st.floats(0.1, 10.0))
def test_homogeneity_in_p(seed, c):
    # lambda scales like 1/|p|, so tau(c p) = tau(p) / c
    rng = np.random.default_rng(seed)
    W = random_structure(rng, 4, 2)
    p = rng.standard_normal(2)
    assert tau_numeric(W, c * p) == pytest.approx(tau_numeric(W, p) / c, rel=1e-6, abs=1e-9)


def test_doubling_halves(commuting):
    assert 2 * tau_commuting(commuting, [0.0, 2.0]) == pytest.approx(tau_commuting(commuting, [0.0, 1.0]))


def test_integrand_properties(rng):
    W = random_structure(rng, 6, 2)
    c = LambdaCurves(W, rng.standard_normal(2))
    a, b = c.singular_angles
    t = np.linspace(a, b, 401)[1:-1]
    assert np.all(c.integrand(t) >= -1e-12)
    lam = c(t)
    assert lam.shape == (len(t), MULTIPLICITY * (W.d // 2))
    assert np.all(lam >= 0)
    # pi-periodicity: omega -> -omega leaves alpha and |<omega, p>| unchanged
    assert np.allclose(c(t + np.pi), lam)
    # derivatives against central differences
    h = 1e-6
    fd = (c(t + h) - c(t - h)) / (2 * h)
    assert np.allclose(c.derivatives(t), fd, rtol=1e-4, atol=1e-4)
    rows = c.dump(64)
    assert rows.shape == (64, 2 + lam.shape[1])


def test_errors(rng):
    W = random_structure(rng, 4, 2)
    with pytest.raises(NotCommuting):
        tau_commuting(W, [1.0, 0.0])
    with pytest.raises(ZeroTarget):
        tau_numeric(W, [0.0, 0.0])
    with pytest.raises(BadDimensions):
        tau_numeric(random_structure(rng, 4, 1), [1.0])
    with pytest.raises(BadDimensions):
        tau_numeric(W, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        tau_numeric(W, [1.0, 0.0], refine=100)


def test_slope_check_preconditions(commuting):
    with pytest.raises(ValueError):
        slope_check(commuting, [0.0, 1.0], [10, 20, 30, 40])
    with pytest.raises(ValueError):
        slope_check(commuting, [0.0, 1.0], [10, 20, 15, 40, 50])
    with pytest.raises(ValueError):
        slope_check(commuting, [0.0, 1.0], [0.1, 0.2, 0.3, 0.4, 0.5])


def test_slope_check_small(commuting):
    r = slope_check(commuting, [0.0, 1.0], [6.3, 12.6, 25.2, 50.4, 100.7])
    assert r.tau == pytest.approx(6.0)
    assert len(r.totals) == 5 and list(r.totals) == sorted(r.totals)
    assert 2.0 < r.slope < 4.0  # the single-counted constant, see the acceptance suite
