import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carnot_paths.census import census
from carnot_paths.core import heisenberg, omega_matrix, skew_spectrum
from carnot_paths.endpoint import (Control, EndPoint, ExponentialControl, endpoint_ode,
                                   endpoint_quadratic, energy, exponential_trajectory_control,
                                   hessian, lagrange_residual, omega_q_operator,
                                   project_exponential, shoot, solve_endpoint, solve_multistart,
                                   trajectory)
from carnot_paths.errors import DimensionMismatch, NoConvergence, TruncationTooSmall

from conftest import random_structure


def _rel(a, b):
    return np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), d=st.integers(2, 6), L=st.integers(1, 6),
       zero_mean=st.booleans())
def test_quadratic_matches_ode(seed, d, L, zero_mean):
    rng = np.random.default_rng(seed)
    W = random_structure(rng, d, int(rng.integers(1, min(3, d * (d - 1) // 2) + 1)))
    u = Control.random(rng, d, L, zero_mean)
    a, b = endpoint_quadratic(W, u), endpoint_ode(W, u)
    assert _rel(a.vector(), b.vector()) <= 1e-6


def test_heisenberg_circle():
    # one turn of the unit circle: J = pi, enclosed signed area pi
    u = Control(np.zeros(2), np.array([[np.sqrt(np.pi), 0.0]]), np.array([[0.0, np.sqrt(np.pi)]]))
    assert np.isclose(energy(u), np.pi)
    ep = endpoint_quadratic(heisenberg(), u)
    assert np.allclose(ep.horizontal, 0.0)
    assert np.isclose(abs(ep.vertical[0]), np.pi)


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_homogeneity(rng, c):
    W = random_structure(rng, 4, 2)
    u = Control.random(rng, 4, 3)
    assert np.allclose(endpoint_quadratic(W, u.scaled(c)).vertical,
                       c ** 2 * endpoint_quadratic(W, u).vertical)
    assert np.isclose(energy(u.scaled(c)), c ** 2 * energy(u))


@pytest.mark.parametrize("eps", [0.5, 0.1])
def test_dilation(rng, eps):
    W = random_structure(rng, 5, 2)
    u = Control.random(rng, 5, 4)
    p, s = endpoint_quadratic(W, u).vertical, energy(u)
    v = u.scaled(eps)
    assert np.allclose(endpoint_quadratic(W, v).vertical, eps ** 2 * p)
    assert np.isclose(energy(v), eps ** 2 * s)


def test_energy_is_half_l2_norm(rng):
    u = Control.random(rng, 3, 5, zero_mean=False)
    t = np.linspace(0, 2 * np.pi, 20001)
    val = np.sum(u(t) ** 2, axis=1)
    integral = np.sum(0.5 * (val[1:] + val[:-1])) * (t[1] - t[0])
    assert np.isclose(energy(u), 0.5 * integral, rtol=1e-6)


def test_control_round_trip(rng):
    u = Control.random(rng, 3, 4, zero_mean=False)
    v = Control.from_dict(u.to_dict())
    assert np.array_equal(u.vector(), v.vector()) and np.array_equal(u.mean, v.mean)
    assert np.array_equal(Control.from_vector(u.vector(), 3, 4).U, u.U)


def test_dimension_mismatch(heis=heisenberg()):
    with pytest.raises(DimensionMismatch):
        endpoint_quadratic(heis, Control.zeros(3, 2))


def test_trajectory_csv_shape(rng):
    W = random_structure(rng, 3, 2)
    t, x, y = trajectory(W, Control.random(rng, 3, 2), steps=128)
    assert t.shape == (129,) and x.shape == (129, 3) and y.shape == (129, 2)


def test_omega_q_spectrum(rng):
    W = random_structure(rng, 4, 2)
    om = rng.standard_normal(2)
    L = 5
    al = skew_spectrum(omega_matrix(W, om)).alphas
    expect = np.sort([s * a / k for a in al for k in range(1, L + 1) for s in (1, -1) for _ in (0, 1)])
    got = np.linalg.eigvalsh(omega_q_operator(W, om, L))
    assert np.allclose(np.sort(got), expect, atol=1e-10)


def test_hessian_index_heisenberg():
    W = heisenberg()
    for n in range(1, 6):
        H = hessian(W, [float(n)], 2 * n)
        w = np.linalg.eigvalsh(H)
        assert np.sum(w < -1e-9) == 2 * (n - 1)
        assert np.sum(np.abs(w) < 1e-9) == 2  # the circle of geodesics (and its phase)


def test_census_geodesics_are_critical(rng):
    W = random_structure(rng, 4, 2)
    p = rng.standard_normal(2)
    rep = census(W, p, 3.0)
    assert len(rep)
    for m in rep.manifolds:
        u = project_exponential(W, m.sample_control, m.max_wave)
        assert lagrange_residual(W, m.omega, u) <= 1e-8
        assert np.linalg.norm(endpoint_quadratic(W, u).vertical - p) <= 1e-7
        assert abs(energy(u) - float(m.omega @ p)) <= 1e-8 * max(1.0, m.energy)


def test_project_exponential_truncation():
    W = heisenberg()
    e = ExponentialControl([3.0], [1.0, 0.0])
    with pytest.raises(TruncationTooSmall):
        project_exponential(W, e, 2)
    u = project_exponential(W, e, 3)
    assert np.isclose(energy(u), np.pi)


def test_project_non_periodic_converges(rng):
    # a non-resonant flow jumps at t = 2 pi, so the Fourier tail decays like 1/L
    W = random_structure(rng, 4, 2)
    e = ExponentialControl(rng.standard_normal(2), rng.standard_normal(4))
    ref = endpoint_ode(W, exponential_trajectory_control(e, W), steps=8192)
    tails, errs = [], []
    for L in (10, 40, 160):
        u, tail = project_exponential(W, e, L, return_tail=True)
        assert np.linalg.norm(endpoint_ode(W, u, 8192).horizontal - ref.horizontal) < 1e-10
        tails.append(tail)
        errs.append(np.linalg.norm(endpoint_quadratic(W, u).vertical - ref.vertical))
    assert tails[0] > 3 * tails[1] > 9 * tails[2]
    assert errs[0] > 3 * errs[1] > 9 * errs[2]


def test_shoot_matches_ode(rng):
    for d, l in [(2, 1), (4, 2), (5, 3)]:
        W = random_structure(rng, d, l)
        e = ExponentialControl(rng.standard_normal(l), rng.standard_normal(d))
        a = shoot(W, e)
        b = endpoint_ode(W, exponential_trajectory_control(e, W), steps=8192)
        assert a.distance(b) <= 1e-8 * max(1.0, np.linalg.norm(b.vector()))


def test_solve_endpoint_recovers_geodesic(rng):
    W = random_structure(rng, 4, 2)
    e = ExponentialControl(rng.standard_normal(2) * 0.5, rng.standard_normal(4))
    target = shoot(W, e)
    init = ExponentialControl(e.omega + 1e-2, e.u0 - 1e-2)
    sol = solve_endpoint(W, target, init)
    assert shoot(W, sol).distance(target) < 1e-8 * max(1.0, np.linalg.norm(target.vector()))


def test_solve_multistart_heisenberg():
    W = heisenberg()
    target = EndPoint(np.zeros(2), np.array([np.pi]))
    inits = [ExponentialControl([n + 0.05], [np.sqrt(n) * 0.97, 0.02]) for n in (1, 2)]
    sols = solve_multistart(W, target, inits)
    assert sorted(round(float(s.omega[0]), 6) for s in sols) == [1.0, 2.0]


def test_solve_endpoint_dimension_checks():
    W = heisenberg()
    with pytest.raises(DimensionMismatch):
        solve_endpoint(W, EndPoint(np.zeros(3), np.zeros(1)), ExponentialControl([1.0], [1.0, 0.0]))


def test_solve_endpoint_no_convergence():
    W = heisenberg()
    target = EndPoint(np.array([1.0, 0.0]), np.array([1.0]))
    with pytest.raises(NoConvergence):
        solve_endpoint(W, target, ExponentialControl([0.0], [0.0, 0.0]), max_iter=2)
