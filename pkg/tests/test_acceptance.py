"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line (printed and repeated in the terminal summary).
"""
import time

import numpy as np
import pytest

from carnot_paths.census import base_energy, census, fit_exponent, morse_bott_polynomial
from carnot_paths.coarea import MULTIPLICITY, slope_check, tau_commuting, tau_numeric
from carnot_paths.core import J2, CarnotStructure, heisenberg, omega_matrix, skew_spectrum
from carnot_paths.endpoint import (Control, endpoint_ode, endpoint_quadratic, energy, hessian,
                                   omega_q_operator, project_exponential)
from carnot_paths.topology import (ArcSet, betti_from_profile, index_profile_analytic,
                                   index_profile_finite, relative_betti)

from conftest import block_diag_rot, random_commuting, random_structure
from test_topology import simplicial_relative, to_arcset, M

pytestmark = pytest.mark.acceptance

OFFSET = 1.0137  # keeps energy bounds off critical levels


def truncated_index_l1(W, p, s, L):
    """i^- of omega q - omega p J / s on zero-mean controls of T^L, omega = -sgn p."""
    om = -np.sign(p)
    H = omega_q_operator(W, [om], L) - om * p * np.eye(2 * W.d * L) / s
    return int(np.sum(np.linalg.eigvalsh(H) < 0))


def test_1_heisenberg_betti(report):
    W, z = heisenberg(), 1.7
    E1 = census(W, [z], 10 * z).manifolds[0].energy
    fails, worst = [], 0.0
    for s in E1 * np.array([1.01, 1.5, 2.3, 3.9, 7.2, 12.5, 20.01]):
        t = time.perf_counter()
        prof = index_profile_analytic(W, [z], s)
        bt = betti_from_profile(prof)
        worst = max(worst, time.perf_counter() - t)
        n = int(np.floor(s / z))
        ok = bt.total == 2 and bt.top_degree() == 2 * n - 1
        ok &= prof.values[0] == truncated_index_l1(W, z, s, n + 3)
        if not ok:
            fails.append(s)
    assert report(1, not fails and worst < 1.0,
                  f"total 2 and top degree 2 floor(s/z) - 1 on 7 energies, failures {fails}, "
                  f"slowest {worst:.3f} s")


def test_2_heisenberg_census(report):
    W, z = heisenberg(), 0.8
    E1 = base_energy(W, [z])
    bad = []
    for s in E1 * np.array([1.0, 2.5, 6.2, 11.9]):
        rep = census(W, [z], s)
        if len(rep) != int(np.floor(s / E1 + 1e-12)):
            bad.append(("count", s))
        for n, m in enumerate(rep.manifolds, start=1):
            neg = int(np.sum(np.linalg.eigvalsh(hessian(W, m.omega, 2 * n)) < -1e-9))
            u = project_exponential(W, m.sample_control, m.max_wave)
            jdef = abs(energy(u) - float(m.omega @ [z]))
            if m.nu != 1 or m.index != 2 * (n - 1) or neg != m.index or jdef > 1e-9:
                bad.append((n, m.nu, m.index, neg, jdef))
    assert report(2, not bad, f"count floor(s/E1), nu 1, index 2(n-1) = Hessian count, J = omega(p); "
                              f"E1 = {E1:.6g}, failures {bad[:3]}")


def test_3_endpoint_oracle(report):
    rng = np.random.default_rng(3)
    t0, worst = time.perf_counter(), 0.0
    for _ in range(100):
        d = int(rng.integers(2, 7))
        l = int(rng.integers(1, min(3, d * (d - 1) // 2) + 1))
        W = random_structure(rng, d, l)
        u = Control.random(rng, d, int(rng.integers(1, 9)))
        a, b = endpoint_quadratic(W, u).vector(), endpoint_ode(W, u, steps=4096).vector()
        worst = max(worst, np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
    dt = time.perf_counter() - t0
    assert report(3, worst <= 1e-6 and dt < 30, f"worst relative error {worst:.2e}, {dt:.1f} s")


def test_4_omega_q_spectrum(report):
    rng = np.random.default_rng(4)
    W = random_structure(rng, 4, 2)
    om, L = rng.standard_normal(2), 8
    al = skew_spectrum(omega_matrix(W, om)).alphas
    want = np.sort([sg * a / k for a in al for k in range(1, L + 1) for sg in (1, -1) for _ in (0, 1)])
    got = np.linalg.eigvalsh(omega_q_operator(W, om, L))
    err = float(np.max(np.abs(np.sort(got) - want)))
    assert report(4, err <= 1e-8, f"max deviation {err:.2e} over {len(want)} eigenvalues")


def test_5_finite_quadrics(report):
    bad = []
    for N in range(3, 13):
        for a in range(N + 1):
            q1 = np.diag([-1.0] * a + [1.0] * (N - a))
            bt = betti_from_profile(index_profile_finite(q1, np.zeros((N, N)), 256))
            want: dict = {}
            if 0 < a < N:
                for j in (a - 1, N - 1 - a, N - 2):
                    want[j] = want.get(j, 0) + 1
            if bt.betti != want:
                bad.append((N, a))
    # relative homology against the simplicial oracle on random nested configurations
    rng = np.random.default_rng(5)
    mism = 0
    for _ in range(400):
        k = int(rng.integers(1, 7))
        cuts = np.sort(rng.choice(M, 2 * k, replace=False))
        A = []
        for i in range(k):
            # keep a gap of at least one vertex before the next arc
            nxt = cuts[(2 * i + 2) % (2 * k)] + (M if i == k - 1 else 0)
            a, b = int(cuts[2 * i]), int(min(cuts[2 * i + 1], nxt - 2))
            if b >= a:
                A.append((a, b))
        B = []
        for a, b in A:
            if rng.random() < 0.7:
                x = int(rng.integers(a, b + 1))
                B.append((x, int(rng.integers(x, b + 1))))
        if relative_betti(to_arcset(A), to_arcset(B)) != simplicial_relative(A, B):
            mism += 1
    assert report(5, not bad and not mism,
                  f"product-of-spheres mismatches {bad}, simplicial mismatches {mism}/400")


def test_6_coarea_closed_form(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        W = random_commuting(rng, int(rng.choice([4, 6, 8])))
        p = rng.standard_normal(2)
        t = tau_commuting(W, p)
        if t > 0:
            worst = max(worst, abs(tau_numeric(W, p) - t) / t)
    Wc = CarnotStructure.from_list([block_diag_rot([1.0, 2.0]), block_diag_rot([2.0, 1.0])])
    tc, tn = tau_commuting(Wc, [0.0, 1.0]), tau_numeric(Wc, [0.0, 1.0])
    ok = worst <= 1e-4 and abs(tc - 6) <= 1e-9 and abs(tn - 6) / 6 <= 1e-4
    ok &= abs(tc / MULTIPLICITY - 3) <= 1e-9
    assert report(6, ok, f"worst relative error {worst:.2e}; worked instance {tn:.10f} (closed form "
                         f"{tc:.10f}, single-counted {tc / MULTIPLICITY:.10f})")


@pytest.mark.xfail(strict=True, reason="Betti slope converges to the single-counted constant; "
                                       "see decisions ledger")
def test_7_coarea_asymptotic(report):
    Wc = CarnotStructure.from_list([block_diag_rot([1.0, 2.0]), block_diag_rot([2.0, 1.0])])
    p = [0.0, 1.0]
    E1 = base_energy(Wc, p)
    t0 = time.perf_counter()
    # s_max = 200 base energies, nudged off the critical levels (multiples of 1/3 here)
    r = slope_check(Wc, p, E1 * 1.001 * np.array([12.5, 25.0, 50.0, 100.0, 200.0]))
    dt = time.perf_counter() - t0
    single = r.tau / MULTIPLICITY
    assert not r.flags
    report(7, r.rel_err <= 0.1 and dt < 120,
           f"slope {r.slope:.4f} vs tau {r.tau:.4f}: rel err {r.rel_err:.3f}; totals {r.totals}; "
           f"{dt:.1f} s; diagnostic vs single-counted {single:.4f}: "
           f"rel err {abs(r.slope - single) / single:.3f}")
    assert r.rel_err <= 0.1 and dt < 120


def test_8_morse_bott_inequality(report):
    violations, not_strict = [], []
    # Heisenberg sweep
    W, z = heisenberg(), 1.0
    full = census(W, [z], 40.5)
    for s in np.geomspace(1.5, 40.5, 10):
        b = betti_from_profile(index_profile_analytic(W, [z], s)).total
        if b > morse_bott_polynomial(full.restrict(s))(1):
            violations.append(("heisenberg", s))
    # random corank two
    rng = np.random.default_rng(2024)
    eb, em = [], []
    for i in range(20):
        d = int(rng.integers(4, 7))
        B = rng.standard_normal((2, d, d))
        W = CarnotStructure.from_list(B - B.transpose(0, 2, 1))
        p = rng.standard_normal(2)
        E1 = base_energy(W, p)
        S = np.geomspace(4.0, 40.0, 10) * E1 * OFFSET
        full = census(W, p, S[-1])
        bs = [betti_from_profile(index_profile_analytic(W, p, s)).total for s in S]
        ms = [morse_bott_polynomial(full.restrict(s))(1) for s in S]
        violations += [(i, s) for s, b, m in zip(S, bs, ms) if b > m]
        if not bs[-1] < ms[-1]:
            not_strict.append(i)
        eb.append(fit_exponent(S[5:], bs[5:]))
        em.append(fit_exponent(S[5:], ms[5:]))
    mb, mm = float(np.median(eb)), float(np.median(em))
    ok = not violations and not not_strict and abs(mb - 1.0) <= 0.2 and abs(mm - 2.0) <= 0.3
    report(8, ok, f"violations {violations}, non-strict {not_strict}; median exponents: Betti {mb:.3f}, "
                  f"Morse-Bott {mm:.3f} (per structure {min(eb):.2f}..{max(eb):.2f} and "
                  f"{min(em):.2f}..{max(em):.2f})")
    assert ok


def _census_key(rep, scale):
    """(scaled energy, omega, index, nu) sorted with ties in energy broken by omega."""
    rows = [(m.energy * scale, tuple(m.omega), m.index, m.nu) for m in rep.manifolds]
    return sorted(rows, key=lambda r: (round(r[0], 7), tuple(np.round(r[1], 7))))


def test_9_scaling_law(report):
    rng = np.random.default_rng(9)
    cases = [(heisenberg(), np.array([1.3]))]
    cases.append((CarnotStructure.from_list([block_diag_rot([1.0, 2.0]), block_diag_rot([2.0, 1.0])]),
                  np.array([0.0, 1.0])))
    for _ in range(3):
        cases.append((random_structure(rng, int(rng.integers(4, 7)), 2), rng.standard_normal(2)))
    worst, bad = 0.0, []
    for k, (W, p) in enumerate(cases):
        E1 = base_energy(W, p)
        for eps in (0.5, 0.1):
            c = 6.0 * eps ** 2 * E1 * OFFSET  # six base energies of the target eps^2 p
            a = _census_key(census(W, eps ** 2 * p, c), 1.0)
            b = _census_key(census(W, p, c / eps ** 2), eps ** 2)
            if len(a) != len(b):
                bad.append((k, eps, "count"))
                continue
            for (ea, oa, ia, na), (eb, ob, ib, nb) in zip(a, b):
                worst = max(worst, float(np.max(np.abs(np.subtract(oa, ob)))))
                if abs(ea - eb) > 1e-9 * max(1.0, ea) or (ia, na) != (ib, nb):
                    bad.append((k, eps, "manifold"))
            ba = betti_from_profile(index_profile_analytic(W, eps ** 2 * p, c))
            bb = betti_from_profile(index_profile_analytic(W, p, c / eps ** 2))
            if ba.betti != bb.betti:
                bad.append((k, eps, "betti"))
    assert report(9, not bad and worst <= 1e-9,
                  f"{len(cases)} structures, max multiplier deviation {worst:.2e}, failures {bad[:5]}")
