"""Topological coarea constant for corank two.

tau(p) = 1/2 int_{S^1} sum_j |lambda_j'| - |sum_j lambda_j'| dtheta with
lambda_j = alpha_j / |<omega, p>|, each alpha counted twice. By pi-periodicity
the integral is taken over the half-circle where <omega, p> > 0, without the
1/2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .core import CarnotStructure, circle_covectors, golden_min, skew_spectrum
from .errors import BadDimensions, NoConvergence, NotCommuting, ZeroTarget

MULTIPLICITY = 2
CLIP = 1e-6
COMMUTE_TOL = 1e-10


def _check(W: CarnotStructure, p) -> np.ndarray:
    if W.l != 2:
        raise BadDimensions("coarea constant is defined here for corank l = 2")
    p = np.asarray(p, dtype=float)
    if p.shape != (2,):
        raise BadDimensions(f"target must have 2 components, got {p.shape}")
    if not np.any(p):
        raise ZeroTarget("target must be nonzero")
    return p


class LambdaCurves:
    """theta -> lambda values (each repeated MULTIPLICITY times) and their derivatives."""

    def __init__(self, W: CarnotStructure, p):
        self.W = W
        self.p = _check(W, p)
        self.theta_p = float(np.arctan2(self.p[1], self.p[0]))
        self.singular_angles = (self.theta_p - 0.5 * np.pi, self.theta_p + 0.5 * np.pi)

    def _eig(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        om = circle_covectors(theta)
        dom = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        H = 1j * np.einsum("nk,kij->nij", om, self.W.matrices)
        dH = 1j * np.einsum("nk,kij->nij", dom, self.W.matrices)
        w, Z = np.linalg.eigh(H)
        m = self.W.d // 2
        w, Z = w[:, ::-1][:, :m], Z[:, :, ::-1][:, :, :m]
        # Hellmann-Feynman: d alpha = z^H dH z
        dw = np.einsum("nam,nab,nbm->nm", Z.conj(), dH, Z).real
        e = om @ self.p
        de = dom @ self.p
        return w, dw, e, de

    def single(self, theta):
        """(lambda, lambda') for each plane, single-counted, on <omega, p> != 0."""
        w, dw, e, de = self._eig(theta)
        ae = np.abs(e)[:, None]
        lam = w / ae
        dlam = dw / ae - w * (np.sign(e) * de)[:, None] / ae ** 2
        return lam, dlam

    def __call__(self, theta) -> np.ndarray:
        return np.repeat(self.single(theta)[0], MULTIPLICITY, axis=1)

    def derivatives(self, theta) -> np.ndarray:
        return np.repeat(self.single(theta)[1], MULTIPLICITY, axis=1)

    def integrand(self, theta) -> np.ndarray:
        d = self.derivatives(theta)
        return np.abs(d).sum(axis=1) - np.abs(d.sum(axis=1))

    def dump(self, n: int = 512):
        """Rows (theta, lambda_1..lambda_{2m}, integrand) on the open half-circle."""
        a, b = self.singular_angles
        t = a + (b - a) * (np.arange(n) + 0.5) / n
        return np.column_stack([t, self(t), self.integrand(t)])


def _breaks(curves: LambdaCurves, a: float, b: float, n: int) -> np.ndarray:
    """Angles in (a, b) where the integrand may fail to be smooth."""
    u = (np.arange(n + 1) + 0.5) / (n + 1)
    t = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * u))
    w, _, _, _ = curves._eig(t)
    lam, dlam = curves.single(t)
    out = []
    # sign changes of each derivative and of their sum
    cols = np.column_stack([dlam, dlam.sum(axis=1)])
    for c in range(cols.shape[1]):
        f = (lambda x, c=c: float(np.column_stack([curves.single(x)[1],
                                                   curves.single(x)[1].sum(axis=1)])[0, c]))
        g = cols[:, c]
        for k in np.where(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            out.append(brentq(f, t[k], t[k + 1], xtol=1e-14))
    # crossings of sorted coefficients and zeros of the smallest one
    m = w.shape[1]
    gaps = [(lambda x, i=i: float(np.diff(curves._eig(x)[0][0])[i] * -1), -np.diff(w, axis=1)[:, i])
            for i in range(m - 1)]
    gaps.append((lambda x: float(curves._eig(x)[0][0, -1]), w[:, -1]))
    tiny = 1e-7 * max(1.0, float(w.max()))
    for f, g in gaps:
        for k in range(1, len(t) - 1):
            if g[k] <= g[k - 1] and g[k] <= g[k + 1]:
                out += _local_zeros(f, t[k - 1], t[k + 1], tiny)
    return np.unique(np.round(out, 13)) if out else np.zeros(0)


def _local_zeros(f, a: float, b: float, tiny: float, sub: int = 33) -> list:
    """Zeros of a nonnegative kinked function in [a, b]; several may share one coarse cell."""
    u = np.linspace(a, b, sub)
    g = np.array([f(x) for x in u])
    out = []
    for k in range(1, sub - 1):
        if g[k] <= g[k - 1] and g[k] <= g[k + 1]:
            x = golden_min(f, u[k - 1], u[k + 1])
            if f(x) <= tiny:
                out.append(x)
    return out


def tau_numeric(W: CarnotStructure, p, refine: int = 1024, tol: float = 1e-6,
                return_parts: bool = False):
    """Adaptive quadrature of the coarea integrand over the half-circle <omega, p> > 0."""
    if refine < 512:
        raise ValueError("refine must be >= 512")
    curves = LambdaCurves(W, p)
    a, b = curves.singular_angles
    lo, hi = a + CLIP, b - CLIP
    knots = np.concatenate([[lo], [x for x in _breaks(curves, a, b, refine) if lo < x < hi], [hi]])
    total, err = 0.0, 0.0
    f = lambda x: float(curves.integrand(x)[0])
    for x0, x1 in zip(knots[:-1], knots[1:]):
        if x1 - x0 <= 1e-14:
            continue
        with warnings.catch_warnings():
            # kinks at the knots trigger roundoff warnings; the error estimate is checked below
            warnings.simplefilter("ignore", IntegrationWarning)
            v, e = quad(f, x0, x1, epsabs=1e-11, epsrel=1e-11, limit=200)
        total += v
        err += e
    # clipped ends: the integrand vanishes identically near the singular angles
    edge = max(f(lo), f(hi), 0.0)
    clipped = 2.0 * CLIP * edge
    if err + clipped > tol * max(1.0, abs(total)):
        raise NoConvergence(f"quadrature error {err:.2e}, clipped mass bound {clipped:.2e}")
    tau = max(total, 0.0)
    return (tau, err, clipped) if return_parts else tau


# --- commuting pairs -----------------------------------------------------

@dataclass(frozen=True)
class CommutingData:
    v: np.ndarray  # (planes, 2): A_k acts on plane j as v_j^k times the rotation
    m: np.ndarray  # det[[p1, v^1], [p2, v^2]] per plane


def commuting_data(W: CarnotStructure, p) -> CommutingData:
    p = _check(W, p)
    A1, A2 = W.matrices
    if np.linalg.norm(A1 @ A2 - A2 @ A1) > COMMUTE_TOL * max(1.0, np.linalg.norm(A1) * np.linalg.norm(A2)):
        raise NotCommuting("A_1 and A_2 do not commute")
    for g in (0.6180339887498949, 1.4142135623730951, 0.31830988618379067):
        spec = skew_spectrum(A1 + g * A2)
        v = []
        ok = True
        for X, Y in spec.frames:
            # A X = -v Y on a common invariant plane
            row = [float(X @ A @ Y) for A in (A1, A2)]
            ok &= all(np.linalg.norm(A @ X + r * Y) <= 1e-8 * max(1.0, np.linalg.norm(A))
                      for A, r in zip((A1, A2), row))
            v.append(row)
        if ok:
            break
    else:
        raise NotCommuting("could not find common invariant planes")
    v = np.array(v).reshape(-1, 2)
    m = p[0] * v[:, 1] - p[1] * v[:, 0]
    return CommutingData(v, m)


def tau_commuting(W: CarnotStructure, p) -> float:
    """Closed form: on the half-circle <omega, p> > 0 the integrand is
    (sum |m_j| - |sum sgn<omega, v_j> m_j|) / <omega, p>^2, piecewise constant numerator."""
    p = _check(W, p)
    data = commuting_data(W, p)
    th_p = float(np.arctan2(p[1], p[0]))
    a, b = th_p - 0.5 * np.pi, th_p + 0.5 * np.pi
    cuts = []
    for vj in data.v:
        if not np.any(vj):
            continue
        z = float(np.arctan2(vj[1], vj[0])) + 0.5 * np.pi  # <omega, v> = 0
        for c in (z - 2 * np.pi, z - np.pi, z, z + np.pi, z + 2 * np.pi):
            if a < c < b:
                cuts.append(c)
    knots = np.concatenate([[a], np.sort(cuts), [b]])
    pn2 = float(p @ p)
    total = 0.0
    for x0, x1 in zip(knots[:-1], knots[1:]):
        mid = circle_covectors(0.5 * (x0 + x1))
        sg = np.sign(data.v @ mid)
        num = np.abs(data.m).sum() - abs(float(sg @ data.m))
        if num <= 1e-14 * max(1.0, np.abs(data.m).sum()):
            continue
        # int d theta / <omega, p>^2 = tan(theta - theta_p) / |p|^2; finite on interior pieces
        total += num * (np.tan(x1 - th_p) - np.tan(x0 - th_p)) / pn2
    return MULTIPLICITY * total


# --- asymptotic slope ----------------------------------------------------

@dataclass(frozen=True)
class SlopeResult:
    slope: float
    tau: float
    rel_err: float
    s: tuple
    totals: tuple
    flags: tuple = ()  # "critical-level" when some s sits on a critical energy


def slope_check(W: CarnotStructure, p, s_list, grid: int = 1024, tau: float | None = None) -> SlopeResult:
    """Least-squares slope of b(Omega_p^s) against s over the upper half of s_list."""
    from .census import census
    from .topology import betti_from_profile, index_profile_analytic

    p = _check(W, p)
    s_list = [float(s) for s in s_list]
    if len(s_list) < 5:
        raise ValueError("slope_check needs at least 5 values of s")
    if any(b <= a for a, b in zip(s_list, s_list[1:])):
        raise ValueError("s_list must be increasing")
    base = census(W, p, s_list[-1] / 100.0, grid)
    if not len(base):
        raise ValueError("largest s must be at least 100 times the smallest census energy")
    tables = [betti_from_profile(index_profile_analytic(W, p, s, grid)) for s in s_list]
    totals = [b.total for b in tables]
    flags = tuple(sorted({f for b in tables for f in b.flags}))
    h = len(s_list) // 2
    slope = float(np.polyfit(s_list[h:], totals[h:], 1)[0])
    t = tau_numeric(W, p) if tau is None else tau
    return SlopeResult(slope, t, abs(slope - t) / t if t else float("inf"), tuple(s_list), tuple(totals),
                       flags)
