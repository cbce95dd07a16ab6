"""Lagrange multipliers and critical manifolds of J on paths to a vertical point.

Conventions (see endpoint): geodesic controls are exp(-t omega A) u0, the
stationarity equation is u = omega Q u, and J(u) = omega(q(u)). A plane of
omega A with coefficient alpha_i(omega) = n carries a circle of geodesics of
wave number n; the critical manifold of omega is a torus of dimension equal
to the number of such resonances.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from math import comb

from scipy.optimize import brentq, minimize_scalar

from .core import (CarnotStructure, circle_covectors, golden_min, omega_matrix, pencil_alphas,
                   skew_spectrum)
from .endpoint import ExponentialControl
from .errors import BadDimensions, GridTooCoarse, NotAMultiplier, RankMismatch, ZeroTarget

TOL_INT = 1e-9
MERGE_TOL = 1e-8


@dataclass(frozen=True)
class CriticalManifold:
    omega: np.ndarray
    resonances: tuple  # ((plane index, n), ...)
    nu: int
    energy: float
    index: int
    u0: np.ndarray  # one point of the manifold: u(t) = exp(-t omega A) u0
    flags: tuple = ()
    wnorm: float = 0.0  # |omega A|_F
    target: np.ndarray | None = None  # the vertical point p

    @property
    def sample_control(self) -> ExponentialControl:
        return ExponentialControl(self.omega, self.u0)

    @property
    def betti(self) -> int:
        return 2 ** self.nu

    @property
    def max_wave(self) -> int:
        return max(n for _, n in self.resonances)


@dataclass(frozen=True)
class CensusReport:
    manifolds: tuple
    s_max: float
    p: np.ndarray
    cone_constant: float
    counts_by_nu: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __len__(self):
        return len(self.manifolds)

    def restrict(self, s: float) -> "CensusReport":
        """The census for a smaller energy bound, read off this one."""
        if s > self.s_max * (1 + 1e-12):
            raise ValueError("can only restrict to a smaller energy bound")
        ms = tuple(m for m in self.manifolds if m.energy <= s * (1 + 1e-12))
        return _finish(ms, s, self.p, self.warnings)


def omega_norm(W: CarnotStructure, omega) -> float:
    """Frobenius norm of omega A; bounds every alpha_i(omega) from above."""
    return float(np.linalg.norm(omega_matrix(W, omega)))


def _finish(manifolds, s, p, warnings=()) -> CensusReport:
    ms = tuple(sorted(manifolds, key=lambda m: (m.energy, tuple(m.omega))))
    cp = max((m.wnorm / m.energy for m in ms), default=0.0)
    counts: dict = {}
    for m in ms:
        counts[m.nu] = counts.get(m.nu, 0) + 1
    return CensusReport(ms, float(s), np.asarray(p, dtype=float), cp, dict(sorted(counts.items())),
                        tuple(warnings))


def index_from_alphas(alphas, tol: float = TOL_INT) -> np.ndarray:
    """2 * #{(i, k): k >= 1, alpha_i / k > 1 + tol}, vectorised over the last axis."""
    a = np.asarray(alphas, dtype=float) / (1.0 + tol)
    cnt = np.where(a > 0, np.ceil(a) - 1, 0)
    return (2 * cnt.sum(axis=-1)).astype(int)


def manifold_index(W: CarnotStructure, omega, tol_int: float = TOL_INT) -> int:
    al = skew_spectrum(omega_matrix(W, omega)).alphas
    n = np.rint(al)
    if not np.any((n >= 1) & (np.abs(al - n) <= tol_int * np.maximum(1.0, al))):
        raise NotAMultiplier(f"no coefficient of omega A is a positive integer: {al}")
    return int(index_from_alphas(al, tol_int))


# --- corank one ----------------------------------------------------------

def enumerate_l1(W: CarnotStructure, p, s: float, tol_int: float = TOL_INT) -> CensusReport:
    if W.l != 1:
        raise BadDimensions("enumerate_l1 needs corank l = 1")
    p = float(np.atleast_1d(p)[0])
    if p == 0.0:
        raise ZeroTarget("target must be nonzero")
    sgn = np.sign(p)
    spec = skew_spectrum(W.matrices[0])
    beta, frames = spec.alphas, spec.frames
    cand = []  # (omega, plane, n)
    for i, b in enumerate(beta):
        nmax = int(np.floor(s * b / abs(p) * (1 + 1e-12)))
        for n in range(1, nmax + 1):
            cand.append((sgn * n / b, i, n))
    cand.sort()
    groups: list = []
    for om, i, n in cand:
        if groups and abs(groups[-1][0] - om) <= MERGE_TOL * max(1.0, abs(om)):
            groups[-1][1].append((i, n))
        else:
            groups.append([om, [(i, n)]])
    out = []
    for om, res in groups:
        omega = np.array([om])
        E = om * p
        if E > s * (1 + 1e-12):
            continue
        # split p evenly between resonant planes; q(rho X_i) = pi rho^2 om beta_i^2 / n^2
        u0 = np.zeros(W.d)
        for i, n in res:
            rho2 = (p / len(res)) * n ** 2 / (np.pi * om * beta[i] ** 2)
            u0 += np.sqrt(rho2) * frames[i, 0]
        al = beta * abs(om)
        flags = ("coincident",) if len(res) > 1 else ()
        out.append(CriticalManifold(omega, tuple(sorted(res)), len(res), float(E),
                                    int(index_from_alphas(al, tol_int)), u0, flags,
                                    omega_norm(W, omega), np.array([p])))
    return _finish(out, s, [p])


# --- corank two ----------------------------------------------------------

def _eig_frames(W, theta):
    """Positive spectrum of i*omega_hat(theta) A with half-line directions.

    Returns alphas (n, m) descending, X (n, m, d) unit vectors of the planes and
    h (n, m, 2): h_k = -<X, A_k omega_hat A X>, the direction of q on the plane.
    """
    om = circle_covectors(np.atleast_1d(theta))
    M = np.einsum("nk,kij->nij", om, W.matrices)
    w, Z = np.linalg.eigh(1j * M)
    m = W.d // 2
    w = w[:, ::-1][:, :m]
    Z = Z[:, :, ::-1][:, :, :m]
    # beta_k = Im(z^H A_k z);  h_k = -alpha * beta_k
    beta = np.einsum("nam,kab,nbm->nmk", Z.conj(), W.matrices, Z).imag
    h = -w[:, :, None] * beta
    X = np.sqrt(2.0) * np.transpose(Z.real, (0, 2, 1))
    return np.clip(w, 0.0, None), X, h


def _cross(h, p):
    return h[..., 0] * p[1] - h[..., 1] * p[0]


def _cone_coeffs(hi, hj, p):
    """Solve c_i hi + c_j hj = p (batched 2x2)."""
    det = hi[..., 0] * hj[..., 1] - hi[..., 1] * hj[..., 0]
    ci = (p[0] * hj[..., 1] - p[1] * hj[..., 0]) / det
    cj = (hi[..., 0] * p[1] - hi[..., 1] * p[0]) / det
    return ci, cj


def _bracket_solve(f, a, b, fa, fb, iters=80, xtol=1e-15):
    """Vectorised Illinois regula falsi on brackets with fa*fb <= 0."""
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    side = np.zeros(a.shape, dtype=int)
    for _ in range(iters):
        live = np.abs(b - a) > xtol * np.maximum(1.0, np.abs(a))
        if not live.any():
            break
        den = fb - fa
        c = np.where(den != 0, (a * fb - b * fa) / np.where(den != 0, den, 1.0), 0.5 * (a + b))
        c = np.where((c <= np.minimum(a, b)) | (c >= np.maximum(a, b)), 0.5 * (a + b), c)
        fc = f(c)
        left = np.sign(fc) == np.sign(fa)
        # replace a when fc has the sign of fa, else b; Illinois halving on repeats
        na = np.where(left, c, a)
        nfa = np.where(left, fc, fa)
        nb = np.where(left, b, c)
        nfb = np.where(left, fb, fc)
        nfb = np.where(left & (side == 1), 0.5 * nfb, nfb)
        nfa = np.where(~left & (side == -1), 0.5 * nfa, nfa)
        side = np.where(left, 1, -1)
        done = fc == 0
        na, nb = np.where(done, c, na), np.where(done, c, nb)
        a = np.where(live, na, a)
        b = np.where(live, nb, b)
        fa = np.where(live, nfa, fa)
        fb = np.where(live, nfb, fb)
    return np.where(np.abs(fa) <= np.abs(fb), a, b)


def _refined_grid(fun, lo, hi, grid):
    """Uniform grid on (lo, hi) with the interior extrema of ``fun`` (columns) inserted."""
    t = lo + (hi - lo) * (np.arange(grid + 1) + 0.5) / (grid + 1)
    v = fun(t)
    extra = []
    for c in range(v.shape[1]):
        dv = np.diff(v[:, c])
        idx = np.where(dv[:-1] * dv[1:] < 0)[0]
        for k in idx:
            a, b = t[k], t[k + 2]
            for sign in (1.0, -1.0):
                r = minimize_scalar(lambda x: sign * fun(np.array([x]))[0, c], bounds=(a, b),
                                    method="bounded", options={"xatol": 1e-13})
                if a < r.x < b:
                    extra.append(r.x)
    if extra:
        t = np.unique(np.concatenate([t, extra]))
    return t


def enumerate_l2(W: CarnotStructure, p, s: float, grid: int = 1024, tol_int: float = TOL_INT,
                 refine_check: bool = False) -> CensusReport:
    if W.l != 2:
        raise BadDimensions("enumerate_l2 needs corank l = 2")
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        raise ZeroTarget("target must be nonzero")
    if grid < 256:
        raise ValueError("grid must be >= 256")
    ms, warns = _enumerate_l2(W, p, s, grid, tol_int)
    if refine_check:
        ms2, _ = _enumerate_l2(W, p, s, 2 * grid, tol_int)
        if len(ms2) != len(ms):
            raise GridTooCoarse(f"refining the grid changed the census: {len(ms)} -> {len(ms2)}")
    return _finish(ms, s, p, warns)


def _enumerate_l2(W, p, s, grid, tol_int):
    m = W.d // 2
    th_p = np.arctan2(p[1], p[0])
    lo, hi = th_p - 0.5 * np.pi, th_p + 0.5 * np.pi
    warns = []
    cand = []  # dicts before merging

    def alphas_at(t):
        return _eig_frames(W, t)[0]

    # --- single resonances: p on the half-line of plane i
    t = _refined_grid(lambda x: _cross(_eig_frames(W, x)[2], p), lo, hi, grid)
    _, _, h = _eig_frames(W, t)
    for i in range(m):
        g = _cross(h[:, i], p)
        for k in np.where(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]:
            if g[k] == 0 and k > 0 and g[k - 1] != 0:
                continue
            fun = lambda x: float(_cross(_eig_frames(W, x)[2][0, i], p))
            th = t[k] if g[k] == 0 else brentq(fun, t[k], t[k + 1], xtol=1e-15, rtol=1e-15)
            al, X, hh = _eig_frames(W, th)
            if float(hh[0, i] @ p) <= 0 or al[0, i] <= 0:
                continue
            # sorted planes swap at eigenvalue crossings, where the cross product jumps
            if abs(fun(th)) > 1e-8 * np.linalg.norm(hh[0, i]) * np.linalg.norm(p):
                continue
            e = float(np.cos(th) * p[0] + np.sin(th) * p[1])
            nmax = int(np.floor(s * al[0, i] / e * (1 + 1e-12)))
            c = float(np.linalg.norm(p) / np.linalg.norm(hh[0, i]))
            for n in range(1, nmax + 1):
                r = n / al[0, i]
                rho = np.sqrt(c * n * al[0, i] / np.pi)
                cand.append(dict(theta=th, r=r, res=[(i, n)], u0=rho * X[0, i], flags=()))

    # --- double resonances alpha_i = n, alpha_j = m_ on a common omega
    t = _refined_grid(lambda x: _ratios(alphas_at(x)), lo, hi, grid)
    al, X, h = _eig_frames(W, t)
    e = np.cos(t) * p[0] + np.sin(t) * p[1]
    for i in range(m):
        for j in range(i + 1, m):
            R = np.where(al[:, i] > 0, al[:, j] / np.where(al[:, i] > 0, al[:, i], 1.0), 0.0)
            ci, cj = _cone_coeffs(h[:, i], h[:, j], p)
            incone = (ci >= -1e-9) & (cj >= -1e-9)
            cell = incone[:-1] | incone[1:]
            nrate = al[:, i] / e  # n <= s * nrate
            na, nb = R[:-1], R[1:]
            rlo, rhi = np.minimum(na, nb), np.maximum(na, nb)
            nmax = np.floor(s * 1.05 * np.maximum(nrate[:-1], nrate[1:])).astype(int) + 1
            nmax = np.where(cell, nmax, 0)
            ta, tb, nn, mm = [], [], [], []
            for n in range(1, int(nmax.max(initial=0)) + 1):
                ok = np.where(nmax >= n)[0]
                if not len(ok):
                    continue
                m_lo = np.maximum(np.ceil(n * rlo[ok] - 1e-12), 1).astype(int)
                m_hi = np.minimum(np.floor(n * rhi[ok] + 1e-12), n - 1).astype(int)
                cnt = np.maximum(m_hi - m_lo + 1, 0)
                if not cnt.sum():
                    continue
                cells = np.repeat(ok, cnt)
                offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                ta.append(t[cells])
                tb.append(t[cells + 1])
                nn.append(np.full(cells.size, n))
                mm.append(np.repeat(m_lo, cnt) + offs)
            if not ta:
                continue
            ta, tb = np.concatenate(ta), np.concatenate(tb)
            nn, mm = np.concatenate(nn), np.concatenate(mm)
            target = mm / nn

            def f(x, i=i, j=j, target=target):
                a = alphas_at(x)
                return a[:, j] / a[:, i] - target

            th = _bracket_solve(f, ta, tb, f(ta), f(tb))
            al_r, X_r, h_r = _eig_frames(W, th)
            ee = np.cos(th) * p[0] + np.sin(th) * p[1]
            r = nn / al_r[:, i]
            E = r * ee
            ci, cj = _cone_coeffs(h_r[:, i], h_r[:, j], p)
            scale = np.maximum(np.abs(ci), np.abs(cj))
            keep = (E > 0) & (E <= s * (1 + 1e-12)) & (ci >= -1e-9 * scale) & (cj >= -1e-9 * scale)
            resid = np.abs(r * al_r[:, j] - mm)
            for q in np.where(keep)[0]:
                if resid[q] > tol_int * max(1.0, mm[q]):
                    warns.append(f"double resonance residual {resid[q]:.2e} at theta={th[q]:.12g}")
                c_i, c_j = max(ci[q], 0.0), max(cj[q], 0.0)
                u0 = (np.sqrt(c_i * nn[q] * al_r[q, i] / np.pi) * X_r[q, i]
                      + np.sqrt(c_j * mm[q] * al_r[q, j] / np.pi) * X_r[q, j])
                flags = ("cone-boundary",) if min(c_i, c_j) <= 1e-9 * scale[q] else ()
                cand.append(dict(theta=th[q], r=r[q], res=[(i, int(nn[q])), (j, int(mm[q]))],
                                 u0=u0, flags=flags))
    # crossings alpha_i = alpha_j give resonances with n = m
    cand += _crossing_resonances(W, p, s, lo, hi, grid, warns)
    return _merge(W, cand, p, tol_int), warns


def _ratios(al):
    m = al.shape[1]
    cols = [al[:, j] / np.where(al[:, i] > 0, al[:, i], 1.0) for i in range(m) for j in range(i + 1, m)]
    return np.stack(cols, axis=1) if cols else np.zeros((al.shape[0], 1))


def _crossing_resonances(W, p, s, lo, hi, grid, warns):
    """Equal coefficients alpha_i = alpha_{i+1} (non-generic) with both resonant at n."""
    m = W.d // 2
    out = []
    if m < 2:
        return out
    t = lo + (hi - lo) * (np.arange(grid + 1) + 0.5) / (grid + 1)
    al = _eig_frames(W, t)[0]
    for i in range(m - 1):
        gap = al[:, i] - al[:, i + 1]
        for k in range(1, len(t) - 1):
            if not (gap[k] <= gap[k - 1] and gap[k] <= gap[k + 1]):
                continue
            th = golden_min(lambda x: float(-np.diff(_eig_frames(W, x)[0][0, i:i + 2])[0]),
                            t[k - 1], t[k + 1])
            a_c = _eig_frames(W, th)[0][0]
            if a_c[i] - a_c[i + 1] > 1e-9 * max(1.0, a_c[i]) or a_c[i] <= 0:
                continue
            # planes are continuous through the crossing: read them just off it
            delta = 1e-6
            _, X, h = _eig_frames(W, th + delta)
            ci, cj = _cone_coeffs(h[0, i], h[0, i + 1], p)
            if ci < -1e-9 or cj < -1e-9:
                continue
            ee = np.cos(th) * p[0] + np.sin(th) * p[1]
            nmax = int(np.floor(s * a_c[i] / ee * (1 + 1e-12)))
            warns.append(f"eigenvalue crossing at theta={th:.12g}")
            for n in range(1, nmax + 1):
                u0 = (np.sqrt(max(ci, 0) * n * a_c[i] / np.pi) * X[0, i]
                      + np.sqrt(max(cj, 0) * n * a_c[i] / np.pi) * X[0, i + 1])
                om = n / a_c[i] * np.array([np.cos(th), np.sin(th)])
                u0 = _polish_u0(W, om, u0, p)
                out.append(dict(theta=th, r=n / a_c[i], res=[(i, n), (i + 1, n)], u0=u0,
                                flags=("crossing",)))
    return out


def _merge(W, cand, p, tol_int):
    if not cand:
        return []
    om = np.array([c["r"] * np.array([np.cos(c["theta"]), np.sin(c["theta"])]) for c in cand])
    order = np.lexsort((om[:, 1], om[:, 0]))
    groups: list = []
    for q in order:
        head = groups[-1][0] if groups else None
        if head is not None and np.linalg.norm(om[q] - om[head]) <= MERGE_TOL * max(1.0, np.linalg.norm(om[q])):
            groups[-1].append(q)
        else:
            groups.append([q])
    best = [max(g, key=lambda q: len(cand[q]["res"])) for g in groups]
    al = pencil_alphas(W, om[best])
    out = []
    for g, b, a in zip(groups, best, al):
        c = cand[b]
        flags = set(c["flags"])
        if any(len(cand[q]["res"]) != len(c["res"]) for q in g):
            flags.add("cone-boundary")
        res = tuple(sorted((int(i), int(n)) for i, n in c["res"]))
        out.append(CriticalManifold(om[b], res, len(res), float(om[b] @ p),
                                    int(index_from_alphas(a, tol_int)), np.asarray(c["u0"]),
                                    tuple(sorted(flags)), omega_norm(W, om[b]), p))
    return out


def census(W: CarnotStructure, p, s: float, grid: int = 1024, tol_int: float = TOL_INT) -> CensusReport:
    """Dispatch on the corank."""
    if W.l == 1:
        return enumerate_l1(W, p, s, tol_int)
    if W.l == 2:
        return enumerate_l2(W, p, s, grid, tol_int)
    raise BadDimensions(f"census enumeration supports l in (1, 2), got l={W.l}")


# --- Morse-Bott polynomial -----------------------------------------------

@dataclass(frozen=True)
class MorseBottPolynomial:
    coeffs: tuple  # integer coefficients, constant term first

    def __call__(self, t: float = 1.0):
        return sum(c * t ** k for k, c in enumerate(self.coeffs))

    def __str__(self):
        terms = [f"{c}" if k == 0 else f"{c}*t^{k}" for k, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


def morse_bott_polynomial(report: CensusReport) -> MorseBottPolynomial:
    """Sum over manifolds of (1+t)^nu t^index."""
    top = max((m.index + m.nu for m in report.manifolds), default=-1)
    c = [0] * (top + 1)
    for m in report.manifolds:
        for k in range(m.nu + 1):
            c[m.index + k] += comb(m.nu, k)
    return MorseBottPolynomial(tuple(c))


# --- torus structure -----------------------------------------------------

@dataclass(frozen=True)
class TorusCheck:
    rank: int
    nullity: int
    residual: float  # |q(sample) - p|
    energy_defect: float  # max over planes |J(u_j) - omega(q(u_j))|
    ok: bool


def _resonant_space(W, omega, tol_int):
    """Basis of E(omega) grouped by wave number, and the forms G_i of q on it.

    For v in the alpha = n eigenspace, exp(-t omega A) v has
    q_i = pi <v, A_i (-omega A) v> / n^2; distinct wave numbers do not interact.
    """
    M = omega_matrix(W, omega)
    spec = skew_spectrum(M)
    groups: dict = {}
    for a, (X, Y) in zip(spec.alphas, spec.frames):
        n = int(round(a))
        if n >= 1 and abs(a - n) <= max(tol_int, 1e-7) * max(1.0, a):
            groups.setdefault(n, []).extend([X, Y])
    B = np.array([v for n in sorted(groups) for v in groups[n]]).reshape(-1, W.d)
    G = np.zeros((W.l, len(B), len(B)))
    pos = 0
    for n in sorted(groups):
        P = np.array(groups[n])
        sl = slice(pos, pos + len(P))
        for i, A in enumerate(W.matrices):
            S = -np.pi * (A @ M) / n ** 2
            G[i, sl, sl] = P @ (0.5 * (S + S.T)) @ P.T
        pos += len(P)
    return B, G, groups


def _polish_u0(W, omega, u0, p, tol_int=TOL_INT, iters=8):
    """Gauss-Newton for q(v) = p inside E(omega), starting from u0."""
    B, G, _ = _resonant_space(W, omega, tol_int)
    x = B @ u0
    for _ in range(iters):
        r = np.einsum("a,iab,b->i", x, G, x) - p
        if np.linalg.norm(r) <= 1e-15 * max(1.0, np.linalg.norm(p)):
            break
        x = x - np.linalg.lstsq(2.0 * np.einsum("iab,b->ia", G, x), r, rcond=None)[0]
    return B.T @ x


def torus_rank_check(W: CarnotStructure, m: CriticalManifold, tol: float = 1e-7,
                     tol_int: float = TOL_INT) -> TorusCheck:
    """Local dimension of {v in E(omega): q(v) = p} at the sample control.

    Rows of the differential of q on E(omega) are 2 G_i v; the rank must be
    min(l, nu) and the nullity nu (one phase per resonant plane).
    """
    B, G, groups = _resonant_space(W, m.omega, tol_int)
    if len(B) != 2 * m.nu:
        raise RankMismatch(f"E(omega) has dimension {len(B)}, manifold has nu={m.nu}")
    x = B @ m.u0
    lost = float(np.linalg.norm(m.u0 - B.T @ x))
    residual = float(np.linalg.norm(np.einsum("a,iab,b->i", x, G, x) - m.target)) + lost
    D = 2.0 * np.einsum("iab,b->ia", G, x)
    sv = np.linalg.svd(D, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * max(1.0, sv.max(initial=0.0))))
    nullity = 2 * m.nu - rank
    if rank != min(W.l, m.nu) or nullity != m.nu:
        raise RankMismatch(f"rank {rank}, nullity {nullity} for nu={m.nu}, l={W.l}")
    # per-plane energy identity J(u_j) = omega(q(u_j))
    defect, pos = 0.0, 0
    for n in sorted(groups):
        xj = np.zeros_like(x)
        k = len(groups[n])
        xj[pos:pos + k] = x[pos:pos + k]
        qj = np.einsum("a,iab,b->i", xj, G, xj)
        defect = max(defect, abs(np.pi * float(xj @ xj) - float(m.omega @ qj)))
        pos += k
    return TorusCheck(rank, nullity, residual, defect,
                      residual <= tol and defect <= tol * max(1.0, m.energy))


# --- growth --------------------------------------------------------------

@dataclass(frozen=True)
class GrowthRow:
    s: float
    count: int
    cone_constant: float
    wave_bound: int  # floor(c_p s)
    max_wave: int  # largest resonant integer in the census


@dataclass(frozen=True)
class GrowthTable:
    rows: tuple
    exponent: float | None  # least-squares slope of log(count) against log(s)


def fit_exponent(s_list, counts) -> float | None:
    s = np.asarray(s_list, dtype=float)
    c = np.asarray(counts, dtype=float)
    keep = c > 0
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(s[keep]), np.log(c[keep]), 1)[0])


def growth_diagnostics(W: CarnotStructure, p, s_list, grid: int = 1024,
                       report: CensusReport | None = None) -> GrowthTable:
    s_list = [float(s) for s in s_list]
    if any(b <= a for a, b in zip(s_list, s_list[1:])):
        raise ValueError("s_list must be increasing")
    full = report if report is not None else census(W, p, s_list[-1], grid)
    rows = []
    for s in s_list:
        r = full.restrict(s)
        wave = max((mm.max_wave for mm in r.manifolds), default=0)
        rows.append(GrowthRow(s, len(r), r.cone_constant, int(np.floor(r.cone_constant * s)), wave))
    return GrowthTable(tuple(rows), fit_exponent(s_list, [r.count for r in rows]))


def base_energy(W: CarnotStructure, p, grid: int = 1024, start: float | None = None) -> float:
    """Smallest census energy, found by doubling the energy bound from below."""
    pn = float(np.linalg.norm(np.atleast_1d(p)))
    s = start if start is not None else 1e-3 * pn / max(omega_norm_max(W), 1e-300)
    for _ in range(200):
        r = census(W, p, s, grid)
        if len(r):
            return r.manifolds[0].energy
        s *= 2.0
    raise GridTooCoarse("no critical manifold found")


def omega_norm_max(W: CarnotStructure) -> float:
    """An upper bound for |omega A|_F over unit covectors."""
    return float(np.sqrt(np.sum(W.matrices ** 2)))
