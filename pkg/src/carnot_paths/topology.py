"""Betti numbers of quadric intersections from the inertia index on the covector circle.

A profile is the step function theta -> i^-(theta) on the circle (finite
pencils) or on an open admissible arc (path spaces, where the index diverges
at both ends). Sublevel sets P_j = {i^- <= j} are taken with the
upper-semicontinuous value i^- + dim ker at breakpoints, so they are open;
each run of cells is represented by a closed arc with open ends pulled in by
a tiny fraction of the adjacent interval, which preserves homotopy type and
nesting.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .core import CarnotStructure, circle_covectors, golden_min, pencil_alphas, skew_spectrum
from .errors import (BadDimensions, DegeneratePencil, GuardViolated, NonGenericTarget, NotNested,
                     ZeroTarget)

TWO_PI = 2.0 * np.pi
INF = 10 ** 9  # sentinel for a divergent index
SHRINK = 1e-6
THETA_TOL = 1e-10
CLUSTER = 1e-7  # breakpoints closer than this are one event (e.g. a vanishing form)


@dataclass(frozen=True)
class IndexProfile:
    """Piecewise constant index.

    kind "circle": values[k] lives on (breakpoints[k], breakpoints[k+1]) cyclically.
    kind "arc": open interval (lo, hi); values has len(breakpoints) + 1 entries.
    kind "point": a single admissible covector; values = [c].
    """
    kind: str
    breakpoints: np.ndarray
    values: np.ndarray
    point_values: np.ndarray
    lo: float = 0.0
    hi: float = TWO_PI
    N: int | None = None  # ambient dimension (finite pencils)
    rank: int = 2  # dimension of the span of the forms
    flags: tuple = ()

    def value_at(self, theta: float) -> int:
        b = self.breakpoints
        if self.kind == "point":
            return int(self.values[0])
        if self.kind == "circle":
            if not len(b):
                return int(self.values[0])
            t = (theta - b[0]) % TWO_PI + b[0]
            k = int(np.searchsorted(b, t, side="right")) - 1
            return int(self.values[k])
        if not self.lo < theta < self.hi:
            return INF
        return int(self.values[int(np.searchsorted(b, theta, side="right"))])

    def cells(self):
        """Ordered cells (kind, start, end, value); points have start == end."""
        b, v, pv = self.breakpoints, self.values, self.point_values
        out = []
        if self.kind == "point":
            return [("pt", self.lo, self.lo, int(v[0]))]
        if self.kind == "circle":
            if not len(b):
                return [("full", 0.0, TWO_PI, int(v[0]))]
            for k in range(len(b)):
                nxt = b[k + 1] if k + 1 < len(b) else b[0] + TWO_PI
                out.append(("pt", b[k], b[k], int(pv[k])))
                out.append(("int", b[k], nxt, int(v[k])))
            return out
        edges = np.concatenate([[self.lo], b, [self.hi]])
        for k in range(len(v)):
            if k:
                out.append(("pt", b[k - 1], b[k - 1], int(pv[k - 1])))
            out.append(("int", edges[k], edges[k + 1], int(v[k])))
        return out

    @cached_property
    def cell_arrays(self):
        """cells() as arrays: is_point, start, end, value."""
        c = self.cells()
        return (np.array([k == "pt" for k, *_ in c]), np.array([x[1] for x in c], dtype=float),
                np.array([x[2] for x in c], dtype=float), np.array([x[3] for x in c], dtype=np.int64))

    def max_finite(self) -> int:
        v = self.cell_arrays[3]
        v = v[v < INF]
        return int(v.max()) if len(v) else 0


@dataclass(frozen=True)
class ArcSet:
    arcs: tuple = ()  # closed arcs (a, b), a <= b, b - a < 2pi; angles unreduced
    full: bool = False

    @property
    def empty(self) -> bool:
        return not self.full and not self.arcs

    def __len__(self):
        return 1 if self.full else len(self.arcs)

    def contains_arc(self, arc, tol: float = 1e-12) -> bool:
        if self.full:
            return True
        a, b = arc
        for c, e in self.arcs:
            s = (a - c + tol) % TWO_PI - tol
            if s >= -tol and s + (b - a) <= (e - c) + tol:
                return True
        return False

    def owners(self, others: "ArcSet", tol: float = 1e-12) -> np.ndarray:
        """Index of the arc of self containing each arc of ``others`` (-1 if none)."""
        if not self.arcs:
            return np.full(len(others.arcs), -1)
        st = np.array([c for c, _ in self.arcs]) % TWO_PI
        order = np.argsort(st)
        out = np.full(len(others.arcs), -1)
        for q, arc in enumerate(others.arcs):
            k = int(np.searchsorted(st[order], (arc[0] + tol) % TWO_PI, side="right")) - 1
            n = len(order)
            for cand in (order[k % n], order[(k - 1) % n]):  # k = -1 wraps to the last arc
                if ArcSet((self.arcs[cand],)).contains_arc(arc, tol):
                    out[q] = cand
                    break
        return out


@dataclass(frozen=True)
class BettiTable:
    betti: dict  # degree j -> reduced Betti number
    total: int
    flags: tuple = ()

    def top_degree(self) -> int | None:
        nz = [j for j, b in self.betti.items() if b]
        return max(nz) if nz else None


# --- finite pencils ------------------------------------------------------

def _pencil_counts(q1, q2, theta, tol):
    w = np.linalg.eigvalsh(np.cos(theta)[:, None, None] * q1 + np.sin(theta)[:, None, None] * q2)
    return (w < -tol).sum(axis=1), (w <= tol).sum(axis=1)


def index_profile_finite(q1, q2, grid: int = 1024, strict: bool = False) -> IndexProfile:
    """i^-(cos(theta) q1 + sin(theta) q2) on the full circle."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    N = q1.shape[0]
    if q1.shape != (N, N) or q2.shape != (N, N) or N < 3:
        raise BadDimensions(f"need two symmetric N x N forms with N >= 3, got {q1.shape}, {q2.shape}")
    q1, q2 = 0.5 * (q1 + q1.T), 0.5 * (q2 + q2.T)
    scale = max(np.linalg.norm(q1, 2), np.linalg.norm(q2, 2), 1e-300)
    tol = 1e-9 * scale
    flags = []
    if np.linalg.matrix_rank(np.vstack([q1, q2]), tol=1e-10 * scale) < N:
        if strict:
            raise DegeneratePencil("the forms share a kernel vector")
        flags.append("degenerate")
    rank = int(np.linalg.matrix_rank(np.stack([q1.ravel(), q2.ravel()]), tol=1e-12 * scale))
    t = np.linspace(0.0, TWO_PI, max(grid, 16) + 1)[:-1] + np.pi / (7.0 * grid)  # avoid axes
    neg, _ = _pencil_counts(q1, q2, t, tol)
    count = lambda x: int(_pencil_counts(q1, q2, np.array([x]), tol)[0][0])
    bps = []

    def refine(a, b, ca, cb):
        if ca == cb:
            return
        if b - a <= THETA_TOL:
            bps.append(0.5 * (a + b))
            return
        m = 0.5 * (a + b)
        cm = count(m)
        refine(a, m, ca, cm)
        refine(m, b, cm, cb)

    n = len(t)
    for k in range(n):
        a, b = t[k], t[k + 1] if k + 1 < n else t[0] + TWO_PI
        refine(a, b, int(neg[k]), int(neg[(k + 1) % n]))
    # eigenvalues that touch zero without changing the count (e.g. a balanced form
    # passing through zero) still change i^- + dim ker at an isolated angle
    gap = lambda x: float(np.abs(np.linalg.eigvalsh(np.cos(x) * q1 + np.sin(x) * q2)).min())
    mg = np.abs(np.linalg.eigvalsh(np.cos(t)[:, None, None] * q1
                                   + np.sin(t)[:, None, None] * q2)).min(axis=1)
    for k in range(n):
        if mg[k] <= mg[k - 1] and mg[k] <= mg[(k + 1) % n]:
            x = golden_min(gap, t[k - 1] - (TWO_PI if k == 0 else 0.0), t[(k + 1) % n]
                           + (TWO_PI if k == n - 1 else 0.0))
            if gap(x) <= tol:
                bps.append(x)
    bps = _cluster(np.sort(np.mod(bps, TWO_PI)), CLUSTER)
    if not len(bps):
        return IndexProfile("circle", bps, np.array([int(neg[0])]), np.zeros(0, dtype=int),
                            N=N, rank=rank, flags=tuple(flags))
    nxt = np.concatenate([bps[1:], [bps[0] + TWO_PI]])
    mids = 0.5 * (bps + nxt)
    vals, _ = _pencil_counts(q1, q2, mids, tol)
    # at a breakpoint the eigenvalue is only zero to within the bisection width
    _, pv = _pencil_counts(q1, q2, bps, max(tol, 1e-7 * scale))
    pv = np.maximum(pv, np.maximum(vals, np.roll(vals, 1)))
    return IndexProfile("circle", bps, vals.astype(int), pv.astype(int), N=N, rank=rank,
                        flags=tuple(flags))


def _cluster(x, gap):
    """Replace runs of sorted angles closer than ``gap`` (cyclically) by their centre."""
    if len(x) < 2:
        return x
    groups = [[x[0]]]
    for v in x[1:]:
        if v - groups[-1][-1] <= gap:
            groups[-1].append(v)
        else:
            groups.append([v])
    if len(groups) > 1 and groups[0][0] + TWO_PI - groups[-1][-1] <= gap:
        groups[0] = [v - TWO_PI for v in groups.pop()] + groups[0]
    return np.sort(np.mod([0.5 * (g[0] + g[-1]) for g in groups], TWO_PI))


# --- path spaces ---------------------------------------------------------

def index_profile_analytic(W: CarnotStructure, p, s: float, grid: int = 1024) -> IndexProfile:
    """Index of the pencil omega q - <omega, p> J / s on the admissible covectors.

    Each coefficient alpha_i contributes 2 floor(s alpha_i / |<omega, p>|).
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.any(p):
        raise ZeroTarget("target must be nonzero")
    if s <= 0:
        raise ValueError("s must be positive")
    if W.l == 1:
        beta = skew_spectrum(W.matrices[0]).alphas
        c = int(2 * np.sum(np.floor(s * beta / abs(p[0]) * (1 + 1e-12))))
        om = -np.sign(p[0])
        return IndexProfile("point", np.zeros(0), np.array([c]), np.zeros(0, dtype=int),
                            lo=float(om), hi=float(om), rank=1)
    if W.l != 2:
        raise BadDimensions("analytic profile needs corank l in (1, 2)")
    curves = LambdaSet(W, p)
    lo, hi = curves.lo, curves.hi
    crit = curves.critical_angles(grid)
    # beyond the outermost critical points every curve is monotone
    probes = np.array([crit[0], crit[-1]] + list(crit)) if len(crit) else np.array([0.5 * (lo + hi)])
    top = float(np.max(s * curves.lam(probes)))
    K = int(np.ceil(top)) + 1
    knots = np.concatenate([[lo], crit, [hi]])
    bps = []
    for i in range(curves.m):
        f = lambda x, i=i: float(s * curves.lam(np.array([x]))[0, i])
        fv = lambda x, i=i: s * curves.lam(x)[:, i]
        for a, b in zip(knots[:-1], knots[1:]):
            bps += _level_crossings(f, a, b, lo, hi, K, fv)
    bps = np.unique(np.round(np.sort(bps), 13)) if bps else np.zeros(0)
    if len(bps) > 1:
        bps = bps[np.concatenate([[True], np.diff(bps) > 10 * THETA_TOL])]
    edges = np.concatenate([[lo], bps, [hi]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = _analytic_values(curves, s, mids)
    pv = _analytic_values(curves, s, bps, closed=True) if len(bps) else np.zeros(0, dtype=int)
    pv = np.maximum(pv, np.maximum(vals[:-1], vals[1:])) if len(bps) else pv
    # the two end intervals contain infinitely many breakpoints
    vals[0] = vals[-1] = INF
    # s equal to a critical energy: a level is touched tangentially and the profile is unstable
    cv = s * curves.lam(crit).ravel() if len(crit) else np.zeros(0)
    near = np.abs(cv - np.round(cv)) <= 1e-9 * np.maximum(1.0, cv)
    flags = ("critical-level",) if np.any(near & (np.round(cv) >= 1)) else ()
    return IndexProfile("arc", bps, vals, pv, lo=lo, hi=hi, rank=2, flags=flags)


def _analytic_values(curves, s, theta, closed=False):
    x = s * curves.lam(theta)
    k = np.floor(x * (1 + 1e-12)) if closed else np.floor(x)
    return (2 * k.sum(axis=1)).astype(np.int64)


def _level_crossings(f, a, b, lo, hi, K, fv=None):
    """Angles in (a, b) where the monotone function f crosses the integers 1..K+1.

    With a vectorised fv all levels are bisected together.
    """
    ea, eb = a, b
    # open ends at the admissible boundary: step inwards until f is finite and large
    if a == lo:
        ea = _inner_end(f, a, b, K, +1)
    if b == hi:
        eb = _inner_end(f, b, a, K, -1)
    fa, fb = f(ea), f(eb)
    k0, k1 = int(np.ceil(min(fa, fb))), int(np.floor(max(fa, fb)))
    ks = np.array([k for k in range(max(k0, 1), min(k1, K + 1) + 1) if (fa - k) * (fb - k) <= 0],
                  dtype=float)
    if not len(ks):
        return []
    if fv is None:
        return [brentq(lambda x: f(x) - k, ea, eb, xtol=1e-14, rtol=1e-15) for k in ks]
    x0, x1 = np.full(len(ks), ea), np.full(len(ks), eb)
    g0 = fa - ks
    exact = np.zeros(len(ks), dtype=bool)
    for _ in range(64):
        if np.max(x1 - x0) <= 1e-14:
            break
        xm = 0.5 * (x0 + x1)
        gm = fv(xm) - ks
        exact |= gm == 0
        left = np.sign(gm) == np.sign(g0)
        x0 = np.where(left & ~exact, xm, x0)
        x1 = np.where(left | exact, x1, xm)
        x0 = np.where(exact, xm, x0)
        x1 = np.where(exact, xm, x1)
        g0 = np.where(left, gm, g0)
    return list(0.5 * (x0 + x1))


def _inner_end(f, end, other, K, sign):
    span = abs(other - end)
    d = 0.5 * span
    while d > 1e-14 * span:
        x = end + sign * d
        if f(x) > K + 1:
            return x
        d *= 0.5
    return end + sign * d


class LambdaSet:
    """Curves lambda_i(theta) = alpha_i(theta) / |<omega(theta), p>| on the admissible arc
    {<omega, p> < 0} (sorted eigenvalues, single-counted)."""

    def __init__(self, W: CarnotStructure, p):
        self.W = W
        self.p = np.asarray(p, dtype=float)
        self.m = W.d // 2
        th_p = float(np.arctan2(self.p[1], self.p[0]))
        self.lo, self.hi = th_p + 0.5 * np.pi, th_p + 1.5 * np.pi
        self.pn = float(np.linalg.norm(self.p))
        self.scale = float(np.linalg.norm(W.matrices))

    def alphas(self, theta) -> np.ndarray:
        return pencil_alphas(self.W, circle_covectors(np.atleast_1d(theta)))

    def lam(self, theta) -> np.ndarray:
        theta = np.atleast_1d(theta)
        e = np.abs(circle_covectors(theta) @ self.p)
        return self.alphas(theta) / e[:, None]

    def grid(self, n: int) -> np.ndarray:
        u = (np.arange(n) + 0.5) / n
        return self.lo + (self.hi - self.lo) * 0.5 * (1.0 - np.cos(np.pi * u))

    def critical_angles(self, n: int) -> np.ndarray:
        """Interior local extrema and kinks of every curve, polished by golden section."""
        t = self.grid(n)
        v = self.lam(t)
        out = []
        for i in range(self.m):
            dv = np.diff(v[:, i])
            for k in np.where(dv[:-1] * dv[1:] <= 0)[0]:
                sgn = 1.0 if dv[k] < 0 else -1.0  # minimum or maximum
                x = golden_min(lambda x: sgn * float(self.lam(x)[0, i]), t[k], t[k + 2])
                out.append(x)
        return np.unique(np.round(out, 12)) if out else np.zeros(0)

    def min_alpha(self, n: int) -> float:
        t = self.grid(n)
        a = self.alphas(t)[:, -1]
        k = int(np.argmin(a))
        x = golden_min(lambda x: float(self.alphas(x)[0, -1]), t[max(k - 1, 0)], t[min(k + 1, n - 1)])
        return min(float(a.min()), float(self.alphas(x)[0, -1]))


# --- sublevel sets and relative homology ---------------------------------

def sublevel_arcs(profile: IndexProfile, j: int) -> ArcSet:
    """Open sublevel {i^- <= j}, returned as closed arcs of the same homotopy type."""
    if j < 0:
        raise ValueError("j must be >= 0")
    is_pt, start, end, val = profile.cell_arrays
    sel = val <= j
    if not sel.any():
        return ArcSet()
    if profile.kind == "point":
        return ArcSet(((float(start[0]), float(start[0])),))
    if sel.all() and profile.kind == "circle":
        return ArcSet(full=True)
    n = len(sel)
    if profile.kind == "circle":
        # rotate so that the sequence starts with an unselected cell
        r = int(np.argmin(sel))
        order = np.roll(np.arange(n), -r)
    else:
        order = np.arange(n)
    s = sel[order]
    edge = np.diff(np.concatenate([[False], s, [False]]).astype(np.int8))
    first, last = order[np.where(edge == 1)[0]], order[np.where(edge == -1)[0] - 1]
    shrink = SHRINK * (end - start)
    a = np.where(is_pt[first], start[first], start[first] + shrink[first])
    b = np.where(is_pt[last], end[last], end[last] - shrink[last])
    b = np.where(b < a, b + TWO_PI, b)
    return ArcSet(tuple(sorted(zip(a.tolist(), b.tolist()))))


def relative_betti(A: ArcSet, B: ArcSet) -> tuple:
    """Ranks of H_0(A, B) and H_1(A, B) over a field."""
    if B.full and not A.full:
        raise NotNested("B is not contained in A")
    if A.full:
        if B.empty:
            return 1, 1
        if B.full:
            return 0, 0
        return 0, len(B.arcs)
    own = A.owners(B)
    if np.any(own < 0):
        raise NotNested("B is not contained in A")
    k = np.bincount(own, minlength=len(A.arcs)) if len(own) else np.zeros(len(A.arcs), dtype=int)
    return int(np.sum(k == 0)), int(np.sum(np.maximum(k - 1, 0)))


def betti_from_profile(profile: IndexProfile, strict: bool = False,
                       method: str = "sweep") -> BettiTable:
    """Reduced Betti numbers b_j = b0(P_{j+1}, P_j) + b1(P_{j+2}, P_{j+1}).

    method "arcs" builds every sublevel set explicitly (quadratic, kept as a
    reference); "sweep" gets the same ranks from component counts in one
    union-find pass over the cells sorted by value.
    """
    cells = profile.cells()
    if not cells or all(c[3] >= INF for c in cells):
        return BettiTable({}, 0, ("empty",))
    if not sublevel_arcs(profile, 0).empty:
        return BettiTable({}, 0, ("empty",))
    if method == "arcs" or len(cells) < 2:
        b = _betti_by_arcs(profile)
    elif method == "sweep":
        b = _betti_by_sweep(profile)
    else:
        raise ValueError(f"unknown method {method!r}")
    flags = []
    if profile.kind == "circle":
        b, flags = _finite_guard(b, profile.N, profile.rank, strict)
    flags = tuple(profile.flags) + tuple(f for f in flags if f not in profile.flags)
    return BettiTable(dict(sorted(b.items())), 1 + sum(b.values()), flags)


def _needed_degrees(levels):
    # P_j only changes at cell values, so only nearby degrees can be nonzero
    return sorted({int(v) - k for v in levels for k in (1, 2) if v - k >= 0})


def _betti_by_arcs(profile: IndexProfile) -> dict:
    levels = np.unique(profile.cell_arrays[3])
    levels = levels[levels < INF]
    P = {}
    sub = lambda j: P[j] if j in P else P.setdefault(j, sublevel_arcs(profile, j))
    b = {}
    for j in _needed_degrees(levels):
        b0 = relative_betti(sub(j + 1), sub(j))[0]
        b1 = relative_betti(sub(j + 2), sub(j + 1))[1]
        if b0 + b1:
            b[j] = b0 + b1
    return b


def _betti_by_sweep(profile: IndexProfile) -> dict:
    """Long exact sequence of (A, B) with A, B unions of arcs:
    b1(A, B) = b1(A) - b1(B) + b0(B) - b0(A) + b0(A, B), and b0(A, B) counts
    the components of A born at its own level."""
    val = profile.cell_arrays[3]
    n = len(val)
    circular = profile.kind == "circle"
    parent = np.arange(n)
    low = val.copy()
    added = np.zeros(n, dtype=bool)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = np.argsort(val, kind="stable")
    levels, state = [], []  # after level v: (components, full circle, young components)
    comps, i = 0, 0
    while i < n and val[order[i]] < INF:
        v = val[order[i]]
        batch = []
        while i < n and val[order[i]] == v:
            c = int(order[i])
            added[c] = True
            comps += 1
            for nb in (c - 1, c + 1):
                if circular:
                    nb %= n
                if 0 <= nb < n and nb != c and added[nb]:
                    r1, r2 = find(c), find(nb)
                    if r1 != r2:
                        parent[r2] = r1
                        low[r1] = min(low[r1], low[r2])
                        comps -= 1
            batch.append(c)
            i += 1
        young = len({r for r in map(find, batch) if low[r] == v})
        levels.append(int(v))
        state.append((comps, bool(circular and added.all()), young))
    levels_arr = np.array(levels)

    def at(L):
        k = int(np.searchsorted(levels_arr, L, side="right")) - 1
        if k < 0:
            return 0, False, 0
        c, full, young = state[k]
        return c, full, young if levels[k] == L else 0

    b = {}
    for j in _needed_degrees(levels):
        c1, f1, y1 = at(j + 1)
        c2, f2, y2 = at(j + 2)
        b0 = y1
        b1 = int(f2) - int(f1) + c1 - c2 + y2
        if b0 + b1:
            b[j] = b0 + b1
    return b


def _finite_guard(b, N, rank, strict):
    """Keep degrees j <= N - 3; above, use Poincare duality of the (N-1-rank)-manifold."""
    guard, D = N - 3, N - 1 - rank
    if D <= guard:
        return {j: v for j, v in b.items() if j <= D}, []
    if strict:
        raise GuardViolated(f"degree {D} lies beyond the guard j <= {guard}")
    out = {j: v for j, v in b.items() if j <= guard}
    for j in range(guard + 1, D + 1):
        # unreduced b_j = b_{D-j}; in reduced terms the top degree picks up the +1 of b_0
        out[j] = out.get(D - j, 0) + (1 if j == D else 0)
    return {j: v for j, v in out.items() if v}, ["duality-fill"]


def total_betti_via_maxima(profile: IndexProfile) -> int:
    """2 mu + 2, mu the number of interior strict local maxima; 0 when P_0 is nonempty."""
    if not sublevel_arcs(profile, 0).empty:
        return 0
    if profile.kind == "point":
        return 2
    vals = [c[3] for c in profile.cells()]
    # collapse equal neighbours, then count strict interior maxima
    runs = [v for k, v in enumerate(vals) if k == 0 or v != vals[k - 1]]
    mu = sum(1 for k in range(1, len(runs) - 1) if runs[k] > runs[k - 1] and runs[k] > runs[k + 1])
    return 2 * mu + 2
