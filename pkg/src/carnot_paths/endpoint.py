"""Controls, energy, the end-point map and geodesic shooting.

A control on I = [0, 2pi] is stored by its Fourier coefficients in the
orthonormal basis 1/sqrt(2pi), cos(kt)/sqrt(pi), sin(kt)/sqrt(pi):

    u(t) = mean/sqrt(2pi) + sum_k U_k cos(kt)/sqrt(pi) + V_k sin(kt)/sqrt(pi)

so that ||u||^2 = |mean|^2 + sum_k |U_k|^2 + |V_k|^2 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import CarnotStructure, omega_matrix, skew_spectrum
from .errors import ConsistencyFailure, DimensionMismatch, NoConvergence, TruncationTooSmall

SQPI = np.sqrt(np.pi)
SQ2PI = np.sqrt(2.0 * np.pi)
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Control:
    mean: np.ndarray  # (d,)
    U: np.ndarray  # (L, d); row k-1 holds U_k
    V: np.ndarray  # (L, d)

    def __post_init__(self):
        for name in ("mean", "U", "V"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.U.shape != self.V.shape or self.U.shape[1:] != self.mean.shape:
            raise DimensionMismatch("inconsistent control coefficient shapes")

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def L(self) -> int:
        return self.U.shape[0]

    @property
    def zero_mean(self) -> bool:
        return not np.any(self.mean)

    @classmethod
    def zeros(cls, d: int, L: int) -> "Control":
        return cls(np.zeros(d), np.zeros((L, d)), np.zeros((L, d)))

    @classmethod
    def random(cls, rng, d: int, L: int, zero_mean: bool = True) -> "Control":
        mean = np.zeros(d) if zero_mean else rng.standard_normal(d)
        return cls(mean, rng.standard_normal((L, d)), rng.standard_normal((L, d)))

    @classmethod
    def from_vector(cls, x, d: int, L: int) -> "Control":
        """Inverse of ``vector``: blocks [U_1, V_1, U_2, V_2, ...]."""
        x = np.asarray(x, dtype=float).reshape(L, 2, d)
        return cls(np.zeros(d), x[:, 0], x[:, 1])

    def vector(self) -> np.ndarray:
        return np.stack([self.U, self.V], axis=1).ravel()

    def scaled(self, c: float) -> "Control":
        return Control(c * self.mean, c * self.U, c * self.V)

    def padded(self, L: int) -> "Control":
        if L <= self.L:
            return self
        z = np.zeros((L - self.L, self.d))
        return Control(self.mean, np.vstack([self.U, z]), np.vstack([self.V, z]))

    def __call__(self, t) -> np.ndarray:
        """Sample u(t); returns shape (len(t), d)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(1, self.L + 1)
        c, s = np.cos(np.outer(t, k)) / SQPI, np.sin(np.outer(t, k)) / SQPI
        return self.mean / SQ2PI + c @ self.U + s @ self.V

    def primitive(self, t) -> np.ndarray:
        """x(t) = int_0^t u."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(1, self.L + 1)
        s = np.sin(np.outer(t, k)) / (SQPI * k)
        c = (1.0 - np.cos(np.outer(t, k))) / (SQPI * k)
        return np.outer(t, self.mean / SQ2PI) + s @ self.U + c @ self.V

    def to_dict(self) -> dict:
        return {"L": self.L, "mean": self.mean.tolist(),
                "coeffs": [[self.U[k].tolist(), self.V[k].tolist()] for k in range(self.L)]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Control":
        L = int(obj["L"])
        mean = np.asarray(obj["mean"], dtype=float)
        co = np.asarray(obj["coeffs"], dtype=float).reshape(L, 2, mean.shape[0])
        return cls(mean, co[:, 0], co[:, 1])


@dataclass(frozen=True)
class EndPoint:
    horizontal: np.ndarray
    vertical: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.horizontal, self.vertical])

    def distance(self, other: "EndPoint") -> float:
        return float(np.linalg.norm(self.vector() - other.vector()))


@dataclass(frozen=True)
class ExponentialControl:
    """u(t) = exp(-t omega A) u0."""
    omega: np.ndarray
    u0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", np.atleast_1d(np.asarray(self.omega, dtype=float)))
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=float))


def energy(u: Control) -> float:
    return 0.5 * float(np.sum(u.mean ** 2) + np.sum(u.U ** 2) + np.sum(u.V ** 2))


def _check(W: CarnotStructure, d: int):
    if d != W.d:
        raise DimensionMismatch(f"control dimension {d} != structure d={W.d}")


def _gauss_nodes(L: int, extra: int = 0):
    panels = 4 * L + 8 + extra
    x, w = leggauss(10)
    h = TWO_PI / panels
    a = np.arange(panels)[:, None] * h
    t = (a + 0.5 * h * (x + 1.0)).ravel()
    return t, np.tile(0.5 * h * w, panels)


def endpoint_quadratic(W: CarnotStructure, u: Control) -> EndPoint:
    """End-point in closed form on zero-mean controls, by Gauss quadrature otherwise."""
    _check(W, u.d)
    if u.zero_mean:
        k = np.arange(1, u.L + 1)
        # q_i = sum_k <U_k, A_i V_k>/k
        vert = np.einsum("kp,ipq,kq,k->i", u.U, W.matrices, u.V, 1.0 / k)
        return EndPoint(np.zeros(W.d), vert)
    t, w = _gauss_nodes(u.L)
    x, uu = u.primitive(t), u(t)
    vert = 0.5 * np.einsum("n,np,ipq,nq->i", w, x, W.matrices, uu)
    return EndPoint(SQ2PI * u.mean, vert)


def vertical_part(W: CarnotStructure, u: Control) -> np.ndarray:
    """q(u) for zero-mean controls."""
    return endpoint_quadratic(W, u).vertical


def trajectory(W: CarnotStructure, u, steps: int = 4096):
    """Classical RK4 for x' = u, y_i' = x^T A_i u / 2 on [0, 2pi].

    The right-hand side does not depend on y, so the four stages reduce to
    closed expressions in x_n and u at t_n, t_n + h/2, t_n + h; the loop over
    steps is carried out with cumulative sums. ``u`` is any callable mapping
    an array of times to an array of shape (len(t), d).
    """
    if isinstance(u, Control):
        _check(W, u.d)
    if steps < 64:
        raise ValueError("steps must be >= 64")
    h = TWO_PI / steps
    tt = np.arange(2 * steps + 1) * (h / 2)
    us = u(tt)
    u0, um, u1 = us[0:-1:2], us[1::2], us[2::2]
    dx = h / 6.0 * (u0 + 4.0 * um + u1)
    x = np.vstack([np.zeros(W.d), np.cumsum(dx, axis=0)])
    xn = x[:-1]
    A = W.matrices
    f = lambda xs, uv: 0.5 * np.einsum("np,ipq,nq->ni", xs, A, uv)
    k1 = f(xn, u0)
    k2 = f(xn + 0.5 * h * u0, um)
    k3 = f(xn + 0.5 * h * um, um)
    k4 = f(xn + h * um, u1)
    dy = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    y = np.vstack([np.zeros(W.l), np.cumsum(dy, axis=0)])
    return tt[::2], x, y


def endpoint_ode(W: CarnotStructure, u, steps: int = 4096) -> EndPoint:
    _, x, y = trajectory(W, u, steps)
    return EndPoint(x[-1], y[-1])


# --- truncated operators -------------------------------------------------

def q_operators(W: CarnotStructure, L: int) -> np.ndarray:
    """Self-adjoint Q_i on T^L with q_i(u) = <u, Q_i u>/2 (coordinates of ``Control.vector``).

    On T_k the block is (1/k)[[0, A_i], [-A_i, 0]].
    """
    d = W.d
    n = 2 * d * L
    Q = np.zeros((W.l, n, n))
    for k in range(1, L + 1):
        s = 2 * d * (k - 1)
        for i, A in enumerate(W.matrices):
            Q[i, s:s + d, s + d:s + 2 * d] = A / k
            Q[i, s + d:s + 2 * d, s:s + d] = -A / k
    return Q


def omega_q_operator(W: CarnotStructure, omega, L: int) -> np.ndarray:
    return np.tensordot(np.asarray(omega, dtype=float), q_operators(W, L), axes=1)


def hessian(W: CarnotStructure, omega, L: int) -> np.ndarray:
    """Second variation of J - omega(q) on T^L: 1 - omega Q."""
    return np.eye(2 * W.d * L) - omega_q_operator(W, omega, L)


def lagrange_residual(W: CarnotStructure, omega, u: Control) -> float:
    x = u.vector()
    return float(np.linalg.norm(x - omega_q_operator(W, omega, u.L) @ x))


# --- exponential controls ------------------------------------------------

def _plane_data(W, omega):
    spec = skew_spectrum(omega_matrix(W, omega))
    return spec


def project_exponential(W: CarnotStructure, e: ExponentialControl, L: int,
                        int_tol: float = 1e-9, return_tail: bool = False):
    """Fourier coefficients of t -> exp(-t omega A) u0 on T^L.

    Components of u0 in planes with integer alpha = k map exactly to
    U_k = sqrt(pi) v, V_k = -sqrt(pi) omega A v / k; kernel components
    become the constant term; anything else is projected by quadrature
    and the discarded L^2 mass is returned as tail when requested.
    """
    _check(W, e.u0.shape[0])
    M = omega_matrix(W, e.omega)
    spec = skew_spectrum(M)
    U = np.zeros((L, W.d))
    V = np.zeros((L, W.d))
    mean = SQ2PI * (spec.kernel_frame.T @ (spec.kernel_frame @ e.u0)) if spec.kernel_dim else np.zeros(W.d)
    rest = np.zeros(W.d)
    for a, (X, Y) in zip(spec.alphas, spec.frames):
        v = X * (X @ e.u0) + Y * (Y @ e.u0)
        if not np.any(np.abs(v) > 1e-15):
            continue
        k = int(round(a))
        if k >= 1 and abs(a - k) <= int_tol * max(1.0, a):
            if k > L:
                raise TruncationTooSmall(f"resonant wave number {k} exceeds L={L}")
            U[k - 1] += SQPI * v
            V[k - 1] += -SQPI * (M @ v) / k
        else:
            rest += v
    if np.any(rest):
        t, w = _gauss_nodes(L, extra=8 * int(np.ceil(spec.alphas.max())) if len(spec.alphas) else 0)
        ur = _exp_flow(spec, rest, t)
        kk = np.arange(1, L + 1)
        U += (np.cos(np.outer(kk, t)) * w) @ ur / SQPI
        V += (np.sin(np.outer(kk, t)) * w) @ ur / SQPI
        mean = mean + (w @ ur) / SQ2PI
    c = Control(mean, U, V)
    if return_tail:
        tail = max(0.0, TWO_PI * float(e.u0 @ e.u0) - 2.0 * energy(c))
        return c, tail
    return c


def _exp_flow(spec, u0, t):
    """exp(-t M) u0 sampled at times t, from the canonical frames."""
    out = np.zeros((len(t), u0.shape[0]))
    for a, (X, Y) in zip(spec.alphas, spec.frames):
        x, y = X @ u0, Y @ u0
        c, s = np.cos(a * t), np.sin(a * t)
        # exp(-t a J) in the (X, Y) frame
        out += np.outer(c * x - s * y, X) + np.outer(s * x + c * y, Y)
    if spec.kernel_dim:
        out += spec.kernel_frame.T @ (spec.kernel_frame @ u0)
    return out


def exponential_trajectory_control(e: ExponentialControl, W: CarnotStructure):
    """Callable t -> u(t) for an exponential control."""
    spec = skew_spectrum(omega_matrix(W, e.omega))
    return lambda t: _exp_flow(spec, e.u0, np.atleast_1d(t))


def horizontal_shot(spec, u0) -> np.ndarray:
    """int_0^{2pi} exp(-t omega A) u0 dt, plane by plane."""
    p = np.zeros_like(u0)
    for a, (X, Y) in zip(spec.alphas, spec.frames):
        x, y = X @ u0, Y @ u0
        s2 = np.sin(TWO_PI * a) / a
        c2 = 2.0 * np.sin(np.pi * a) ** 2 / a
        # (1/a) J (exp(-2 pi a J) - 1) = [[s2, -c2], [c2, s2]] in the frame
        p += (s2 * x - c2 * y) * X + (c2 * x + s2 * y) * Y
    if spec.kernel_dim:
        p += TWO_PI * (spec.kernel_frame.T @ (spec.kernel_frame @ u0))
    return p


def l_matrices(W: CarnotStructure, omega, nodes: int = 2048, spec=None) -> np.ndarray:
    """L_i(omega) = 1/2 int_0^{2pi} (int_0^t exp(tau omega A) dtau) A_i exp(-t omega A) dt.

    Inner integral in closed form per plane, outer integral by composite
    Simpson on ``nodes`` intervals (rounded up to even).
    """
    if spec is None:
        spec = skew_spectrum(omega_matrix(W, omega))
    nodes += nodes % 2
    t = np.linspace(0.0, TWO_PI, nodes + 1)
    w = np.full(nodes + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (TWO_PI / nodes) / 3.0
    d = W.d
    G = np.zeros((len(t), d, d))  # int_0^t exp(tau M)
    E = np.zeros((len(t), d, d))  # exp(-t M)
    for a, (X, Y) in zip(spec.alphas, spec.frames):
        c, s = np.cos(a * t), np.sin(a * t)
        si, ci = s / a, 2.0 * np.sin(0.5 * a * t) ** 2 / a
        XX, XY, YX, YY = (np.outer(X, X), np.outer(X, Y), np.outer(Y, X), np.outer(Y, Y))
        # exp(tau a J) = [[c, s], [-s, c]] ;  exp(-t a J) = [[c, -s], [s, c]]
        G += np.einsum("n,ij->nij", si, XX + YY) + np.einsum("n,ij->nij", ci, XY - YX)
        E += np.einsum("n,ij->nij", c, XX + YY) + np.einsum("n,ij->nij", s, YX - XY)
    if spec.kernel_dim:
        K = spec.kernel_frame.T @ spec.kernel_frame
        G += t[:, None, None] * K
        E += K
    return 0.5 * np.einsum("n,nij,kjm,nmp->kip", w, G, W.matrices, E)


def shoot(W: CarnotStructure, e: ExponentialControl, nodes: int = 2048, check_tol: float = 1e-7,
          max_nodes: int = 1 << 16) -> EndPoint:
    """End-point of exp(-t omega A) u0 (u0 need not be periodic)."""
    _check(W, e.u0.shape[0])
    M = omega_matrix(W, e.omega)
    spec = skew_spectrum(M)
    ph = horizontal_shot(spec, e.u0)
    target = np.pi * float(e.u0 @ e.u0) - 0.5 * float(e.u0 @ ph)
    scale = max(1.0, abs(target), float(e.u0 @ e.u0))
    while True:
        Ls = l_matrices(W, e.omega, nodes, spec)
        vert = np.einsum("p,ipq,q->i", e.u0, Ls, e.u0)
        # omega(p_vert) = pi |u0|^2 - <u0, p_hor>/2
        if abs(float(e.omega @ vert) - target) <= check_tol * scale:
            return EndPoint(ph, vert)
        if nodes >= max_nodes:
            raise ConsistencyFailure(
                f"omega-component check off by {abs(float(e.omega @ vert) - target):.3e} at {nodes} nodes")
        nodes *= 2


def _pack(e: ExponentialControl) -> np.ndarray:
    return np.concatenate([e.omega, e.u0])


def _unpack(z, l) -> ExponentialControl:
    return ExponentialControl(z[:l], z[l:])


def solve_endpoint(W: CarnotStructure, target: EndPoint, init: ExponentialControl,
                   tol: float = 1e-9, max_iter: int = 200, fd_step: float = 1e-7) -> ExponentialControl:
    """Damped Gauss-Newton on (omega, u0) -> shoot - target with a forward-difference Jacobian."""
    if target.horizontal.shape[0] != W.d or target.vertical.shape[0] != W.l:
        raise DimensionMismatch("target dimensions do not match the structure")
    if init.omega.shape[0] != W.l or init.u0.shape[0] != W.d:
        raise DimensionMismatch("initial guess dimensions do not match the structure")
    if tol <= 0:
        raise ValueError("tol must be positive")
    tv = target.vector()
    F = lambda z: shoot(W, _unpack(z, W.l), nodes=512, check_tol=1e-9).vector() - tv
    z = _pack(init).astype(float)
    r = F(z)
    for _ in range(max_iter):
        nr = float(np.linalg.norm(r))
        if nr < tol:
            return _unpack(z, W.l)
        J = np.empty((r.size, z.size))
        for j in range(z.size):
            h = fd_step * max(1.0, abs(z[j]))
            zp = z.copy()
            zp[j] += h
            J[:, j] = (F(zp) - r) / h
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            zn = z + lam * step
            rn = F(zn)
            if np.linalg.norm(rn) < nr:
                break
            lam *= 0.5
        else:
            break
        z, r = zn, rn
    if float(np.linalg.norm(r)) < tol:
        return _unpack(z, W.l)
    raise NoConvergence(f"residual {np.linalg.norm(r):.3e} after {max_iter} iterations")


def solve_multistart(W: CarnotStructure, target: EndPoint, inits, tol: float = 1e-9,
                     dedup: float = 1e-6) -> list:
    """Run ``solve_endpoint`` from several guesses; keep distinct converged solutions."""
    found = []
    for init in inits:
        try:
            e = solve_endpoint(W, target, init, tol)
        except NoConvergence:
            continue
        z = _pack(e)
        if all(np.linalg.norm(z - _pack(f)) > dedup for f in found):
            found.append(e)
    found.sort(key=lambda e: tuple(np.round(_pack(e), 9)))
    return found
