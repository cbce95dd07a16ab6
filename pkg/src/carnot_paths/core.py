"""Step-two Carnot structures W = span{A_1..A_l} in so(d) and pencil spectra."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimensions, DependentSpan, DimensionMismatch, NotSkew

SKEW_TOL = 1e-12
SPAN_TOL = 1e-10
GAP_TOL = 1e-9

# J_2 in the convention  A X = -alpha Y,  A Y = alpha X.
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class CarnotStructure:
    d: int
    l: int
    matrices: np.ndarray  # shape (l, d, d)

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @classmethod
    def from_list(cls, mats) -> "CarnotStructure":
        m = np.asarray(mats, dtype=float)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise BadDimensions(f"expected l square matrices, got shape {m.shape}")
        return validate_structure(cls(d=m.shape[1], l=m.shape[0], matrices=m))

    def commutator_norm(self) -> float:
        if self.l != 2:
            raise BadDimensions("commutator defined for l=2 only")
        a, b = self.matrices
        return float(np.linalg.norm(a @ b - b @ a))


def heisenberg() -> CarnotStructure:
    return CarnotStructure.from_list([J2])


def validate_structure(raw: CarnotStructure) -> CarnotStructure:
    m = np.asarray(raw.matrices, dtype=float)
    if m.ndim != 3 or m.shape[0] != raw.l or m.shape[1:] != (raw.d, raw.d):
        raise BadDimensions(f"matrices shape {m.shape} does not match d={raw.d}, l={raw.l}")
    d, l = raw.d, raw.l
    if d < 2 or l < 1:
        raise BadDimensions(f"need d >= 2 and l >= 1, got d={d}, l={l}")
    if not np.all(np.isfinite(m)):
        raise BadDimensions("non-finite matrix entries")
    defect = np.abs(m + np.transpose(m, (0, 2, 1))).max()
    if defect > SKEW_TOL:
        raise NotSkew(f"skew defect {defect:.3e} exceeds {SKEW_TOL:g}")
    m = 0.5 * (m - np.transpose(m, (0, 2, 1)))
    sv = np.linalg.svd(m.reshape(l, d * d), compute_uv=False)
    # l > d(d-1)/2 forces a dependent span, reported as such
    if l > d * (d - 1) // 2 or sv[-1] <= SPAN_TOL:
        raise DependentSpan(f"the {l} matrices do not span an {l}-dimensional subspace of so({d})")
    return CarnotStructure(d=d, l=l, matrices=m)


def omega_matrix(W: CarnotStructure, omega) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.shape[-1] != W.l:
        raise DimensionMismatch(f"covector has {w.shape[-1]} components, structure has l={W.l}")
    return np.tensordot(w, W.matrices, axes=([-1], [0]))


@dataclass(frozen=True)
class SkewSpectrum:
    alphas: np.ndarray
    kernel_dim: int
    frames: np.ndarray  # (m, 2, d): rows X_i, Y_i
    kernel_frame: np.ndarray  # (n, d)
    multiple: bool = False  # some alphas coincide within GAP_TOL

    def reassemble(self) -> np.ndarray:
        d = self.frames.shape[2] if len(self.frames) else self.kernel_frame.shape[1]
        M = np.zeros((d, d))
        for a, (X, Y) in zip(self.alphas, self.frames):
            # M X = -a Y, M Y = a X
            M += a * (np.outer(X, Y) - np.outer(Y, X))
        return M


def skew_spectrum(M, tol: float = 1e-10) -> SkewSpectrum:
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    if M.shape != (d, d):
        raise BadDimensions(f"expected square matrix, got {M.shape}")
    if d and np.abs(M + M.T).max() > tol:
        raise NotSkew("input is not skew-symmetric")
    scale = max(1.0, float(np.abs(M).max()) if d else 1.0)
    zero = 1e-12 * scale
    w, Z = np.linalg.eigh(1j * M)
    pos = np.where(w > zero)[0][::-1]  # descending
    alphas = w[pos]
    frames = np.zeros((len(pos), 2, d))
    for r, idx in enumerate(pos):
        z = Z[:, idx]
        X = np.sqrt(2.0) * z.real
        Y = -np.sqrt(2.0) * z.imag
        frames[r] = X, Y
    multiple = bool(np.any(np.diff(alphas) > -GAP_TOL * max(1.0, alphas[0] if len(alphas) else 1.0)))
    if not multiple:
        frames = np.array([_orient(f, a, M) for f, a in zip(frames, alphas)]).reshape(frames.shape)
    else:
        frames = _orthonormalize_planes(frames, alphas, M)
    n = d - 2 * len(pos)
    if n:
        _, s, Vt = np.linalg.svd(M)
        ker = Vt[d - n:]
        ker = _canonical_basis(ker)
    else:
        ker = np.zeros((0, d))
    return SkewSpectrum(alphas=alphas, kernel_dim=n, frames=frames, kernel_frame=ker, multiple=multiple)


def _orient(frame, alpha, M):
    """Rotate the pair inside its plane so X has positive first nonzero coordinate."""
    X, Y = frame
    P = np.outer(X, X) + np.outer(Y, Y)
    for r in range(P.shape[0]):
        if P[r, r] > 1e-8:
            X = P[:, r] / np.sqrt(P[r, r])
            break
    Y = -(M @ X) / alpha
    return np.array([X, Y / np.linalg.norm(Y)])


def _orthonormalize_planes(frames, alphas, M):
    # within a cluster of equal alphas the eigh basis is already orthonormal;
    # only re-derive Y from X for consistency with the reassembly convention
    out = frames.copy()
    for r, a in enumerate(alphas):
        X = frames[r, 0] / np.linalg.norm(frames[r, 0])
        out[r] = X, -(M @ X) / a
        out[r, 1] /= np.linalg.norm(out[r, 1])
    return out


def _canonical_basis(B):
    """Deterministic orthonormal basis of the row space of B (reduced echelon + QR)."""
    B = np.asarray(B)
    if B.shape[0] == 0:
        return B
    P = B.T @ B
    cols = []
    for r in range(P.shape[0]):
        v = P[:, r].copy()
        for c in cols:
            v -= (c @ v) * c
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == B.shape[0]:
            break
    return np.array(cols)


def golden_min(f, a: float, b: float, xtol: float = 1e-15, max_iter: int = 200) -> float:
    """Golden-section minimiser; robust on kinks such as |x - x0| where Brent stalls."""
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol * max(1.0, abs(a)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def circle_covectors(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def pencil_alphas(W: CarnotStructure, omegas) -> np.ndarray:
    """Batched positive spectrum: rows are the floor(d/2) largest eigenvalues of i*omega A,
    sorted descending (zeros pad the kernel for odd d or degenerate omega)."""
    omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
    M = np.einsum("nk,kij->nij", omegas, W.matrices)
    w = np.linalg.eigvalsh(1j * M)
    m = W.d // 2
    out = w[:, ::-1][:, :m]
    return np.clip(out, 0.0, None)


def circle_alphas(W: CarnotStructure, theta) -> np.ndarray:
    return pencil_alphas(W, circle_covectors(np.atleast_1d(theta)))


@dataclass(frozen=True)
class GenericityReport:
    min_gap: float
    min_alpha: float
    integer_collisions: list = field(default_factory=list)
    verdict: str = "pass"


def genericity_scan(W: CarnotStructure, p=None, samples: int = 64, tol: float = 1e-6,
                    seed: int = 0) -> GenericityReport:
    """Probe the unit sphere of W for coincident or vanishing eigenvalues. Never raises."""
    samples = max(int(samples), 16)
    m = W.d // 2
    if W.l == 1:
        omegas = np.array([[1.0], [-1.0]])
    elif W.l == 2:
        theta = np.linspace(0.0, np.pi, samples, endpoint=False)  # alphas are even in omega
        omegas = circle_covectors(theta)
    else:
        g = np.random.default_rng(seed).standard_normal((samples, W.l))
        omegas = g / np.linalg.norm(g, axis=1, keepdims=True)
    al = pencil_alphas(W, omegas)
    gaps = -np.diff(al, axis=1) if m > 1 else np.full((len(al), 0), np.inf)
    min_gap = float(gaps.min()) if gaps.size else float("inf")
    min_alpha = float(al.min()) if al.size else float("inf")
    collisions = []
    if W.l == 2 and m > 1:
        for j in range(m - 1):
            g = gaps[:, j]
            n = len(g)
            for i in range(n):
                if g[i] <= g[(i - 1) % n] and g[i] <= g[(i + 1) % n]:
                    a, b = theta[i] - np.pi / samples, theta[i] + np.pi / samples
                    f = lambda t: float(-np.diff(circle_alphas(W, t)[0])[j])
                    x = golden_min(f, a, b)
                    fx = f(x)
                    if fx < tol:
                        t = float(np.mod(x, np.pi))
                        a_t = circle_alphas(W, t)[0][j]
                        if a_t > tol:
                            collisions.append(tuple(float(x) for x in circle_covectors(t) / a_t))
                    min_gap = min(min_gap, float(fx))
    ok = min_gap > tol and min_alpha > tol and not collisions
    return GenericityReport(min_gap=min_gap, min_alpha=min_alpha,
                            integer_collisions=sorted(set(collisions)),
                            verdict="pass" if ok else "warn")
