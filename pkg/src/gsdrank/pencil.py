"""Real generalized Schur (QZ) machinery for square matrix pairs.

All transforms are orthogonal and are accumulated so that for the source
pair ``(A, B)`` the returned factors satisfy ``F = Q @ A @ Z`` and
``G = Q @ B @ Z``.  ``G`` is upper triangular and ``F`` is quasi-upper
triangular with 1x1 and 2x2 diagonal blocks; after the final splitting pass
every 2x2 block carries a pair of complex conjugate eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (DimensionError, IdenticallySingularPencil,
                     QZConvergenceError, SwapNotPossible)
from .tensor import as_matrix

__all__ = [
    "PencilQZ",
    "GeneralizedEigenvalue",
    "real_qz",
    "triangularize_real_2x2",
    "swap_adjacent_blocks",
    "solve_sylvester_2x1",
    "generalized_eigenvalues",
    "is_singular_pencil",
    "singularity_score",
    "block_structure",
]

EPS = np.finfo(np.float64).eps
REAL_DISC_RTOL = 1e-10


@dataclass(frozen=True)
class PencilQZ:
    """Generalized real Schur form ``F = Q A Z``, ``G = Q B Z``."""

    Q: np.ndarray
    Z: np.ndarray
    F: np.ndarray
    G: np.ndarray
    blocks: tuple = field(default=())
    iterations: int = 0

    @property
    def n(self):
        return self.F.shape[0]

    def eigenvalues(self):
        return _eigs_from_form(self.F, self.G, self.blocks)


@dataclass(frozen=True)
class GeneralizedEigenvalue:
    """Homogeneous eigenvalue ``alpha / beta`` of a pencil ``A - lambda B``.

    ``beta`` is real and nonnegative; ``beta == 0`` encodes an infinite
    eigenvalue. ``alpha`` is complex for members of a conjugate pair.
    """

    alpha: complex
    beta: float

    @property
    def is_infinite(self):
        return self.beta == 0.0

    @property
    def is_real(self):
        return complex(self.alpha).imag == 0.0

    @property
    def value(self):
        if self.beta == 0.0:
            return complex(math.inf, 0.0) if self.alpha != 0 else complex(math.nan, math.nan)
        v = complex(self.alpha) / self.beta
        return v


# --------------------------------------------------------------------------
# elementary transforms

def _givens(a, b):
    """Return ``(c, s)`` with ``[[c, s], [-s, c]] @ [a, b] = [r, 0]``."""
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def _rot_rows(M, i, j, c, s):
    mi = M[i].copy()
    M[i] = c * mi + s * M[j]
    M[j] = -s * mi + c * M[j]


def _rot_cols(M, i, j, c, s):
    """Apply ``[M_i, M_j] @ [[c, s], [-s, c]]``."""
    mi = M[:, i].copy()
    M[:, i] = c * mi - s * M[:, j]
    M[:, j] = s * mi + c * M[:, j]


def _house(x):
    """Householder vector ``v`` (or None) with ``(I - 2vv^T/v^Tv) x = -+||x|| e_1``."""
    sigma = float(np.dot(x[1:], x[1:]))
    if sigma == 0.0:
        return None
    alpha = math.sqrt(x[0] * x[0] + sigma)
    v = np.array(x, dtype=np.float64)
    v[0] += alpha if x[0] >= 0 else -alpha
    return v


def _reflect_rows(M, rows, v):
    w = 2.0 / np.dot(v, v)
    sub = M[rows]
    M[rows] = sub - w * np.outer(v, v @ sub)


def _reflect_cols(M, cols, v):
    w = 2.0 / np.dot(v, v)
    sub = M[:, cols]
    M[:, cols] = sub - w * np.outer(sub @ v, v)


class _Work:
    """Mutable state shared by the QZ kernels: ``F = Q A Z``, ``G = Q B Z``."""

    def __init__(self, A, B):
        n = A.shape[0]
        self.F = A.copy()
        self.G = B.copy()
        self.Q = np.eye(n)
        self.Z = np.eye(n)

    def rot_rows(self, i, j, c, s):
        _rot_rows(self.F, i, j, c, s)
        _rot_rows(self.G, i, j, c, s)
        _rot_rows(self.Q, i, j, c, s)

    def rot_cols(self, i, j, c, s):
        _rot_cols(self.F, i, j, c, s)
        _rot_cols(self.G, i, j, c, s)
        _rot_cols(self.Z, i, j, c, s)

    def reflect_rows(self, rows, v):
        _reflect_rows(self.F, rows, v)
        _reflect_rows(self.G, rows, v)
        _reflect_rows(self.Q, rows, v)

    def reflect_cols(self, cols, v):
        _reflect_cols(self.F, cols, v)
        _reflect_cols(self.G, cols, v)
        _reflect_cols(self.Z, cols, v)

    def left(self, rows, M):
        """Premultiply ``rows`` of F, G, Q by the small orthogonal ``M``."""
        for X in (self.F, self.G, self.Q):
            X[rows] = M @ X[rows]

    def right(self, cols, M):
        for X in (self.F, self.G, self.Z):
            X[:, cols] = X[:, cols] @ M

    def zero_col_entry(self, r, i, j, X):
        """Column rotation on ``(i, j)`` that zeroes ``X[r, i]``."""
        a, b = X[r, j], X[r, i]
        if b == 0.0:
            return
        h = math.hypot(a, b)
        self.rot_cols(i, j, a / h, b / h)
        X[r, i] = 0.0


# --------------------------------------------------------------------------
# Hessenberg-triangular reduction and QZ sweep

def _hessenberg_triangular(W):
    F, G = W.F, W.G
    n = F.shape[0]
    for k in range(n - 1):
        v = _house(G[k:, k])
        if v is not None:
            W.reflect_rows(slice(k, n), v)
            G[k + 1:, k] = 0.0
    for j in range(n - 2):
        for i in range(n - 1, j + 1, -1):
            if F[i, j] == 0.0:
                continue
            c, s = _givens(F[i - 1, j], F[i, j])
            W.rot_rows(i - 1, i, c, s)
            F[i, j] = 0.0
            W.zero_col_entry(i, i - 1, i, G)


def _chase_infinite(W, lo, hi, k):
    """Deflate the zero ``G[k, k]`` of the active window ``lo..hi``."""
    F, G = W.F, W.G
    G[k, k] = 0.0
    if k == lo:
        c, s = _givens(F[lo, lo], F[lo + 1, lo])
        W.rot_rows(lo, lo + 1, c, s)
        F[lo + 1, lo] = 0.0
        G[lo + 1, lo] = 0.0
        return
    for m in range(k, hi):
        c, s = _givens(G[m, m + 1], G[m + 1, m + 1])
        W.rot_rows(m, m + 1, c, s)
        G[m + 1, m + 1] = 0.0
        G[m + 1, m] = 0.0
        if m > lo:
            W.zero_col_entry(m + 1, m - 1, m, F)
            G[m, m - 1] = 0.0
            G[m + 1, m - 1] = 0.0
    W.zero_col_entry(hi, hi - 1, hi, F)
    G[hi, hi - 1] = 0.0


def _double_shift_sweep(W, lo, hi, exceptional):
    F, G = W.F, W.G
    m = hi - lo + 1
    Fw = F[lo:hi + 1, lo:hi + 1]
    Gw = G[lo:hi + 1, lo:hi + 1]
    # M = Fw Gw^{-1} is upper Hessenberg
    M = solve_triangular(Gw, Fw.T, trans="T", lower=False).T
    if exceptional:
        sigma = abs(M[m - 1, m - 2]) + abs(M[m - 2, m - 3])
        s, t = 1.5 * sigma + M[m - 1, m - 1], sigma * sigma
    else:
        s = M[m - 2, m - 2] + M[m - 1, m - 1]
        t = M[m - 2, m - 2] * M[m - 1, m - 1] - M[m - 2, m - 1] * M[m - 1, m - 2]
    x = M[:3, :2] @ M[:2, 0] - s * M[:3, 0]
    x[0] += t

    for k in range(lo, hi - 1):
        v = _house(x if k == lo else F[k:k + 3, k - 1])
        if v is not None:
            W.reflect_rows(slice(k, k + 3), v)
        if k > lo:
            F[k + 1, k - 1] = 0.0
            F[k + 2, k - 1] = 0.0
        # restore G: zero G[k+2, k:k+2] then G[k+1, k]
        v = _house(G[k + 2, k:k + 3][::-1].copy())
        if v is not None:
            W.reflect_cols(slice(k, k + 3), v[::-1].copy())
        G[k + 2, k] = 0.0
        G[k + 2, k + 1] = 0.0
        W.zero_col_entry(k + 1, k, k + 1, G)
        G[k + 1, k] = 0.0
    k = hi - 1
    c, s_ = _givens(F[k, k - 1], F[k + 1, k - 1])
    W.rot_rows(k, k + 1, c, s_)
    F[k + 1, k - 1] = 0.0
    W.zero_col_entry(k + 1, k, k + 1, G)
    G[k + 1, k] = 0.0


def _real_disc(F, G):
    """Coefficients of ``det(beta F - alpha G) = c0 b^2 + c1 a b + c2 a^2``."""
    c0 = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    c2 = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    c1 = -(F[0, 0] * G[1, 1] + F[1, 1] * G[0, 0] - F[0, 1] * G[1, 0] - F[1, 0] * G[0, 1])
    return c0, c1, c2


def _has_real_eigenvalue(Fi, Gi, rtol=REAL_DISC_RTOL):
    c0, c1, c2 = _real_disc(Fi, Gi)
    disc = c1 * c1 - 4.0 * c0 * c2
    scale = c1 * c1 + 4.0 * abs(c0 * c2)
    if scale == 0.0:
        return True
    return disc >= -rtol * scale


def _real_roots(Fi, Gi):
    """Real homogeneous roots ``(alpha, beta)`` of the 2x2 pencil (best effort)."""
    c0, c1, c2 = _real_disc(Fi, Gi)
    disc = max(c1 * c1 - 4.0 * c0 * c2, 0.0)
    sq = math.sqrt(disc)
    roots = []
    big = max(abs(c0), abs(c1), abs(c2))
    if big == 0.0:
        return [(0.0, 1.0), (1.0, 0.0)]
    if abs(c2) >= abs(c0):
        # quadratic in alpha with beta = 1
        if c2 == 0.0:
            roots = [(0.0, 1.0), (1.0, 0.0)]
        else:
            q = -0.5 * (c1 + math.copysign(sq, c1))
            r1 = q / c2
            r2 = c0 / q if q != 0.0 else r1
            roots = [(r1, 1.0), (r2, 1.0)]
    else:
        q = -0.5 * (c1 + math.copysign(sq, c1))
        r1 = q / c0
        r2 = c2 / q if q != 0.0 else r1
        roots = [(1.0, r1), (1.0, r2)]
    return roots


def _rotation_to_e1(w):
    """2x2 rotation ``R`` with ``R @ w`` a multiple of ``e_1``."""
    c, s = _givens(w[0], w[1])
    return np.array([[c, s], [-s, c]])


def _triangularizers(Fi, Gi, alpha, beta):
    M = beta * Fi - alpha * Gi
    _, _, vt = np.linalg.svd(M)
    z1 = vt[-1]
    Zt = np.array([[z1[0], -z1[1]], [z1[1], z1[0]]])
    P = np.column_stack([Fi @ z1, Gi @ z1])
    u, _, _ = np.linalg.svd(P)
    w = u[:, 0]
    Qt = _rotation_to_e1(w)
    F2 = Qt @ Fi @ Zt
    G2 = Qt @ Gi @ Zt
    err = math.hypot(F2[1, 0], G2[1, 0])
    return Qt, Zt, err


def triangularize_real_2x2(Fi, Gi, rtol=REAL_DISC_RTOL):
    """Rotations that make a 2x2 pair simultaneously upper triangular.

    Parameters
    ----------
    Fi, Gi : array_like, shape (2, 2)
        Diagonal block pair; ``Gi`` is normally upper triangular.
    rtol : float
        Relative tolerance on the discriminant; slightly negative values are
        treated as a double real eigenvalue.

    Returns
    -------
    tuple of ndarray or None
        ``(Qt, Zt)`` orthogonal with ``Qt @ Fi @ Zt`` and ``Qt @ Gi @ Zt``
        upper triangular, or None when the pair has no real generalized
        eigenvalue.
    """
    Fi = as_matrix(Fi, "Fi")
    Gi = as_matrix(Gi, "Gi")
    if Fi.shape != (2, 2) or Gi.shape != (2, 2):
        raise DimensionError("triangularize_real_2x2 needs 2x2 blocks")
    if Fi[1, 0] == 0.0 and Gi[1, 0] == 0.0:
        return np.eye(2), np.eye(2)
    if not _has_real_eigenvalue(Fi, Gi, rtol):
        return None
    best = None
    for alpha, beta in _real_roots(Fi, Gi):
        nrm = math.hypot(alpha, beta)
        Qt, Zt, err = _triangularizers(Fi, Gi, alpha / nrm, beta / nrm)
        if best is None or err < best[2]:
            best = (Qt, Zt, err)
    return best[0], best[1]


# --------------------------------------------------------------------------

def block_structure(F):
    """Start indices and sizes of the diagonal blocks of a quasi-triangular F."""
    n = F.shape[0]
    blocks = []
    k = 0
    while k < n:
        if k + 1 < n and F[k + 1, k] != 0.0:
            blocks.append((k, 2))
            k += 2
        else:
            blocks.append((k, 1))
            k += 1
    return tuple(blocks)


def _split_singular_block(W, start, thresh):
    """Split a 2x2 block pair that is singular to within ``thresh``.

    Such a block hides a (nearly) common zero of both diagonals; it is
    exposed through a shared left or right null vector of the two blocks.
    Returns True when the block was split.
    """
    F, G = W.F, W.G
    sl = slice(start, start + 2)
    Fi, Gi = F[sl, sl], G[sl, sl]
    ul, sv_l, _ = np.linalg.svd(np.hstack([Fi, Gi]))
    _, sv_r, vr = np.linalg.svd(np.vstack([Fi, Gi]))
    if min(sv_l[-1], sv_r[-1]) > thresh:
        return False
    if sv_l[-1] <= sv_r[-1]:
        u = ul[:, -1]
        W.left(sl, np.array([[u[1], -u[0]], [u[0], u[1]]]))
    else:
        z = vr[-1]
        W.right(sl, np.array([[z[0], -z[1]], [z[1], z[0]]]))
    F[start + 1, start] = 0.0
    G[start + 1, start] = 0.0
    return True


def _split_real_blocks(W, rtol=REAL_DISC_RTOL, sing_thresh=0.0):
    F, G = W.F, W.G
    for start, size in block_structure(F):
        if size != 2:
            continue
        if sing_thresh > 0.0 and _split_singular_block(W, start, sing_thresh):
            continue
        sl = slice(start, start + 2)
        res = triangularize_real_2x2(F[sl, sl], G[sl, sl], rtol)
        if res is None:
            continue
        Qt, Zt = res
        W.left(sl, Qt)
        W.right(sl, Zt)
        F[start + 1, start] = 0.0
        G[start + 1, start] = 0.0


def real_qz(A, B, max_iter=None, split_real=True):
    """Real generalized Schur decomposition of the pair ``(A, B)``.

    Hessenberg-triangular reduction followed by implicit double-shift QZ
    sweeps with deflation. Zero diagonal entries of the triangular factor
    are chased out as infinite eigenvalues.

    Parameters
    ----------
    A, B : array_like, shape (n, n)
    max_iter : int, optional
        Sweep budget; defaults to ``30 * n``.
    split_real : bool
        Split every converged 2x2 block that has a real eigenvalue into two
        1x1 blocks.

    Returns
    -------
    PencilQZ

    Raises
    ------
    QZConvergenceError
        If the sweep budget is exhausted.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise DimensionError(f"need two square matrices of equal size, got {A.shape}, {B.shape}")
    if max_iter is None:
        max_iter = 30 * n

    W = _Work(A, B)
    F, G = W.F, W.G
    _hessenberg_triangular(W)

    anorm = np.linalg.norm(A)
    bnorm = np.linalg.norm(B)
    atol = EPS * anorm
    btol = EPS * bnorm

    hi = n - 1
    iters = 0
    stall = 0
    while hi >= 1:
        for k in range(hi, 0, -1):
            sub = abs(F[k, k - 1])
            if sub != 0.0 and (sub <= EPS * (abs(F[k - 1, k - 1]) + abs(F[k, k])) or sub <= atol):
                F[k, k - 1] = 0.0
        lo = hi
        while lo > 0 and F[lo, lo - 1] != 0.0:
            lo -= 1
        size = hi - lo + 1
        if size <= 2:
            hi = lo - 1
            stall = 0
            continue
        zero = next((k for k in range(lo, hi + 1) if abs(G[k, k]) <= btol), None)
        if zero is not None:
            _chase_infinite(W, lo, hi, zero)
            stall = 0
            continue
        iters += 1
        stall += 1
        if iters > max_iter:
            raise QZConvergenceError(
                f"QZ did not converge within {max_iter} sweeps (active window {lo}..{hi})")
        _double_shift_sweep(W, lo, hi, exceptional=(stall % 10 == 0))

    F[np.tril_indices(n, -2)] = 0.0
    G[np.tril_indices(n, -1)] = 0.0
    if split_real:
        _split_real_blocks(W, sing_thresh=100 * n * EPS * (anorm + bnorm))
    return PencilQZ(Q=W.Q, Z=W.Z, F=F, G=G, blocks=block_structure(F), iterations=iters)


# --------------------------------------------------------------------------
# eigenvalues

def _eig_1x1(f, g):
    if g < 0.0 or (g == 0.0 and f < 0.0):
        f, g = -f, -g
    return GeneralizedEigenvalue(alpha=complex(f, 0.0), beta=float(g))


def _eigs_2x2_complex(Fi, Gi):
    c0, c1, c2 = _real_disc(Fi, Gi)
    # det(F - lam G) = c2 lam^2 + c1 lam + c0 with G nonsingular here
    disc = c1 * c1 - 4.0 * c0 * c2
    re = -c1 / (2.0 * c2)
    im = math.sqrt(max(-disc, 0.0)) / (2.0 * abs(c2))
    beta = math.sqrt(abs(c2))
    return [GeneralizedEigenvalue(alpha=complex(re, im) * beta, beta=beta),
            GeneralizedEigenvalue(alpha=complex(re, -im) * beta, beta=beta)]


def _eigs_from_form(F, G, blocks):
    out = []
    for start, size in blocks:
        if size == 1:
            out.append(_eig_1x1(F[start, start], G[start, start]))
        else:
            sl = slice(start, start + 2)
            out.extend(_eigs_2x2_complex(F[sl, sl], G[sl, sl]))
    return out


def generalized_eigenvalues(A, B, sing_tol=1e-10):
    """Generalized eigenvalues of ``A - lambda B`` as homogeneous pairs.

    Raises
    ------
    IdenticallySingularPencil
        If ``det(mu A + lambda B)`` vanishes identically.
    """
    if is_singular_pencil(A, B, sing_tol):
        raise IdenticallySingularPencil("det(mu A + lambda B) vanishes identically")
    return real_qz(A, B).eigenvalues()


def _sample_angles(n):
    # offset keeps the samples away from the axis-aligned directions
    return (np.arange(n + 1) + 0.5 + 0.1234567) * np.pi / (n + 1)


def singularity_score(A, B):
    """Largest sampled ``|det(cos t A + sin t B)|`` relative to its Hadamard bound.

    The determinant is a homogeneous polynomial of degree ``n`` in
    ``(cos t, sin t)``, so ``n + 1`` distinct angles on the half circle
    determine it; a score of zero means the pencil is identically singular.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise DimensionError("singularity test needs square matrices of equal size")
    best = 0.0
    for t in _sample_angles(n):
        M = math.cos(t) * A + math.sin(t) * B
        bound = float(np.prod(np.linalg.norm(M, axis=1)))
        if bound == 0.0:
            continue
        best = max(best, abs(np.linalg.det(M)) / bound)
    return best


def is_singular_pencil(A, B, tol=1e-10):
    """True iff ``det(mu A + lambda B)`` vanishes identically (to ``tol``)."""
    return singularity_score(A, B) <= tol


# --------------------------------------------------------------------------
# block swapping

def solve_sylvester_2x1(Fi, f, f_next, Gi, g, g_next):
    """Solve ``Fi x - f_next y = f``, ``Gi x - g_next y = g`` for ``x, y``.

    Uses the closed form obtained by eliminating ``y`` through whichever of
    ``g_next`` and ``f_next`` is larger in magnitude.

    Raises
    ------
    SwapNotPossible
        If both coupling scalars vanish or the shifted block is singular.
    """
    Fi = np.asarray(Fi, dtype=float)
    Gi = np.asarray(Gi, dtype=float)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f_next == 0.0 and g_next == 0.0:
        raise SwapNotPossible("both coupling scalars are zero")
    try:
        if abs(g_next) >= abs(f_next):
            rho = f_next / g_next
            x = np.linalg.solve(Fi - rho * Gi, f - rho * g)
            y = (Gi @ x - g) / g_next
        else:
            rho = g_next / f_next
            x = np.linalg.solve(Gi - rho * Fi, g - rho * f)
            y = (Fi @ x - f) / f_next
    except np.linalg.LinAlgError as exc:
        raise SwapNotPossible("shifted 2x2 block is singular") from exc
    return x, y


def _solve_coupled_sylvester(A11, A12, A22, B11, B12, B22):
    """Solve ``A11 R - L A22 = -A12``, ``B11 R - L B22 = -B12``."""
    p, q = A12.shape
    if (p, q) == (2, 1):
        x, y = solve_sylvester_2x1(A11, A12[:, 0], A22[0, 0], B11, B12[:, 0], B22[0, 0])
        return -x.reshape(2, 1), -y.reshape(2, 1)
    if (p, q) == (1, 2):
        # transposed: A22^T L^T - a11 R^T = A12^T
        x, y = solve_sylvester_2x1(A22.T, A12[0], A11[0, 0], B22.T, B12[0], B11[0, 0])
        return y.reshape(1, 2), x.reshape(1, 2)
    Ip, Iq = np.eye(p), np.eye(q)
    K = np.block([[np.kron(Iq, A11), -np.kron(A22.T, Ip)],
                  [np.kron(Iq, B11), -np.kron(B22.T, Ip)]])
    rhs = -np.concatenate([A12.ravel(order="F"), B12.ravel(order="F")])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise SwapNotPossible("blocks share an eigenvalue") from exc
    if not np.all(np.isfinite(sol)):
        raise SwapNotPossible("blocks share an eigenvalue")
    R = sol[:p * q].reshape((p, q), order="F")
    L = sol[p * q:].reshape((p, q), order="F")
    return R, L


def _swap_in_place(W, start, p, q, tol):
    F, G = W.F, W.G
    m = p + q
    w = slice(start, start + m)
    a, b = slice(start, start + p), slice(start + p, start + m)
    R, L = _solve_coupled_sylvester(F[a, a], F[a, b], F[b, b], G[a, a], G[a, b], G[b, b])
    Zf, _ = np.linalg.qr(np.vstack([R, np.eye(q)]), mode="complete")
    Yf, _ = np.linalg.qr(np.vstack([L, np.eye(q)]), mode="complete")
    scale = np.linalg.norm(F[w, w]) + np.linalg.norm(G[w, w])
    W.left(w, Yf.T)
    W.right(w, Zf)
    lower = slice(start + q, start + m), slice(start, start + q)
    err = np.linalg.norm(F[lower]) + np.linalg.norm(G[lower])
    if err > tol * max(scale, np.finfo(float).tiny):
        raise SwapNotPossible(f"swap residual {err:.3e} exceeds tolerance")
    F[lower] = 0.0
    G[lower] = 0.0
    # re-triangularize the diagonal blocks of G
    for s0, size in ((start, q), (start + q, p)):
        if size == 2:
            sl = slice(s0, s0 + 2)
            Qt = _rotation_to_e1(G[sl, s0])
            W.left(sl, Qt)
            G[s0 + 1, s0] = 0.0


def swap_adjacent_blocks(F, G, i, tol=1e-10):
    """Exchange diagonal blocks ``i`` and ``i + 1`` of a quasi-triangular pair.

    Parameters
    ----------
    F, G : array_like, shape (n, n)
        Quasi-upper-triangular ``F`` and upper-triangular ``G``.
    i : int
        Zero-based index into ``block_structure(F)``.
    tol : float
        Largest relative size of the discarded coupling block.

    Returns
    -------
    F2, G2, Qacc, Zacc : ndarray
        ``F2 = Qacc @ F @ Zacc`` and ``G2 = Qacc @ G @ Zacc`` with the two
        blocks in exchanged order.

    Raises
    ------
    SwapNotPossible
        If the blocks share an eigenvalue, a 1x1 block is ``(0, 0)``, or the
        swap would not be backward stable to ``tol``.
    """
    F = as_matrix(F, "F")
    G = as_matrix(G, "G")
    blocks = block_structure(F)
    if not 0 <= i < len(blocks) - 1:
        raise IndexError(f"block index {i} out of range for {len(blocks)} blocks")
    W = _Work(F, G)
    start, p = blocks[i]
    _, q = blocks[i + 1]
    _swap_in_place(W, start, p, q, tol)
    return W.F, W.G, W.Q, W.Z
