"""Generalized Schur decompositions of ``I x J x 2`` arrays.

A GSD of size ``R`` writes both frontal slices as ``Y_k = Qa @ R_k @ Qb.T``
with column-orthonormal ``Qa`` (``I x R``), ``Qb`` (``J x R``) and upper
triangular ``R_1``, ``R_2``.  The set of arrays admitting one coincides with
the closure of the rank-``R`` set, so fitting a GSD is a well-posed stand-in
for best rank-``R`` approximation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionError, ExteriorPoint, GSDRankError, NotInterior,
                     NotSingularPencil, NumericalBreakdown, SwapNotPossible)
from .pencil import (_split_singular_block, _swap_in_place, _Work, block_structure,
                     is_singular_pencil, real_qz)
from .tensor import CPFactors, Tensor3, as_matrix, slicemix

__all__ = [
    "GSD",
    "FitReport",
    "gsd_reconstruct",
    "full_gsd_singular_pencil",
    "full_gsd",
    "best_gsd_fit",
    "extract_cp_interior",
    "embed_core",
    "closure_membership",
]

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-10
EXACT_FIT_RTOL = 1e-13


def _check_orthonormal_columns(M, name, tol=ORTHO_TOL):
    R = M.shape[1]
    err = np.abs(M.T @ M - np.eye(R)).max() if R else 0.0
    if err > tol:
        raise ValueError(f"{name} is not column-orthonormal (max deviation {err:.2e})")


@dataclass(frozen=True)
class GSD:
    """Column-orthonormal ``Qa``, ``Qb`` and upper-triangular ``R1``, ``R2``."""

    Qa: np.ndarray
    Qb: np.ndarray
    R1: np.ndarray
    R2: np.ndarray

    def __post_init__(self):
        Qa = as_matrix(self.Qa, "Qa")
        Qb = as_matrix(self.Qb, "Qb")
        R1 = as_matrix(self.R1, "R1")
        R2 = as_matrix(self.R2, "R2")
        R = Qa.shape[1]
        if Qb.shape[1] != R or R1.shape != (R, R) or R2.shape != (R, R):
            raise DimensionError(
                f"inconsistent GSD shapes Qa{Qa.shape} Qb{Qb.shape} R1{R1.shape} R2{R2.shape}")
        if R > min(Qa.shape[0], Qb.shape[0]):
            raise DimensionError(f"GSD size {R} exceeds min(I, J)")
        _check_orthonormal_columns(Qa, "Qa")
        _check_orthonormal_columns(Qb, "Qb")
        for name, M in (("R1", R1), ("R2", R2)):
            if np.any(np.tril(M, -1) != 0.0):
                raise ValueError(f"{name} is not upper triangular")
        object.__setattr__(self, "Qa", Qa)
        object.__setattr__(self, "Qb", Qb)
        object.__setattr__(self, "R1", R1)
        object.__setattr__(self, "R2", R2)

    @property
    def rank(self):
        return self.Qa.shape[1]

    @property
    def dims(self):
        return self.Qa.shape[0], self.Qb.shape[0]

    def reconstruct(self):
        return gsd_reconstruct(self)

    def core(self):
        """The ``R x R x 2`` array of triangular slices."""
        return Tensor3.from_slices(self.R1, self.R2)


@dataclass
class FitReport:
    """Outcome of a multistart GSD fit.

    ``trace`` holds the Frobenius residual before the first sweep and after
    each sweep of the winning start.
    """

    trace: list
    converged: bool
    sweeps: int
    residual: float
    start: str = ""
    start_residuals: list = field(default_factory=list)


def gsd_reconstruct(D, I=None, J=None):
    """Tensor with slices ``Qa @ R_k @ Qb.T``."""
    if I is not None and I != D.Qa.shape[0]:
        raise DimensionError(f"Qa has {D.Qa.shape[0]} rows, expected I = {I}")
    if J is not None and J != D.Qb.shape[0]:
        raise DimensionError(f"Qb has {D.Qb.shape[0]} rows, expected J = {J}")
    return Tensor3.from_slices(D.Qa @ D.R1 @ D.Qb.T, D.Qa @ D.R2 @ D.Qb.T)


def _relative_residual(Y, D):
    nrm = Y.norm()
    diff = np.linalg.norm((Y.data - gsd_reconstruct(D).data).ravel())
    return diff / nrm if nrm > 0 else diff


# --------------------------------------------------------------------------
# constructive full GSD of an identically singular pencil

def _orth_completion(v):
    """Orthogonal matrix whose first column is ``v / ||v||``."""
    Qf, _ = np.linalg.qr(v.reshape(-1, 1), mode="complete")
    return Qf


def _eliminate_after(W, s):
    """2x2 block at ``s, s+1`` followed by the common zero at ``s+2``."""
    F, G = W.F, W.G
    rows = np.vstack([F[s + 1, s:s + 3], G[s + 1, s:s + 3]])
    z1 = np.linalg.svd(rows)[2][-1]
    W.right(slice(s, s + 3), _orth_completion(z1))
    F[s + 1, s] = G[s + 1, s] = 0.0
    F[s + 2, s:s + 3] = 0.0
    G[s + 2, s:s + 3] = 0.0


def _eliminate_before(W, s):
    """Common zero at ``s`` followed by the 2x2 block at ``s+1, s+2``."""
    F, G = W.F, W.G
    cols = np.column_stack([F[s:s + 3, s + 1], G[s:s + 3, s + 1]])
    q3 = np.linalg.svd(cols)[0][:, -1]
    C = _orth_completion(q3)
    M = np.vstack([C[:, 1], C[:, 2], C[:, 0]])
    W.left(slice(s, s + 3), M)
    F[s + 2, s + 1] = G[s + 2, s + 1] = 0.0
    F[s:s + 3, s] = 0.0
    G[s:s + 3, s] = 0.0


def _move_block(W, bi, target_bi, swap_tol):
    """Swap block ``bi`` with its neighbours until it sits at ``target_bi``."""
    while bi != target_bi:
        blocks = block_structure(W.F)
        j = bi if target_bi > bi else bi - 1
        (start, p), (_, q) = blocks[j], blocks[j + 1]
        _swap_in_place(W, start, p, q, swap_tol)
        bi += 1 if target_bi > bi else -1
    return bi


def full_gsd_singular_pencil(Y, tol=1e-10, zero_tol=1e-10, swap_tol=1e-10):
    """Full GSD of an ``n x n x 2`` array whose pencil is identically singular.

    The generalized real Schur form of ``(Y_1, Y_2)`` has a position where
    both diagonals vanish. Every remaining 2x2 block of complex eigenvalues is
    moved next to such a common zero by block swaps and then split by a 3x3
    orthogonal elimination that keeps the common zero in place.

    Parameters
    ----------
    Y : Tensor3
        Array with square slices.
    tol : float
        Singularity threshold passed to :func:`is_singular_pencil`.
    zero_tol : float
        Diagonal pairs with ``hypot(f_kk, g_kk) <= zero_tol * (||Y_1|| + ||Y_2||)``
        count as common zeros and are set to exactly zero.
    swap_tol : float
        Backward-stability threshold for block swaps.

    Returns
    -------
    GSD

    Raises
    ------
    NotSingularPencil
        If the pencil is regular.
    NumericalBreakdown
        If no common zero is found or the result misses ``1e-10`` relative
        accuracy.
    """
    Y.require_square()
    Y1, Y2 = Y.slices
    n = Y1.shape[0]
    if not is_singular_pencil(Y1, Y2, tol):
        raise NotSingularPencil("the pencil det(mu Y1 + lambda Y2) is not identically zero")
    scale = np.linalg.norm(Y1) + np.linalg.norm(Y2)
    if scale == 0.0:
        return GSD(np.eye(n), np.eye(n), np.zeros((n, n)), np.zeros((n, n)))

    P = real_qz(Y1, Y2)
    W = _Work(P.F, P.G)
    W.Q, W.Z = P.Q.copy(), P.Z.copy()
    F, G = W.F, W.G
    for start, size in P.blocks:
        if size == 2:
            _split_singular_block(W, start, zero_tol * scale)
    blocks = block_structure(F)

    scores = {start: math.hypot(F[start, start], G[start, start]) / scale
              for start, size in blocks if size == 1}
    zeros = sorted(k for k, v in scores.items() if v <= zero_tol)
    if not zeros:
        smallest = sorted(scores.values())[:3]
        raise NumericalBreakdown(
            f"no common zero on the diagonals; smallest relative magnitudes {smallest}")
    for k in zeros:
        F[k, k] = G[k, k] = 0.0

    try:
        while True:
            blocks = block_structure(F)
            pairs = [bi for bi, (_, size) in enumerate(blocks) if size == 2]
            if not pairs:
                break
            zero_bi = [bi for bi, (start, size) in enumerate(blocks)
                       if size == 1 and start in zeros]
            bi, zi = min(((b, z) for b in pairs for z in zero_bi),
                         key=lambda t: (abs(t[0] - t[1]), t[0]))
            if bi < zi:
                bi = _move_block(W, bi, zi - 1, swap_tol)
                _eliminate_after(W, block_structure(F)[bi][0])
            else:
                bi = _move_block(W, bi, zi + 1, swap_tol)
                _eliminate_before(W, block_structure(F)[zi][0])
    except SwapNotPossible as exc:
        raise NumericalBreakdown(f"block reordering failed: {exc}") from exc

    R1 = np.triu(F)
    R2 = np.triu(G)
    D = GSD(Qa=W.Q.T, Qb=W.Z, R1=R1, R2=R2)
    res = _relative_residual(Y, D)
    if res > 1e-10:
        raise NumericalBreakdown(f"constructed GSD has relative residual {res:.3e}")
    return D


# --------------------------------------------------------------------------
# best-fitting GSD

def _random_orthogonal(rng, n):
    Q, Rm = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.where(np.diag(Rm) == 0, 1.0, np.diag(Rm)))


def _square_start(X1, X2, sing_tol):
    """Orthogonal ``(Ua, Ub)`` that make ``(X1, X2)`` as triangular as QZ can."""
    n = X1.shape[0]
    try:
        if is_singular_pencil(X1, X2, sing_tol):
            D = full_gsd_singular_pencil(Tensor3.from_slices(X1, X2), tol=sing_tol)
            return D.Qa, D.Qb
        P = real_qz(X1, X2)
        return P.Q.T, P.Z
    except GSDRankError as exc:
        log.debug("structured start fell back to identity: %s", exc)
        return np.eye(n), np.eye(n)


def _structured_start(Zd, R, sing_tol):
    """Subspace projection followed by a Schur-type start on the core."""
    I, J, _ = Zd.shape
    Z1, Z2 = Zd[:, :, 0], Zd[:, :, 1]
    U = np.linalg.svd(np.hstack([Z1, Z2]))[0]
    V = np.linalg.svd(np.vstack([Z1, Z2]))[2].T
    S, T = U[:, :R], V[:, :R]
    Qc, Zc = _square_start(S.T @ Z1 @ T, S.T @ Z2 @ T, sing_tol)
    return np.hstack([S @ Qc, U[:, R:]]), np.hstack([T @ Zc, V[:, R:]])


def _kept_mask(I, J, R):
    mask = np.zeros((I, J), dtype=bool)
    mask[:R, :R] = np.triu(np.ones((R, R), dtype=bool))
    return mask


def _discarded_norm(X, mask):
    return math.sqrt(float(np.sum(X[:, ~mask] ** 2)))


def _best_angle(M11, M22, M12):
    """Angle maximizing ``[c s] [[M11, M12], [M12, M22]] [c s]^T`` and its gain."""
    theta = 0.5 * math.atan2(2.0 * M12, M11 - M22)
    gain = 0.5 * (M11 - M22) * (math.cos(2 * theta) - 1.0) + M12 * math.sin(2 * theta)
    return theta, gain


def _sweep(X, Ua, Ub, R, floor):
    """One cyclic pass of optimal plane rotations over rows then columns."""
    _, I, J = X.shape
    for p in range(R):
        for q in range(p + 1, I):
            a, b = X[:, p, p:R], X[:, q, p:R]
            M11, M22, M12 = np.sum(a * a), np.sum(b * b), np.sum(a * b)
            if q < R:
                a2, b2 = X[:, p, q:R], X[:, q, q:R]
                M11 += np.sum(b2 * b2)
                M22 += np.sum(a2 * a2)
                M12 -= np.sum(a2 * b2)
            theta, gain = _best_angle(M11, M22, M12)
            if gain <= floor:
                continue
            c, s = math.cos(theta), math.sin(theta)
            xp = X[:, p, :].copy()
            X[:, p, :] = c * xp + s * X[:, q, :]
            X[:, q, :] = -s * xp + c * X[:, q, :]
            up = Ua[:, p].copy()
            Ua[:, p] = c * up + s * Ua[:, q]
            Ua[:, q] = -s * up + c * Ua[:, q]
    for p in range(R):
        for q in range(p + 1, J):
            if q < R:
                # rows 0..p are kept in both columns, so only rows p+1..q
                # (kept in column q, discarded in column p) depend on the angle
                a, b = X[:, p + 1:q + 1, p], X[:, p + 1:q + 1, q]
                M11, M22, M12 = np.sum(b * b), np.sum(a * a), -np.sum(a * b)
            else:
                a, b = X[:, :p + 1, p], X[:, :p + 1, q]
                M11, M22, M12 = np.sum(a * a), np.sum(b * b), np.sum(a * b)
            theta, gain = _best_angle(M11, M22, M12)
            if gain <= floor:
                continue
            c, s = math.cos(theta), math.sin(theta)
            xp = X[:, :, p].copy()
            X[:, :, p] = c * xp + s * X[:, :, q]
            X[:, :, q] = -s * xp + c * X[:, :, q]
            up = Ub[:, p].copy()
            Ub[:, p] = c * up + s * Ub[:, q]
            Ub[:, q] = -s * up + c * Ub[:, q]


def _project(Zs, Ua, Ub):
    return np.einsum("ia,kij,jb->kab", Ua, Zs, Ub, optimize=True)


def _fit_from(Zs, Ua, Ub, R, max_sweeps, tol, znorm):
    _, I, J = Zs.shape
    mask = _kept_mask(I, J, R)
    X = _project(Zs, Ua, Ub)
    trace = [_discarded_norm(X, mask)]
    floor = 1e-30 * znorm * znorm
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        _sweep(X, Ua, Ub, R, floor)
        # re-orthonormalize against rotation drift and recompute exactly
        Ua, _ = _polar(Ua)
        Ub, _ = _polar(Ub)
        X = _project(Zs, Ua, Ub)
        cur = _discarded_norm(X, mask)
        prev = trace[-1]
        trace.append(cur)
        if prev - cur <= tol * prev or cur <= 1e-15 * znorm:
            converged = True
            break
    return Ua, Ub, X, trace, converged, sweeps


def _polar(M):
    u, _, vt = np.linalg.svd(M)
    return u @ vt, None


def best_gsd_fit(Z, R, max_sweeps=500, tol=1e-12, restarts=8, seed=0,
                 structured_start=True, sing_tol=1e-10):
    """Best-fitting GSD of size ``R`` to a ``I x J x 2`` array.

    Minimizes ``||Z - Y||`` over arrays with a GSD of size ``R``. For fixed
    orthogonal factors the optimal triangular slices are the upper triangles
    of ``Qa.T @ Z_k @ Qb``; the factors are improved by cyclic plane rotations
    whose angles are optimal in closed form, so the residual never increases.

    Parameters
    ----------
    Z : Tensor3
    R : int
        GSD size, ``1 <= R <= min(I, J)``.
    max_sweeps : int
    tol : float
        Stop when a sweep lowers the residual by less than ``tol`` relative.
    restarts : int
        Number of seeded random orthogonal starts.
    seed : int
    structured_start : bool
        Also start from a Schur-type initialization of the dominant core.
        It runs first, and once any start fits to ``1e-13 * ||Z||`` the
        remaining starts are skipped.
    sing_tol : float

    Returns
    -------
    GSD, FitReport
    """
    Z.require_k2()
    I, J, _ = Z.shape
    if not (isinstance(R, (int, np.integer)) and 1 <= R <= min(I, J)):
        raise ValueError(f"R must be an integer in 1..min(I, J) = {min(I, J)}, got {R}")
    Zs = np.moveaxis(Z.data, 2, 0).copy()
    znorm = Z.norm()

    starts = []
    if structured_start:
        starts.append(("structured", _structured_start(Z.data, R, sing_tol)))
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        starts.append((f"random-{r}", (_random_orthogonal(rng, I), _random_orthogonal(rng, J))))
    if not starts:
        raise ValueError("need at least one start")

    best = None
    start_residuals = []
    for name, (Ua, Ub) in starts:
        if best is not None and best[0][-1] <= EXACT_FIT_RTOL * znorm:
            break    # exact up to rounding; other starts can only tie
        if znorm == 0.0:
            Ua, Ub, X, trace, conv, sw = Ua, Ub, np.zeros((2, I, J)), [0.0], True, 0
        else:
            Ua, Ub, X, trace, conv, sw = _fit_from(Zs, Ua.copy(), Ub.copy(), R,
                                                   max_sweeps, tol, znorm)
        start_residuals.append(trace[-1])
        if best is None or trace[-1] < best[0][-1]:
            best = (trace, name, Ua, Ub, X, conv, sw)

    trace, name, Ua, Ub, X, conv, sw = best
    D = GSD(Qa=Ua[:, :R], Qb=Ub[:, :R],
            R1=np.triu(X[0, :R, :R]), R2=np.triu(X[1, :R, :R]))
    residual = float(np.linalg.norm((Z.data - gsd_reconstruct(D).data).ravel()))
    report = FitReport(trace=[float(t) for t in trace], converged=conv, sweeps=sw,
                       residual=residual, start=name,
                       start_residuals=[float(v) for v in start_residuals])
    return D, report


def closure_membership(Y, R, tol=1e-6, **fit_opts):
    """Decide whether ``Y`` lies in the closure of the rank-``R`` set.

    Returns ``(member, residual)`` where ``member`` is
    ``residual <= tol * ||Y||`` for the best-fitting GSD of size ``R``.
    """
    _, report = best_gsd_fit(Y, R, **fit_opts)
    return report.residual <= tol * Y.norm(), report.residual


def embed_core(X, S, T, tol=1e-10):
    """Embed an ``R x R x 2`` core: ``(S, T, I_2) . X`` with orthonormal S, T."""
    S = as_matrix(S, "S")
    T = as_matrix(T, "T")
    R = X.shape[0]
    if X.shape != (R, R, 2):
        raise DimensionError(f"core must be R x R x 2, got {X.shape}")
    if S.shape[1] != R or T.shape[1] != R:
        raise DimensionError(f"S and T need {R} columns, got {S.shape}, {T.shape}")
    _check_orthonormal_columns(S, "S", tol)
    _check_orthonormal_columns(T, "T", tol)
    X1, X2 = X.slices
    return Tensor3.from_slices(S @ X1 @ T.T, S @ X2 @ T.T)


def full_gsd(Y, sing_tol=1e-10, zero_tol=1e-10):
    """Exact GSD of size ``n`` of an ``n x n x 2`` array, when one exists.

    Identically singular pencils go through
    :func:`full_gsd_singular_pencil`; otherwise the real QZ form of
    ``(Y_1, Y_2)`` is already triangular when all eigenvalues are real.

    Raises
    ------
    ExteriorPoint
        If the pencil is regular with a complex eigenvalue pair.
    """
    Y.require_square()
    Y1, Y2 = Y.slices
    if is_singular_pencil(Y1, Y2, tol=sing_tol):
        return full_gsd_singular_pencil(Y, tol=sing_tol, zero_tol=zero_tol)
    qz = real_qz(Y1, Y2)
    if any(size == 2 for _, size in qz.blocks):
        raise ExteriorPoint("pencil has a complex eigenvalue pair; no real GSD of full size")
    return GSD(Qa=qz.Q.T, Qb=qz.Z, R1=np.triu(qz.F), R2=np.triu(qz.G))


# --------------------------------------------------------------------------

def extract_cp_interior(Y, tol=1e-8, sing_tol=1e-10):
    """Rank-``I`` CP factors of an interior ``I x I x 2`` array.

    On a slicemix ``X`` with nonsingular ``X_1`` the matrix
    ``X_2 X_1^{-1} = A diag(lam) A^{-1}`` has distinct real eigenvalues; then
    ``X_1 = A B^T`` and ``X_2 = A diag(lam) B^T``. Columns of ``A`` and ``B``
    are scaled to unit norm with a positive largest entry, the scale goes
    into ``C``, and components are ordered by ``C[1] / C[0]``.

    Raises
    ------
    NotInterior
        If the array is not classified as an interior point.
    """
    from .classify import Region, classify_square, find_nonsingular_slicemix

    cls = classify_square(Y, tol=tol, sing_tol=sing_tol)
    if cls.label is not Region.INTERIOR:
        raise NotInterior(f"array is {cls.label.value} (case {cls.case})")
    U = find_nonsingular_slicemix(Y, sing_tol=sing_tol)
    X1, X2 = slicemix(Y, U).slices
    M = np.linalg.solve(X1.T, X2.T).T
    lam, V = np.linalg.eig(M)
    if np.max(np.abs(lam.imag), initial=0.0) > tol * max(1.0, np.max(np.abs(lam))):
        raise NotInterior("complex eigenvalues in the mixed pencil")
    A = V.real
    B = np.linalg.solve(A, X1).T
    C = np.linalg.solve(U, np.vstack([np.ones_like(lam.real), lam.real]))
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    A = A / na
    B = B / nb
    C = C * (na * nb)
    for M_ in (A, B):
        idx = np.argmax(np.abs(M_), axis=0)
        sgn = np.sign(M_[idx, np.arange(M_.shape[1])])
        M_ *= sgn
        C *= sgn
    with np.errstate(divide="ignore", invalid="ignore"):
        key = np.where(C[0] != 0.0, C[1] / C[0], np.inf)
    order = np.argsort(key, kind="stable")
    return CPFactors(A=A[:, order], B=B[:, order], C=C[:, order])
