"""Reference computations used to check the library.

Each oracle takes a different route from the code under test: explicit loops
instead of einsum, polynomial roots instead of QZ, singular values instead of
determinant sampling, and brute-force grids instead of the Jacobi optimizer.
"""

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment


def multilinear_loops(Y, S, T, U):
    """``X[p, q, r] = sum_ijk S[p, i] T[q, j] U[r, k] Y[i, j, k]`` by explicit loops."""
    I, J, K = Y.shape
    P, Q, R = S.shape[0], T.shape[0], U.shape[0]
    X = np.zeros((P, Q, R))
    for p, q, r in itertools.product(range(P), range(Q), range(R)):
        acc = 0.0
        for i, j, k in itertools.product(range(I), range(J), range(K)):
            acc += S[p, i] * T[q, j] * U[r, k] * Y[i, j, k]
        X[p, q, r] = acc
    return X


def cp_loops(A, B, C):
    I, J, K, R = A.shape[0], B.shape[0], C.shape[0], A.shape[1]
    Y = np.zeros((I, J, K))
    for i, j, k in itertools.product(range(I), range(J), range(K)):
        Y[i, j, k] = sum(A[i, r] * B[j, r] * C[k, r] for r in range(R))
    return Y


def sum_of_squares_distance(Y, Z):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(np.ravel(Y), np.ravel(Z))))


def det_poly_eigenvalues(A, B):
    """Roots of ``p(lam) = det(A - lam B)`` from samples on the unit circle.

    ``p`` has degree at most ``n``. Its coefficients are recovered exactly
    from ``n + 1`` roots-of-unity samples by a discrete Fourier transform;
    every degree lost at the top of ``p`` is an infinite eigenvalue.
    Returns a list of complex numbers with ``inf`` for infinite ones.
    """
    n = A.shape[0]
    N = n + 1
    w = np.exp(2j * np.pi * np.arange(N) / N)
    samples = np.array([np.linalg.det(A - lam * B) for lam in w])
    # fft uses exp(-2 pi i k m / N), so fft(samples)[m] / N is the lam**m coefficient
    c = np.fft.fft(samples) / N
    big = np.max(np.abs(c))
    deg = n
    while deg > 0 and abs(c[deg]) <= 1e-13 * big:
        deg -= 1
    roots = list(np.roots(c[:deg + 1][::-1])) if deg > 0 else []
    return roots + [complex(math.inf)] * (n - deg)


def match_multisets(a, b):
    """Largest relative mismatch after optimally pairing two eigenvalue lists.

    Infinite values pair only with infinite values; finite pairs are
    compared relative to ``max(1, |x|)``.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if len(a) != len(b):
        return math.inf
    ia = [x for x in a if math.isinf(x.real)]
    ib = [x for x in b if math.isinf(x.real)]
    if len(ia) != len(ib):
        return math.inf
    fa = [x for x in a if not math.isinf(x.real)]
    fb = [x for x in b if not math.isinf(x.real)]
    if not fa:
        return 0.0
    cost = np.array([[abs(x - y) / max(1.0, abs(x)) for y in fb] for x in fa])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def pencil_rank_deficient(A, B, trials=6, rtol=1e-9, seed=12345):
    """True when ``mu A + lam B`` is numerically rank deficient at random points."""
    rng = np.random.default_rng(seed)
    scale = np.linalg.norm(A, 2) + np.linalg.norm(B, 2)
    if scale == 0:
        return True
    for _ in range(trials):
        mu, lam = rng.standard_normal(2)
        s = np.linalg.svd(mu * A + lam * B, compute_uv=False)
        if s[-1] > rtol * scale * math.hypot(mu, lam):
            return False
    return True


def grid_min_gsd_residual_2x2(Y1, Y2, steps=1441):
    """Brute-force ``min ||Y - P||`` over size-2 GSDs of a ``2 x 2 x 2`` array.

    For fixed orthogonal ``Qa``, ``Qb`` the optimal triangular factors keep
    the upper triangles, so the residual is the norm of the two (2, 1)
    entries ``a.T Y_k b`` with ``a`` the second column of ``Qa`` and ``b``
    the first column of ``Qb``. Both are unit vectors, so a grid over two
    angles covers every choice; the grid is refined once around its minimizer.
    """
    def table(ta, tb):
        a = np.stack([-np.sin(ta), np.cos(ta)], axis=1)
        b = np.stack([np.cos(tb), np.sin(tb)], axis=1)
        return np.sqrt((a @ Y1 @ b.T) ** 2 + (a @ Y2 @ b.T) ** 2)

    t = np.linspace(0.0, 2 * math.pi, steps, endpoint=False)
    vals = table(t, t)
    ia, ib = np.unravel_index(np.argmin(vals), vals.shape)
    h = 2 * math.pi / steps
    fine = np.linspace(-h, h, 201)
    return float(min(vals.min(), table(t[ia] + fine, t[ib] + fine).min()))


def real_eigs_distinct(vals, tol):
    """Independent a1/a2/a3 decision from a list of eigenvalues."""
    vals = [complex(v) for v in vals]
    scale = max(abs(v) for v in vals) or 1.0
    if any(abs(v.imag) >= tol * scale for v in vals):
        return "a3"
    r = sorted(v.real for v in vals)
    if len(r) < 2 or min(b - a for a, b in zip(r, r[1:])) >= tol * scale:
        return "a1"
    return "a2"


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))
