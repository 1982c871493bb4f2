"""Seeded test instances for each classification outcome.

Every generator checks that its output has the advertised property before
returning it, so a returned instance can be trusted as a labeled example.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, GSDRankError
from .gsd import GSD, best_gsd_fit, gsd_reconstruct
from .pencil import is_singular_pencil
from .tensor import CPFactors, Tensor3, cp_reconstruct

__all__ = ["KINDS", "GenerationError", "generate_instance", "random_orthogonal",
           "random_orthonormal_columns"]

KINDS = ("interior", "boundary-a2", "exterior", "singular-pencil", "gsd-random", "cp-random")

SQUARE_KINDS = frozenset({"interior", "boundary-a2", "exterior", "singular-pencil"})


class GenerationError(GSDRankError, ValueError):
    """The requested instance is infeasible or failed its self-check."""


def random_orthogonal(rng, n):
    Q, Rm = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(Rm))


def random_orthonormal_columns(rng, m, r):
    return random_orthogonal(rng, m)[:, :r]


def _well_conditioned(rng, n, cond=20.0):
    """Random ``n x n`` matrix with singular values in ``[1, cond]``."""
    s = np.exp(rng.uniform(0.0, np.log(cond), n))
    return random_orthogonal(rng, n) @ np.diag(s) @ random_orthogonal(rng, n).T


def _spread_values(rng, n, min_gap=0.25):
    """``n`` sorted reals in ``[-2, 2]`` with pairwise gaps at least ``min_gap``."""
    while True:
        v = np.sort(rng.uniform(-2.0, 2.0, n))
        if n < 2 or np.min(np.diff(v)) >= min_gap:
            return v


def _cp_square(rng, n, ratios):
    A = _well_conditioned(rng, n)
    B = _well_conditioned(rng, n)
    C = np.vstack([np.ones(n), ratios])
    return cp_reconstruct(CPFactors(A, B, C))


def _interior(rng, n):
    return _cp_square(rng, n, _spread_values(rng, n))


def _boundary_a2(rng, n):
    if n < 2:
        raise GenerationError("boundary-a2 needs I = J >= 2")
    lam = _spread_values(rng, n - 1)
    ratios = np.concatenate([lam, lam[:1]])
    return _cp_square(rng, n, ratios)


def _exterior(rng, n):
    if n < 2:
        raise GenerationError("exterior needs I = J >= 2")
    # rotation-like block with eigenvalues a +- ib, real rest, orthogonal frame
    a, b = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.0)
    D1 = np.eye(n)
    D2 = np.diag(np.concatenate([[a, a], _spread_values(rng, n - 2)])) if n > 2 \
        else np.diag([a, a])
    D2[0, 1], D2[1, 0] = -b, b
    Q, Z = random_orthogonal(rng, n), random_orthogonal(rng, n)
    return Tensor3.from_slices(Q @ D1 @ Z.T, Q @ D2 @ Z.T)


def _singular_pencil(rng, n):
    """Quasi-triangular pair with one common zero diagonal, in a random frame."""
    R1 = np.triu(rng.standard_normal((n, n)))
    R2 = np.triu(rng.standard_normal((n, n)))
    if n >= 3 and rng.random() < 0.5:
        # one 2x2 block with complex eigenvalues away from the zero
        s = int(rng.integers(0, n - 1))
        R1[s:s + 2, s:s + 2] = np.eye(2)
        b = rng.uniform(0.5, 1.5)
        R2[s:s + 2, s:s + 2] = [[rng.uniform(-1, 1), -b], [b, rng.uniform(-1, 1)]]
        blocked = {s, s + 1}
    else:
        blocked = set()
    free = [k for k in range(n) if k not in blocked]
    z = free[int(rng.integers(0, len(free)))]
    R1[z, z] = R2[z, z] = 0.0
    Q, Z = random_orthogonal(rng, n), random_orthogonal(rng, n)
    return Tensor3.from_slices(Q @ R1 @ Z.T, Q @ R2 @ Z.T)


def _gsd_random(rng, I, J, R):
    D = GSD(Qa=random_orthonormal_columns(rng, I, R), Qb=random_orthonormal_columns(rng, J, R),
            R1=np.triu(rng.standard_normal((R, R))), R2=np.triu(rng.standard_normal((R, R))))
    return gsd_reconstruct(D)


def _cp_random(rng, I, J, R):
    F = CPFactors(rng.standard_normal((I, R)), rng.standard_normal((J, R)),
                  rng.standard_normal((2, R)))
    return cp_reconstruct(F)


def _self_check(kind, Y, R, tol, sing_tol):
    from .classify import classify_square

    if kind in ("interior", "boundary-a2", "exterior"):
        want = {"interior": "a1", "boundary-a2": "a2", "exterior": "a3"}[kind]
        got = classify_square(Y, tol=tol, sing_tol=sing_tol).case
        return got == want, f"classified as case {got}, wanted {want}"
    if kind == "singular-pencil":
        return is_singular_pencil(*Y.slices, tol=sing_tol), "pencil is not singular"
    # membership kinds: the structured start alone must fit the array
    _, rep = best_gsd_fit(Y, R, restarts=0, max_sweeps=50, sing_tol=sing_tol)
    ok = rep.residual <= 1e-8 * max(Y.norm(), 1.0)
    return ok, f"fit residual {rep.residual:.3g} too large for a rank-{R} instance"


def generate_instance(kind, dims, R=None, seed=0, tol=1e-8, sing_tol=1e-10, attempts=20):
    """Seeded instance of the requested ``kind``.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    dims : tuple
        ``(I, J)`` or ``(I, J, 2)``.
    R : int, optional
        Rank parameter; defaults to ``min(I, J)``. The square kinds need
        ``I = J = R``.
    seed : int

    Returns
    -------
    Tensor3
    """
    if kind not in KINDS:
        raise GenerationError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    dims = tuple(int(d) for d in dims)
    if len(dims) == 3:
        if dims[2] != 2:
            raise DimensionError(f"K must equal 2, got {dims[2]}")
        dims = dims[:2]
    if len(dims) != 2 or min(dims) < 1:
        raise DimensionError(f"dims must be (I, J) with positive entries, got {dims}")
    I, J = dims
    R = min(I, J) if R is None else int(R)
    if not 1 <= R <= min(I, J):
        raise GenerationError(f"R must lie in 1..{min(I, J)}, got {R}")
    if kind in SQUARE_KINDS and not I == J == R:
        raise GenerationError(f"kind {kind} needs I = J = R, got I={I}, J={J}, R={R}")

    for attempt in range(attempts):
        rng = np.random.default_rng([seed, attempt])
        if kind == "interior":
            Y = _interior(rng, I)
        elif kind == "boundary-a2":
            Y = _boundary_a2(rng, I)
        elif kind == "exterior":
            Y = _exterior(rng, I)
        elif kind == "singular-pencil":
            Y = _singular_pencil(rng, I)
        elif kind == "gsd-random":
            Y = _gsd_random(rng, I, J, R)
        else:
            Y = _cp_random(rng, I, J, R)
        ok, why = _self_check(kind, Y, R, tol, sing_tol)
        if ok:
            return Y
    raise GenerationError(f"{kind} instance failed its self-check: {why}")
