"""Interior / boundary / exterior classification of ``I x I x 2`` arrays.

An array with a nonsingular slicemix ``X`` (``X_1`` invertible) is classified
by the generalized eigenvalues of ``(X_2, X_1)``: distinct real eigenvalues
give an interior point of the rank-``I`` set, real eigenvalues with a repeat
give a boundary point, and a complex pair gives an exterior point. Arrays
whose pencil is identically singular are boundary points.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .gsd import best_gsd_fit
from .pencil import GeneralizedEigenvalue, real_qz, singularity_score
from .tensor import Tensor3, as_matrix, slicemix

__all__ = [
    "Region",
    "RankRegionClass",
    "PerturbationPlan",
    "GeneralClass",
    "find_nonsingular_slicemix",
    "classify_square",
    "boundary_perturbation",
    "classify_general",
]


class Region(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    EXTERIOR = "Exterior"
    IN_CLOSURE = "InClosure"


_CASE_LABEL = {"a1": Region.INTERIOR, "a2": Region.BOUNDARY,
               "a3": Region.EXTERIOR, "b": Region.BOUNDARY}


@dataclass(frozen=True)
class RankRegionClass:
    """Classification of a square array.

    ``margin`` is the smallest relative eigenvalue gap for cases a1/a2, the
    smallest relative imaginary part for a3, and the singularity score for b.
    ``mix`` is the slicemix used (None in case b).
    """

    label: Region
    case: str
    eigenvalues: tuple = ()
    margin: float = 0.0
    mix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if _CASE_LABEL[self.case] is not self.label:
            raise ValueError(f"case {self.case} is inconsistent with label {self.label}")


@dataclass(frozen=True)
class PerturbationPlan:
    """Parameters of a boundary-approaching perturbation of a triangular pair.

    ``positions`` holds the first common zero ``i`` and its partner ``j``;
    ``common`` counts the common zeros that were lifted.
    """

    positions: tuple
    delta1: float
    delta2: float
    eta: float
    case: str
    norm: float
    eps: float
    common: int = 1

    @property
    def sing_tol(self):
        """Singularity threshold suited to reclassifying the perturbed pair.

        The perturbed pencil lies within ``eps`` of a singular one and its
        normalized determinant scales like ``eps ** common``, so the
        threshold has to sit well below that.
        """
        return min(1e-10, 1e-6 * self.eps ** self.common)


@dataclass(frozen=True)
class GeneralClass:
    """Closure membership of an ``I x J x 2`` array for a given ``R``."""

    label: Region
    residual: float
    relative_residual: float
    square: RankRegionClass | None = None


def _smallest_sv(Y1, Y2, theta):
    M = math.cos(theta) * Y1 + math.sin(theta) * Y2
    return np.linalg.svd(M, compute_uv=False)[-1]


def _mix_matrix(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def find_nonsingular_slicemix(Y, sing_tol=1e-10, grid=64, refinements=2):
    """Rotation ``U`` whose mixed first slice ``cos t Y_1 + sin t Y_2`` is best conditioned.

    The angle maximizes the smallest singular value over ``grid`` angles in
    ``[0, pi)`` followed by ``refinements`` local passes. Returns None when
    the pencil is identically singular, in which case no slicemix helps.
    """
    Y.require_square()
    Y1, Y2 = Y.slices
    if singularity_score(Y1, Y2) <= sing_tol:
        return None
    thetas = np.arange(grid) * math.pi / grid
    vals = [_smallest_sv(Y1, Y2, t) for t in thetas]
    k = int(np.argmax(vals))
    best_t, best_v = thetas[k], vals[k]
    h = math.pi / grid
    for _ in range(refinements):
        for t in best_t + np.linspace(-h, h, 17):
            v = _smallest_sv(Y1, Y2, t)
            if v > best_v:
                best_t, best_v = t, v
        h /= 8.0
    return _mix_matrix(float(best_t % math.pi))


def _finite_values(eigs):
    vals = []
    for e in eigs:
        if e.beta == 0.0:
            vals.append(complex(math.inf, 0.0))
        else:
            vals.append(complex(e.alpha) / e.beta)
    return vals


def classify_square(Y, tol=1e-8, sing_tol=1e-10):
    """Classify an ``I x I x 2`` array as an interior, boundary or exterior point.

    Parameters
    ----------
    Y : Tensor3
    tol : float
        Relative threshold for eigenvalue distinctness and for calling an
        imaginary part nonzero; both are measured against the largest
        eigenvalue modulus.
    sing_tol : float
        Threshold for the identically-singular test.

    Returns
    -------
    RankRegionClass
    """
    Y.require_square()
    U = find_nonsingular_slicemix(Y, sing_tol)
    if U is None:
        return RankRegionClass(Region.BOUNDARY, "b", (), singularity_score(*Y.slices))
    X1, X2 = slicemix(Y, U).slices
    eigs = tuple(real_qz(X2, X1).eigenvalues())
    vals = _finite_values(eigs)
    finite = [abs(v) for v in vals if math.isfinite(v.real)]
    scale = max(finite) if finite and max(finite) > 0 else 1.0

    imag = [abs(v.imag) / scale for v in vals if v.imag != 0.0 and math.isfinite(v.real)]
    big_imag = [m for m in imag if m >= tol]
    if big_imag:
        return RankRegionClass(Region.EXTERIOR, "a3", eigs, min(big_imag), U)

    reals = sorted(v.real for v in vals)
    if len(reals) < 2:
        return RankRegionClass(Region.INTERIOR, "a1", eigs, math.inf, U)
    gaps = []
    for a, b in zip(reals, reals[1:]):
        if math.isinf(a) or math.isinf(b):
            gaps.append(0.0 if a == b else math.inf)
        else:
            gaps.append((b - a) / scale)
    gap = min(gaps)
    if gap >= tol:
        return RankRegionClass(Region.INTERIOR, "a1", eigs, gap, U)
    return RankRegionClass(Region.BOUNDARY, "a2", eigs, gap, U)


# --------------------------------------------------------------------------

def boundary_perturbation(R1, R2, eps, zero_tol=1e-12, delta=None):
    """Perturb the diagonals of a singular triangular pair onto a repeated eigenvalue.

    Given upper triangular ``R1``, ``R2`` with a common zero on their
    diagonals at position ``i``, returns ``H1`` (nonsingular) and ``H2`` with
    ``||(R1, R2) - (H1, H2)|| < eps`` such that ``H2 H1^{-1}`` has only real
    eigenvalues and a repeated one. The repeat is formed with a partner
    position ``j``:

    * ``common-nonzero``: both diagonals nonzero at ``j``; put
      ``(delta1, lam * delta1)`` at ``i`` with ``lam = R2[j, j] / R1[j, j]``.
    * ``r1-nonzero``: only ``R1[j, j]`` nonzero; ``H2[j, j] = eta = sqrt(delta2)``
      and ``H1[i, i] = sqrt(delta2) * R1[j, j]``.
    * ``r2-nonzero``: only ``R2[j, j]`` nonzero; ``H1[j, j] = eta = sqrt(delta1)``
      and ``H2[i, i] = sqrt(delta1) * R2[j, j]``.
    * ``common-zero-pair``: every diagonal position is a common zero; all get
      ``(delta, delta)``.

    Further common zeros receive the same pair as ``i``; remaining zeros of
    ``R1`` get a small positive value so that ``H1`` is nonsingular.

    By default the free parameter (``delta1`` in the common-nonzero and
    r2-nonzero cases, ``delta2`` otherwise) is sized from ``eps``. Passing
    ``delta`` fixes it instead; ValueError is raised if the result would
    exceed ``eps``.

    Returns
    -------
    H1, H2 : ndarray
    plan : PerturbationPlan
    """
    R1 = as_matrix(R1, "R1")
    R2 = as_matrix(R2, "R2")
    n = R1.shape[0]
    if R1.shape != (n, n) or R2.shape != (n, n):
        raise DimensionError("R1 and R2 must be square of equal size")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if delta is not None and not delta > 0:
        raise ValueError("delta must be positive")
    scale = np.linalg.norm(R1) + np.linalg.norm(R2)
    lower_tol = zero_tol * max(scale, 1.0)
    if np.abs(np.tril(R1, -1)).max(initial=0.0) > lower_tol or \
            np.abs(np.tril(R2, -1)).max(initial=0.0) > lower_tol:
        raise ValueError("R1 and R2 must be upper triangular")
    d1, d2 = np.diag(R1).copy(), np.diag(R2).copy()
    z1 = np.abs(d1) <= zero_tol * scale
    z2 = np.abs(d2) <= zero_tol * scale
    common = [k for k in range(n) if z1[k] and z2[k]]
    if not common:
        raise ValueError("pencil is not identically singular: no common zero on the diagonals")
    both = [k for k in range(n) if not z1[k] and not z2[k]]
    only_r1 = [k for k in range(n) if not z1[k] and z2[k]]     # R1 nonzero, R2 zero
    only_r2 = [k for k in range(n) if z1[k] and not z2[k]]     # R1 zero, R2 nonzero
    i = common[0]
    m = len(common)
    budget2 = (0.5 * eps) ** 2     # squared norm left for the repeat itself
    h1 = {}
    h2 = {}
    eta = 0.0
    fillers = list(only_r2)

    if both:
        j = both[0]
        case = "common-nonzero"
        lam = d2[j] / d1[j]
        delta1 = math.sqrt(budget2 / (m * (1.0 + lam * lam))) if delta is None else delta
        delta2 = lam * delta1
    elif only_r1:
        j = only_r1[0]
        case = "r1-nonzero"
        # ||pert||^2 = delta2 (1 + m R1jj^2) + m delta2^2
        delta2 = min(budget2 / (1.0 + m + m * d1[j] ** 2), 1.0) if delta is None else delta
        eta = math.sqrt(delta2)
        delta1 = eta * d1[j]
        h2[j] = eta
    elif only_r2:
        j = only_r2[0]
        case = "r2-nonzero"
        delta1 = min(budget2 / (1.0 + m + m * d2[j] ** 2), 1.0) if delta is None else delta
        eta = math.sqrt(delta1)
        delta2 = eta * d2[j]
        h1[j] = eta
        fillers.remove(j)
    else:
        if n < 2:
            raise ValueError("a 1x1 zero pair has no repeated-eigenvalue perturbation")
        j = common[1]
        case = "common-zero-pair"
        delta1 = delta2 = math.sqrt(budget2 / (2.0 * m)) if delta is None else delta
    for k in common:
        h1[k] = delta1
        h2[k] = delta2
    if fillers:
        repeated = delta2 / delta1
        tiny = 0.5 * eps / math.sqrt(len(fillers))
        for k in fillers:
            val = tiny
            # keep the filler eigenvalue away from the repeated one
            if abs(d2[k] / val - repeated) <= 1e-6 * max(abs(repeated), 1.0):
                val *= 0.5
            h1[k] = val

    H1, H2 = R1.copy(), R2.copy()
    for k, v in h1.items():
        H1[k, k] = v
    for k, v in h2.items():
        H2[k, k] = v
    norm = float(math.sqrt(np.sum((H1 - R1) ** 2) + np.sum((H2 - R2) ** 2)))
    if norm > eps:
        raise ValueError(f"perturbation norm {norm:.3g} exceeds eps = {eps:.3g}")
    plan = PerturbationPlan(positions=(i, j), delta1=float(delta1), delta2=float(delta2),
                            eta=float(eta), case=case, norm=norm, eps=float(eps),
                            common=m)
    return H1, H2, plan


# --------------------------------------------------------------------------

def classify_general(Y, R, tol=1e-6, class_tol=1e-8, sing_tol=1e-10, **fit_opts):
    """Closure membership for ``I x J x 2`` arrays, refined when ``I = J = R``.

    Membership is decided by the best-fitting GSD of size ``R``: the array is
    in the closure of the rank-``R`` set iff the fit residual is at most
    ``tol * ||Y||``. For ``I = J = R`` the square classification is attached.
    """
    Y.require_k2()
    I, J, _ = Y.shape
    if not (isinstance(R, (int, np.integer)) and 1 <= R <= min(I, J)):
        raise ValueError(f"R must be an integer in 1..min(I, J) = {min(I, J)}, got {R}")
    _, report = best_gsd_fit(Y, R, sing_tol=sing_tol, **fit_opts)
    nrm = Y.norm()
    rel = report.residual / nrm if nrm > 0 else 0.0
    label = Region.IN_CLOSURE if report.residual <= tol * nrm else Region.EXTERIOR
    square = classify_square(Y, class_tol, sing_tol) if I == J == R else None
    return GeneralClass(label=label, residual=report.residual, relative_residual=rel,
                        square=square)


def eigenvalue_repr(e: GeneralizedEigenvalue):
    """JSON-friendly representation of a generalized eigenvalue."""
    a = complex(e.alpha)
    out = {"alpha_re": a.real, "alpha_im": a.imag, "beta": e.beta}
    if e.beta != 0.0:
        v = a / e.beta
        out["re"], out["im"] = v.real, v.imag
    else:
        out["re"], out["im"] = None, None
    return out


def as_square_tensor(R1, R2):
    return Tensor3.from_slices(R1, R2)
