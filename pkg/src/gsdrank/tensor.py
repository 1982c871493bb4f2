"""Dense real three-way arrays and the multilinear operations on them.

Entries are stored as a C-ordered ``float64`` array of shape ``(I, J, K)``;
entry ``(i, j, k)`` lives at ``data[i, j, k]`` so the frontal slice ``Y_k`` is
the view ``data[:, :, k - 1]``. Slice numbering follows the usual
mathematical convention and starts at 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "Tensor3",
    "CPFactors",
    "as_matrix",
    "multilinear_multiply",
    "slicemix",
    "frobenius_distance",
    "cp_reconstruct",
    "frontal_slice",
]


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-D float64 array."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


class Tensor3:
    """Immutable dense real ``I x J x K`` array.

    Parameters
    ----------
    data : array_like, shape (I, J, K)
        Entries indexed as ``data[i, j, k]``. Every dimension must be
        positive and every entry finite.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 3:
            raise DimensionError(f"expected a 3-way array, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise DimensionError(f"zero-sized dimension in {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def from_slices(cls, *slices):
        """Stack frontal slices ``Y_1, ..., Y_K`` into a tensor."""
        mats = [as_matrix(S, f"slice {k + 1}") for k, S in enumerate(slices)]
        if not mats:
            raise DimensionError("at least one slice is required")
        shape = mats[0].shape
        for k, S in enumerate(mats):
            if S.shape != shape:
                raise DimensionError(
                    f"slice {k + 1} has shape {S.shape}, expected {shape}")
        return cls(np.stack(mats, axis=2))

    @classmethod
    def zeros(cls, I, J, K=2):
        return cls(np.zeros((I, J, K)))

    @property
    def data(self):
        """Read-only view of the entries, shape ``(I, J, K)``."""
        return self._data

    @property
    def shape(self):
        return self._data.shape

    @property
    def dims(self):
        return self._data.shape

    @property
    def slices(self):
        """Tuple of read-only frontal slice views ``(Y_1, ..., Y_K)``."""
        return tuple(self._data[:, :, k] for k in range(self._data.shape[2]))

    def frontal_slice(self, k):
        return frontal_slice(self, k)

    def norm(self):
        return float(np.linalg.norm(self._data.ravel()))

    def require_k2(self):
        if self._data.shape[2] != 2:
            raise DimensionError(
                f"operation needs K = 2, tensor has K = {self._data.shape[2]}")
        return self

    def require_square(self):
        self.require_k2()
        I, J, _ = self._data.shape
        if I != J:
            raise DimensionError(f"operation needs square slices, got {I} x {J}")
        return self

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data.copy() if copy else self._data
        return self._data.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self.shape, self._data.tobytes()))

    def __repr__(self):
        I, J, K = self.shape
        return f"Tensor3({I}x{J}x{K}, norm={self.norm():.6g})"


@dataclass(frozen=True)
class CPFactors:
    """Factor matrices of a sum of rank-one terms ``sum_r a_r o b_r o c_r``.

    ``A`` is ``I x R``, ``B`` is ``J x R`` and ``C`` is ``K x R``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        if not (A.shape[1] == B.shape[1] == C.shape[1]):
            raise DimensionError(
                f"factor column counts differ: {A.shape[1]}, {B.shape[1]}, {C.shape[1]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def rank(self):
        return self.A.shape[1]


def frontal_slice(Y, k):
    """Return the ``I x J`` frontal slice ``Y_k`` (``k`` starts at 1)."""
    K = Y.shape[2]
    if not 1 <= k <= K:
        raise IndexError(f"slice index {k} out of range 1..{K}")
    return Y.data[:, :, k - 1]


def multilinear_multiply(Y, S, T, U):
    """Compute ``(S, T, U) . Y``.

    The result has entries
    ``X[p, q, r] = sum_ijk S[p, i] T[q, j] U[r, k] Y[i, j, k]``.
    """
    S = as_matrix(S, "S")
    T = as_matrix(T, "T")
    U = as_matrix(U, "U")
    I, J, K = Y.shape
    if S.shape[1] != I or T.shape[1] != J or U.shape[1] != K:
        raise DimensionError(
            f"cannot multiply {I}x{J}x{K} array by S{S.shape}, T{T.shape}, U{U.shape}")
    X = np.einsum("pi,qj,rk,ijk->pqr", S, T, U, Y.data, optimize=True)
    return Tensor3(X)


def slicemix(Y, U):
    """Mix the frontal slices: ``(I_I, I_J, U) . Y``."""
    U = as_matrix(U, "U")
    K = Y.shape[2]
    if U.shape != (K, K):
        raise DimensionError(f"slicemix needs a {K}x{K} matrix, got {U.shape}")
    return Tensor3(np.einsum("rk,ijk->ijr", U, Y.data))


def frobenius_distance(Y, Z):
    """Frobenius norm of ``Y - Z``."""
    if Y.shape != Z.shape:
        raise DimensionError(f"shape mismatch: {Y.shape} vs {Z.shape}")
    return float(np.linalg.norm((Y.data - Z.data).ravel()))


def cp_reconstruct(F):
    """Assemble ``sum_r A[:, r] o B[:, r] o C[:, r]``."""
    return Tensor3(np.einsum("ir,jr,kr->ijk", F.A, F.B, F.C))
