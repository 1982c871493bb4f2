"""Exception types raised by gsdrank."""


class GSDRankError(Exception):
    """Base class for all library errors."""


class DimensionError(GSDRankError, ValueError):
    """Operand shapes do not agree."""


class QZConvergenceError(GSDRankError):
    """The QZ iteration exhausted its iteration budget."""


class IdenticallySingularPencil(GSDRankError):
    """det(mu*A + lambda*B) vanishes for all (mu, lambda)."""


class NotSingularPencil(GSDRankError):
    """A singular pencil was required but the pencil is regular."""


class SwapNotPossible(GSDRankError):
    """Adjacent diagonal blocks cannot be exchanged stably."""


class NumericalBreakdown(GSDRankError):
    """A construction step failed to find the structure it relies on."""


class NotInterior(GSDRankError):
    """The array is not an interior point of the rank-I set."""


class TensorFileError(GSDRankError):
    """A tensor document is malformed."""


class ExteriorPoint(GSDRankError):
    """The pencil has a complex eigenvalue pair, so no real GSD of full size exists."""
