"""Generalized Schur decompositions and the rank-R set of real I x J x 2 arrays."""

__version__ = "0.1.0"

from .errors import (DimensionError, ExteriorPoint, GSDRankError, IdenticallySingularPencil,
                     NotInterior, NotSingularPencil, NumericalBreakdown, QZConvergenceError,
                     SwapNotPossible, TensorFileError)
from .tensor import (CPFactors, Tensor3, cp_reconstruct, frobenius_distance, frontal_slice,
                     multilinear_multiply, slicemix)
from .pencil import (GeneralizedEigenvalue, PencilQZ, generalized_eigenvalues,
                     is_singular_pencil, real_qz, singularity_score, solve_sylvester_2x1,
                     swap_adjacent_blocks)
from .gsd import (GSD, FitReport, best_gsd_fit, closure_membership, embed_core,
                  extract_cp_interior, full_gsd, full_gsd_singular_pencil, gsd_reconstruct)
from .classify import (PerturbationPlan, RankRegionClass, Region, boundary_perturbation,
                       classify_general, classify_square, find_nonsingular_slicemix)
from .fileio import emit_tensor, parse_tensor, parse_tensor_file, write_tensor_file
from .generate import KINDS, generate_instance
