"""Truncated t-deformed Fock space models of the t-gaussians and c-free convolution."""

from .fock import (DeformParams, DimensionError, FockVector, TruncationError, basis_dimension,
                   enumerate_basis, index_word, inner_product, word_index)
from .laurent import ExactOverflowError
from .operators import (NormEstimate, OrthogonalityError, SparseOperator, annihilation,
                        c_operator, creation, first_quantization, gaussian, gaussian_combination,
                        operator_norm_estimate, vacuum_moment)
from .scalar import Surd

__version__ = "0.1.0"
