"""Theta-norm relaxations of the tensor nuclear norm.

The package computes theta_k norms of dense real tensors via moment-matrix
semidefinite programs, certifies the determinantal Groebner bases the
construction rests on, and runs seeded low-rank recovery experiments with
Gaussian measurement maps.
"""

from .tensors import (
    DenseTensor,
    Dims,
    Matricization,
    frobenius,
    matricize,
    meet_join,
    random_low_rank,
    read_tensor,
    svd_nuclear,
    tensor_from_json,
    tensor_to_json,
    write_tensor,
)

__version__ = "0.1.0"
