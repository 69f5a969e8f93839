"""Dense order-d tensors, multi-index arithmetic, and matricizations.

Conventions used throughout the package:

* Multi-indices are 1-based tuples ``(a_1, ..., a_d)`` with ``1 <= a_i <= n_i``.
* Tensors are vectorized with the last index running fastest, so the flat
  position of ``(a_1, ..., a_d)`` is ``sum_i (a_i - 1) * stride_i`` with
  suffix-product strides.  Every module shares this single packing.
* A matricization packs its row (and column) indices lexicographically in the
  listed mode order, again with the last listed mode fastest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Dims",
    "DenseTensor",
    "Matricization",
    "meet_join",
    "matricize",
    "random_low_rank",
    "svd_nuclear",
    "frobenius",
    "tensor_to_json",
    "tensor_from_json",
    "read_tensor",
    "write_tensor",
]


@dataclass(frozen=True)
class Dims:
    """Shape ``(n_1, ..., n_d)`` of an order-d tensor, d >= 2."""

    sizes: tuple[int, ...]

    def __init__(self, sizes: Iterable[int]):
        sizes = tuple(int(n) for n in sizes)
        if len(sizes) < 2:
            raise ValueError(f"tensor order must be >= 2, got {len(sizes)}")
        if any(n < 1 for n in sizes):
            raise ValueError(f"all mode sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def order(self) -> int:
        return len(self.sizes)

    @property
    def size(self) -> int:
        """Total number of entries."""
        return prod(self.sizes)

    @property
    def strides(self) -> tuple[int, ...]:
        """Suffix products: position increment per mode, last mode fastest."""
        out = [1] * self.order
        for i in range(self.order - 2, -1, -1):
            out[i] = out[i + 1] * self.sizes[i + 1]
        return tuple(out)

    def flat_index(self, alpha: Sequence[int]) -> int:
        """0-based vectorization position of a 1-based multi-index."""
        self.validate_index(alpha)
        return sum((a - 1) * s for a, s in zip(alpha, self.strides))

    def multi_index(self, position: int) -> tuple[int, ...]:
        """Inverse of :meth:`flat_index`."""
        if not 0 <= position < self.size:
            raise ValueError(f"flat position {position} out of range for {self}")
        out = []
        for s in self.strides:
            out.append(position // s + 1)
            position %= s
        return tuple(out)

    def indices(self) -> Iterator[tuple[int, ...]]:
        """All multi-indices in vectorization order."""
        for p in range(self.size):
            yield self.multi_index(p)

    def validate_index(self, alpha: Sequence[int]) -> None:
        if len(alpha) != self.order:
            raise ValueError(f"index {tuple(alpha)} has wrong length for {self}")
        if any(not 1 <= a <= n for a, n in zip(alpha, self.sizes)):
            raise ValueError(f"index {tuple(alpha)} out of bounds for {self}")

    def __str__(self) -> str:
        return "x".join(str(n) for n in self.sizes)


def meet_join(a: Sequence[int], b: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Componentwise (min, max) of two equal-length multi-indices."""
    if len(a) != len(b):
        raise ValueError(f"multi-index length mismatch: {len(a)} vs {len(b)}")
    meet = tuple(min(x, y) for x, y in zip(a, b))
    join = tuple(max(x, y) for x, y in zip(a, b))
    return meet, join


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DenseTensor:
    """Immutable dense tensor: dims plus flat values in vectorization order."""

    dims: Dims
    values: np.ndarray = field(repr=False)

    def __init__(self, dims: Dims | Iterable[int], values: Sequence[float] | np.ndarray):
        if not isinstance(dims, Dims):
            dims = Dims(dims)
        vals = np.asarray(values, dtype=float).reshape(-1)
        if vals.size != dims.size:
            raise ValueError(
                f"value count {vals.size} does not match dims {dims} (expected {dims.size})"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def zeros(cls, dims: Dims | Iterable[int]) -> "DenseTensor":
        if not isinstance(dims, Dims):
            dims = Dims(dims)
        return cls(dims, np.zeros(dims.size))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "DenseTensor":
        return cls(Dims(arr.shape), np.asarray(arr, dtype=float).reshape(-1))

    def as_array(self) -> np.ndarray:
        """Multi-dimensional view; C order matches the shared vectorization."""
        return self.values.reshape(self.dims.sizes)

    def entry(self, alpha: Sequence[int]) -> float:
        return float(self.values[self.dims.flat_index(alpha)])

    def scale(self, c: float) -> "DenseTensor":
        return DenseTensor(self.dims, self.values * c)

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        if self.dims != other.dims:
            raise ValueError("dims mismatch")
        return DenseTensor(self.dims, self.values + other.values)

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        if self.dims != other.dims:
            raise ValueError("dims mismatch")
        return DenseTensor(self.dims, self.values - other.values)


@dataclass(frozen=True)
class Matricization:
    """Matrix reshaping of a tensor with listed row modes (1-based)."""

    row_modes: tuple[int, ...]
    col_modes: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)


def matricize(X: DenseTensor, row_modes: Sequence[int]) -> Matricization:
    """Reshape ``X`` into the matrix whose rows are indexed by ``row_modes``.

    Row (column) indices pack lexicographically in the listed mode order with
    the last listed mode fastest; the remaining modes, in ascending order,
    index the columns.  ``row_modes == [1..d]`` yields a single-column reshape.
    """
    d = X.dims.order
    rows = tuple(int(m) for m in row_modes)
    if not rows:
        raise ValueError("row mode set must be nonempty")
    if len(set(rows)) != len(rows):
        raise ValueError(f"duplicate modes in {rows}")
    if any(not 1 <= m <= d for m in rows):
        raise ValueError(f"modes {rows} out of range for order-{d} tensor")
    cols = tuple(m for m in range(1, d + 1) if m not in rows)
    perm = tuple(m - 1 for m in rows + cols)
    n_rows = prod(X.dims.sizes[m - 1] for m in rows)
    mat = X.as_array().transpose(perm).reshape(n_rows, -1)
    return Matricization(rows, cols, _readonly(mat))


def random_low_rank(dims: Dims | Iterable[int], r: int, seed: int) -> DenseTensor:
    """Sum of ``r`` random rank-one terms with i.i.d. standard normal factors.

    Deterministic for a fixed seed: factors are drawn mode by mode for each
    term from ``numpy.random.default_rng(seed)``.
    """
    if not isinstance(dims, Dims):
        dims = Dims(dims)
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    rng = np.random.default_rng(seed)
    total = np.zeros(dims.sizes)
    for _ in range(r):
        term = rng.standard_normal(dims.sizes[0])
        for n in dims.sizes[1:]:
            term = np.multiply.outer(term, rng.standard_normal(n))
        total += term
    return DenseTensor.from_array(total)


def svd_nuclear(M: np.ndarray) -> float:
    """Sum of singular values of a dense matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.svd(M, compute_uv=False).sum())


def frobenius(X: DenseTensor) -> float:
    """Euclidean norm of the tensor entries."""
    return float(np.linalg.norm(X.values))


def tensor_to_json(X: DenseTensor) -> str:
    return json.dumps({"dims": list(X.dims.sizes), "values": X.values.tolist()})


def tensor_from_json(text: str) -> DenseTensor:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "dims" not in doc or "values" not in doc:
        raise ValueError('tensor JSON must be {"dims": [...], "values": [...]}')
    return DenseTensor(Dims(doc["dims"]), doc["values"])


def read_tensor(path) -> DenseTensor:
    with open(path, "r", encoding="utf-8") as fh:
        return tensor_from_json(fh.read())


def write_tensor(path, X: DenseTensor) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(tensor_to_json(X))
        fh.write("\n")
