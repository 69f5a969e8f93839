"""Determinantal ideals of tensor matricizations and their moment structures.

The rank-one, unit-Frobenius-norm tensors form the common zero set of the
order-two minors of the tensor's matricizations together with the sphere
polynomial ``sum x_a^2 - 1``.  This module builds those generator sets for the
supported formats, certifies the full set as a reduced Groebner basis,
enumerates standard monomials (theta bases), and assembles the combinatorial
moment matrices that feed the semidefinite programs.

Formats:

* ``FULL``  - the canonical minor per incomparable index pair, enumerated by
  differing-mode subsets with a fixed tie-break, plus the sphere polynomial.
  This set is the reduced Groebner basis of the ideal.
* ``HOSVD`` - all order-two minors of the single-mode unfoldings.
* ``TT``    - all order-two minors of the prefix matricizations {1}, {1,2}, ...
* ``CUSTOM``- minors of an explicit matricization list.

TT and HOSVD generate the same ideal as FULL; the quotient-ring machinery
(standard monomials, normal forms, moment matrices) therefore always works
with the certified FULL basis, after certifying the ideal equality for the
requested format.  CUSTOM matricization lists may generate a strictly smaller
ideal, so moment structures are not offered for them.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .polynomials import (
    BuchbergerReport,
    GroebnerBasis,
    Monomial,
    Polynomial,
    VariableOrder,
    buchberger_check,
    is_reduced,
    normal_form,
)
from .tensors import DenseTensor, Dims, meet_join

__all__ = [
    "TensorFormat",
    "IdealSpec",
    "GeneratorSet",
    "ThetaBasis",
    "MomentStructure",
    "generators",
    "standard_monomials",
    "moment_structure",
    "moment_structure_order3_fast",
    "variety_residual",
    "decompose_minor",
    "full_groebner_basis",
    "FormatEqualityReport",
    "CertificationReport",
    "certify",
    "clear_caches",
]


class TensorFormat(Enum):
    FULL = "full"
    HOSVD = "hosvd"
    TT = "tt"
    CUSTOM = "custom"


@dataclass(frozen=True)
class IdealSpec:
    """Which determinantal ideal: tensor shape plus matricization family."""

    dims: Dims
    format: TensorFormat = TensorFormat.FULL
    custom_matricizations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        d = self.dims.order
        if self.format is TensorFormat.CUSTOM:
            if not self.custom_matricizations:
                raise ValueError("CUSTOM format requires an explicit matricization list")
            for tau in self.custom_matricizations:
                self._check_matricization(tau, d)
        elif self.custom_matricizations:
            raise ValueError("custom matricizations only allowed with CUSTOM format")

    @staticmethod
    def _check_matricization(tau: Sequence[int], d: int) -> None:
        if not tau or len(set(tau)) != len(tau):
            raise ValueError(f"matricization {tau} must be a nonempty set of modes")
        if any(not 1 <= m <= d for m in tau):
            raise ValueError(f"matricization {tau} out of range for order {d}")
        if len(tau) >= d:
            raise ValueError(f"matricization {tau} must be a proper subset of the modes")

    def matricizations(self) -> tuple[tuple[int, ...], ...]:
        """Row-mode sets whose minors generate the ideal (non-FULL formats)."""
        d = self.dims.order
        if self.format is TensorFormat.HOSVD:
            return tuple((m,) for m in range(1, d + 1))
        if self.format is TensorFormat.TT:
            return tuple(tuple(range(1, j + 1)) for j in range(1, d))
        if self.format is TensorFormat.CUSTOM:
            return tuple(tuple(sorted(t)) for t in self.custom_matricizations)
        raise ValueError("FULL format is not defined by a matricization list")

    @property
    def order(self) -> VariableOrder:
        return VariableOrder(self.dims)


@dataclass(frozen=True)
class GeneratorSet:
    """Minors plus the sphere polynomial; every element monic and distinct."""

    spec: IdealSpec
    minors: tuple[Polynomial, ...]
    frobenius_poly: Polynomial

    def __post_init__(self):
        seen = set()
        for f in self.minors:
            if len(f.terms) != 2:
                raise ValueError("minor is not a two-term polynomial")
            (lm, lc), (tm, tc) = f.terms
            if lc != 1 or tc != -1:
                raise ValueError("minor is not in canonical +1/-1 orientation")
            if lm.degree != 2 or tm.degree != 2:
                raise ValueError("minor terms must have degree two")
            if f in seen:
                raise ValueError("duplicate minor in generator set")
            seen.add(f)

    def all_polys(self) -> tuple[Polynomial, ...]:
        """All generators, sorted by descending leading monomial.

        The sphere polynomial leads: its leading monomial is the square of the
        greatest variable, the largest degree-two monomial.
        """
        return (self.frobenius_poly,) + self.minors


def _sphere_polynomial(dims: Dims) -> Polynomial:
    d = {Monomial.from_ranks([r, r]): Fraction(1) for r in range(dims.size)}
    d[Monomial.one()] = Fraction(-1)
    return Polynomial.from_dict(d)


def _canonical_minor(dims: Dims, alpha: Sequence[int], beta: Sequence[int]) -> Polynomial:
    """x_alpha x_beta - x_meet x_join for an incomparable pair."""
    lo, hi = meet_join(alpha, beta)
    ra, rb = dims.flat_index(alpha), dims.flat_index(beta)
    return Polynomial.from_dict(
        {
            Monomial.from_ranks([ra, rb]): Fraction(1),
            Monomial.from_ranks([dims.flat_index(lo), dims.flat_index(hi)]): Fraction(-1),
        }
    )


def _switch_subsets(S: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Orientation representatives M for a differing-mode set S.

    One of M, S\\M is kept per unordered split: the strictly smaller side, or
    on ties (|S| even, |M| = |S|/2) the side containing min(S).
    """
    s = len(S)
    e = min(S)
    out = []
    for size in range(1, s // 2 + 1):
        for M in itertools.combinations(S, size):
            if 2 * size == s and e not in M:
                continue
            out.append(M)
    return out


def _full_minors(dims: Dims) -> list[Polynomial]:
    d = dims.order
    sizes = dims.sizes
    minors = []
    for s in range(2, d + 1):
        for S in itertools.combinations(range(1, d + 1), s):
            for M in _switch_subsets(S):
                per_mode = []
                for mode in range(1, d + 1):
                    n = sizes[mode - 1]
                    if mode in M:
                        per_mode.append([(a, b) for b in range(1, n + 1) for a in range(b + 1, n + 1)])
                    elif mode in S:
                        per_mode.append([(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)])
                    else:
                        per_mode.append([(a, a) for a in range(1, n + 1)])
                for combo in itertools.product(*per_mode):
                    alpha = tuple(ab[0] for ab in combo)
                    beta = tuple(ab[1] for ab in combo)
                    minors.append(_canonical_minor(dims, alpha, beta))
    return minors


def _matricization_minors(dims: Dims, tau: tuple[int, ...]) -> Iterator[Polynomial]:
    """All order-two minors of the tau-matricization, monic and deduplicated upstream."""
    d = dims.order
    sizes = dims.sizes
    col_modes = tuple(m for m in range(1, d + 1) if m not in tau)
    row_space = list(itertools.product(*[range(1, sizes[m - 1] + 1) for m in tau]))
    col_space = list(itertools.product(*[range(1, sizes[m - 1] + 1) for m in col_modes]))

    def combine(row, col):
        idx = [0] * d
        for m, v in zip(tau, row):
            idx[m - 1] = v
        for m, v in zip(col_modes, col):
            idx[m - 1] = v
        return tuple(idx)

    for r1, r2 in itertools.combinations(row_space, 2):
        for c1, c2 in itertools.combinations(col_space, 2):
            a = Monomial.from_ranks(
                [dims.flat_index(combine(r1, c1)), dims.flat_index(combine(r2, c2))]
            )
            b = Monomial.from_ranks(
                [dims.flat_index(combine(r1, c2)), dims.flat_index(combine(r2, c1))]
            )
            f = Polynomial.from_dict({a: Fraction(1), b: Fraction(-1)})
            yield f.monic()


_CACHE: dict = {}
_CACHE_LOCK = threading.RLock()


def _cached(key, build):
    with _CACHE_LOCK:
        if key in _CACHE:
            return _CACHE[key]
    value = build()
    with _CACHE_LOCK:
        return _CACHE.setdefault(key, value)


def clear_caches() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def generators(spec: IdealSpec) -> GeneratorSet:
    """The format's minor set plus the sphere polynomial, memoized per spec."""

    def build():
        if spec.format is TensorFormat.FULL:
            minors = _full_minors(spec.dims)
        else:
            seen = {}
            for tau in spec.matricizations():
                for f in _matricization_minors(spec.dims, tau):
                    seen.setdefault(f, None)
            minors = list(seen)
        minors.sort(key=lambda f: f.leading_monomial(), reverse=True)
        return GeneratorSet(spec, tuple(minors), _sphere_polynomial(spec.dims))

    return _cached(("generators", spec), build)


def full_groebner_basis(dims: Dims) -> GroebnerBasis:
    """Certified reduced Groebner basis of the full determinantal ideal."""

    def build():
        gens = generators(IdealSpec(dims, TensorFormat.FULL))
        basis = GroebnerBasis(gens.all_polys())
        if not basis.reduced:
            raise AssertionError(f"full generator set for {dims} is not reduced")
        return basis

    return _cached(("gb", dims), build)


# --- theta bases ---------------------------------------------------------


@dataclass(frozen=True)
class ThetaBasis:
    """Standard monomials of degree <= 2k for level k.

    Sorted by total degree, then lexicographically by the (ascending) tuple of
    variable positions; the first element is the constant monomial and the
    degree-one block lists the variables in vectorization order, matching the
    layout of the explicit order-3 moment matrix.
    """

    dims: Dims
    k: int
    monomials: tuple[Monomial, ...]
    _index: dict = field(repr=False, compare=False, init=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.monomials)})

    @property
    def size(self) -> int:
        return len(self.monomials)

    def size_at_degree(self, deg: int) -> int:
        """Number of basis monomials of degree <= deg (a prefix)."""
        count = 0
        for m in self.monomials:
            if m.degree > deg:
                break
            count += 1
        return count

    @property
    def psd_dim(self) -> int:
        return self.size_at_degree(self.k)

    def index(self, mono: Monomial) -> int:
        try:
            return self._index[mono]
        except KeyError:
            raise KeyError(f"monomial not in theta basis: {mono}") from None

    def __contains__(self, mono: Monomial) -> bool:
        return mono in self._index

    def monomial_values(self, X: DenseTensor) -> np.ndarray:
        """Evaluate every basis monomial at the tensor's entries."""
        return np.array([m.evaluate(X.values) for m in self.monomials])


def _componentwise_geq(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x >= y for x, y in zip(a, b))


def _enumerate_standard(dims: Dims, max_deg: int) -> list[Monomial]:
    """Standard monomials of the full ideal: chain-supported, top square excluded.

    A monomial avoids every minor's leading term exactly when its support is a
    chain in the componentwise order, and avoids the sphere polynomial's
    leading term when the top variable appears at most once.
    """
    index = [dims.multi_index(r) for r in range(dims.size)]
    out: list[Monomial] = [Monomial.one()]
    stack: list[int] = []

    def rec(start: int) -> None:
        if len(stack) == max_deg:
            return
        for r in range(start, dims.size):
            if stack:
                if r == stack[-1]:
                    if r == 0:
                        continue  # top variable squared is a leading term
                elif not _componentwise_geq(index[r], index[stack[-1]]):
                    continue
            stack.append(r)
            out.append(Monomial.from_ranks(stack))
            rec(r)
            stack.pop()

    rec(0)
    out.sort(key=lambda m: (m.degree, m.ranks()))
    return out


def standard_monomials(spec: IdealSpec, k: int) -> ThetaBasis:
    """Theta basis at level k: standard monomials of degree <= 2k.

    The basis is format independent: TT and HOSVD generate the same ideal as
    FULL, whose generator set is the reduced Groebner basis defining the
    standard monomials.
    """
    if k < 1:
        raise ValueError(f"level k must be >= 1, got {k}")
    if spec.format is TensorFormat.CUSTOM:
        raise ValueError("theta bases are not defined for CUSTOM matricization lists")

    def build():
        monos = _enumerate_standard(spec.dims, 2 * k)
        basis = ThetaBasis(spec.dims, k, tuple(monos))
        # Degree-one block must be all variables in vectorization order.
        n = spec.dims.size
        assert basis.size_at_degree(1) == n + 1
        assert all(
            basis.monomials[1 + r] == Monomial.variable(r) for r in range(n)
        )
        return basis

    return _cached(("basis", spec.dims, k), build)


# --- moment structures ----------------------------------------------------

LinearForm = tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True, eq=False)
class MomentStructure:
    """Sparse symmetric matrix of linear forms over the theta basis.

    ``entries[(i, j)]`` with ``i <= j < psd_dim`` lists ``(coordinate, value)``
    pairs: the (i, j) moment-matrix entry is the sum of ``value * y[coord]``
    where ``y`` is indexed by the basis monomials (coordinate 0 is the
    constant, coordinates 1..n the tensor entries).
    """

    spec: IdealSpec
    k: int
    basis: ThetaBasis
    entries: dict[tuple[int, int], LinearForm] = field(repr=False)

    @property
    def psd_dim(self) -> int:
        return self.basis.psd_dim

    @property
    def n_linear(self) -> int:
        return self.spec.dims.size

    def assemble(self, y: np.ndarray) -> np.ndarray:
        """Dense symmetric matrix at a coordinate vector over the basis."""
        y = np.asarray(y, dtype=float)
        if y.size != self.basis.size:
            raise ValueError(f"expected {self.basis.size} coordinates, got {y.size}")
        p = self.psd_dim
        M = np.zeros((p, p))
        for (i, j), form in self.entries.items():
            v = sum(float(c) * y[l] for l, c in form)
            M[i, j] = v
            if i != j:
                M[j, i] = v
        return M


def _format_equality(dims: Dims, fmt: TensorFormat) -> "FormatEqualityReport":
    def build():
        basis = full_groebner_basis(dims)
        spec = IdealSpec(dims, fmt)
        fmt_gens = generators(spec)
        for f in fmt_gens.all_polys():
            if not normal_form(f, basis).is_zero:
                raise AssertionError(
                    f"{fmt.value} generator does not lie in the full ideal for {dims}"
                )
        full = generators(IdealSpec(dims, TensorFormat.FULL))
        n_pieces = 0
        for f in full.minors:
            n_pieces += len(decompose_minor(f, fmt, dims))
        return FormatEqualityReport(
            dims=dims,
            format=fmt,
            n_format_generators=len(fmt_gens.minors),
            n_full_minors=len(full.minors),
            reductions_zero=True,
            decomposition_pieces=n_pieces,
        )

    return _cached(("equality", dims, fmt), build)


@dataclass(frozen=True)
class FormatEqualityReport:
    dims: Dims
    format: TensorFormat
    n_format_generators: int
    n_full_minors: int
    reductions_zero: bool
    decomposition_pieces: int


def moment_structure(spec: IdealSpec, k: int) -> MomentStructure:
    """Moment-matrix structure via normal forms against the certified basis.

    Every product of two level-k basis monomials is reduced modulo the full
    Groebner basis and expressed over the degree <= 2k basis; escaping that
    span would violate the theta-basis closure property and raises.
    """
    if spec.format is TensorFormat.CUSTOM:
        raise ValueError(
            "moment structures require a format whose ideal equals the full ideal "
            "(FULL, TT, or HOSVD)"
        )

    def build():
        gb = full_groebner_basis(spec.dims)
        if spec.format is not TensorFormat.FULL:
            _format_equality(spec.dims, spec.format)
        basis = standard_monomials(spec, k)
        p = basis.psd_dim
        entries: dict[tuple[int, int], LinearForm] = {}
        for i in range(p):
            mi = basis.monomials[i]
            for j in range(i, p):
                prod = mi * basis.monomials[j]
                if prod in basis:
                    form: LinearForm = ((basis.index(prod), Fraction(1)),)
                else:
                    nf = normal_form(Polynomial.term(prod), gb)
                    coeffs = []
                    for m, c in nf.terms:
                        if m not in basis:
                            raise AssertionError(
                                "normal form escapes the degree-2k basis span"
                            )
                        coeffs.append((basis.index(m), c))
                    form = tuple(sorted(coeffs))
                entries[(i, j)] = form
        return MomentStructure(spec, k, basis, entries)

    return _cached(("structure", spec.dims, spec.format, k), build)


def moment_structure_order3_fast(dims: Dims | Iterable[int]) -> MomentStructure:
    """Closed-form level-1 moment structure for order-3 tensors.

    Assembles the sparse coefficient families of the explicit order-3 moment
    matrix directly from index combinatorics, with no polynomial arithmetic.
    Structurally equal to ``moment_structure(spec, 1)``; this is the
    performance path used by the recovery harness.
    """
    if not isinstance(dims, Dims):
        dims = Dims(dims)
    if dims.order != 3:
        raise ValueError(f"fast path is defined for order-3 tensors, got order {dims.order}")

    def build():
        n1, n2, n3 = dims.sizes
        rank = dims.flat_index
        # Basis: constant, the variables in vectorization order, then the
        # products over comparable index pairs ordered by position pair.
        monos: list[Monomial] = [Monomial.one()]
        monos.extend(Monomial.variable(r) for r in range(dims.size))
        pair_coord: dict[tuple[int, int], int] = {}
        for r1 in range(dims.size):
            a = dims.multi_index(r1)
            for r2 in range(r1, dims.size):
                if r1 == r2 == 0:
                    continue
                if _componentwise_geq(dims.multi_index(r2), a):
                    pair_coord[(r1, r2)] = len(monos)
                    monos.append(Monomial.from_ranks([r1, r2]))
        basis = ThetaBasis(dims, 1, tuple(monos))

        acc: dict[tuple[int, int], dict[int, Fraction]] = {}

        def add(i: int, j: int, coord: int, value: int) -> None:
            if i > j:
                i, j = j, i
            acc.setdefault((i, j), {})
            acc[(i, j)][coord] = acc[(i, j)].get(coord, Fraction(0)) + value

        # Constant block and the linear row.
        add(0, 0, 0, 1)
        add(1, 1, 0, 1)
        for r in range(dims.size):
            add(0, r + 1, 1 + r, 1)

        def f(i, j, k):  # 0-based matrix position of entry (i, j, k)
            return rank((i, j, k)) + 1

        r1_ = range(1, n1 + 1)
        r2_ = range(1, n2 + 1)
        r3_ = range(1, n3 + 1)

        # Squares: +1 on the own diagonal, -1 on the top variable's diagonal.
        for i, j, k in itertools.product(r1_, r2_, r3_):
            if (i, j, k) == (1, 1, 1):
                continue
            c = pair_coord[(rank((i, j, k)), rank((i, j, k)))]
            add(1, 1, c, -1)
            add(f(i, j, k), f(i, j, k), c, 1)
        # Two modes differing, third fixed: two positions per class.
        for i in r1_:
            for j, jh in itertools.combinations(r2_, 2):
                for k, kh in itertools.combinations(r3_, 2):
                    c = pair_coord[(rank((i, j, k)), rank((i, jh, kh)))]
                    add(f(i, j, k), f(i, jh, kh), c, 1)
                    add(f(i, j, kh), f(i, jh, k), c, 1)
        for j in r2_:
            for i, ih in itertools.combinations(r1_, 2):
                for k, kh in itertools.combinations(r3_, 2):
                    c = pair_coord[(rank((i, j, k)), rank((ih, j, kh)))]
                    add(f(i, j, k), f(ih, j, kh), c, 1)
                    add(f(i, j, kh), f(ih, j, k), c, 1)
        for k in r3_:
            for i, ih in itertools.combinations(r1_, 2):
                for j, jh in itertools.combinations(r2_, 2):
                    c = pair_coord[(rank((i, j, k)), rank((ih, jh, k)))]
                    add(f(i, j, k), f(ih, jh, k), c, 1)
                    add(f(i, jh, k), f(ih, j, k), c, 1)
        # All three modes differing: four positions per class.
        for i, ih in itertools.combinations(r1_, 2):
            for j, jh in itertools.combinations(r2_, 2):
                for k, kh in itertools.combinations(r3_, 2):
                    c = pair_coord[(rank((i, j, k)), rank((ih, jh, kh)))]
                    add(f(i, j, k), f(ih, jh, kh), c, 1)
                    add(f(i, jh, k), f(ih, j, kh), c, 1)
                    add(f(i, jh, kh), f(ih, j, k), c, 1)
                    add(f(i, j, kh), f(ih, jh, k), c, 1)
        # One mode differing: a single position per class.
        for j, k in itertools.product(r2_, r3_):
            for i, ih in itertools.combinations(r1_, 2):
                add(f(i, j, k), f(ih, j, k), pair_coord[(rank((i, j, k)), rank((ih, j, k)))], 1)
        for i, k in itertools.product(r1_, r3_):
            for j, jh in itertools.combinations(r2_, 2):
                add(f(i, j, k), f(i, jh, k), pair_coord[(rank((i, j, k)), rank((i, jh, k)))], 1)
        for i, j in itertools.product(r1_, r2_):
            for k, kh in itertools.combinations(r3_, 2):
                add(f(i, j, k), f(i, j, kh), pair_coord[(rank((i, j, k)), rank((i, j, kh)))], 1)

        entries = {
            pos: tuple(sorted(forms.items())) for pos, forms in acc.items()
        }
        spec = IdealSpec(dims, TensorFormat.FULL)
        return MomentStructure(spec, 1, basis, entries)

    return _cached(("structure-fast", dims), build)


def variety_residual(spec: IdealSpec, X: DenseTensor) -> float:
    """Largest absolute generator value at X; zero exactly on the variety."""
    if X.dims != spec.dims:
        raise ValueError(f"tensor dims {X.dims} do not match spec dims {spec.dims}")
    gens = generators(spec)
    vals = X.values
    worst = abs(gens.frobenius_poly.evaluate(vals))
    for f in gens.minors:
        worst = max(worst, abs(f.evaluate(vals)))
    return worst


# --- minor decomposition across formats -----------------------------------


def _parse_minor(f: Polynomial, dims: Dims):
    """Split a two-term minor into (scale, pair (A, B), pair (C, D), swap set M)."""
    if len(f.terms) != 2:
        raise ValueError("not a two-term minor")
    (m1, c1), (m2, c2) = f.terms
    if c1 != -c2:
        raise ValueError("minor coefficients must be opposite")
    r1, r2 = m1.ranks(), m2.ranks()
    if len(r1) != 2 or len(r2) != 2 or r1[0] == r1[1] or r2[0] == r2[1]:
        raise ValueError("minor terms must be products of two distinct variables")
    A, B = dims.multi_index(r1[0]), dims.multi_index(r1[1])
    C, D = dims.multi_index(r2[0]), dims.multi_index(r2[1])

    def swap_set(C, D):
        M = tuple(k + 1 for k in range(dims.order) if C[k] != A[k])
        for k in range(dims.order):
            mode = k + 1
            if mode in M:
                if C[k] != B[k] or D[k] != A[k]:
                    return None
            else:
                if C[k] != A[k] or D[k] != B[k]:
                    return None
        return M

    M = swap_set(C, D)
    if M is None:
        M = swap_set(D, C)
    if M is None:
        raise ValueError("terms are not the two diagonals of one matricization minor")
    diffs = tuple(k + 1 for k in range(dims.order) if A[k] != B[k])
    if not M or len(M) == len(diffs):
        raise ValueError("degenerate minor: the two terms coincide")
    return c1, (A, B), M, diffs


def _swap(A, B, modes):
    """Exchange the listed modes between two multi-indices."""
    a, b = list(A), list(B)
    for m in modes:
        a[m - 1], b[m - 1] = b[m - 1], a[m - 1]
    return tuple(a), tuple(b)


def _two_term(dims: Dims, scale: Fraction, neg_pair, pos_pair) -> Polynomial:
    """scale * (x_pos_pair - x_neg_pair), dropping the zero polynomial."""
    neg = Monomial.from_ranks([dims.flat_index(a) for a in neg_pair])
    pos = Monomial.from_ranks([dims.flat_index(a) for a in pos_pair])
    if neg == pos:
        return Polynomial.zero()
    return Polynomial.from_dict({pos: scale, neg: -scale})


def _in_family(M, diffs, target: TensorFormat, d: int) -> bool:
    comp = tuple(k for k in diffs if k not in M)
    if target is TensorFormat.HOSVD:
        return len(M) == 1 or len(comp) == 1
    # TT: the swap pattern must split the differing modes at a prefix.
    return max(M) < min(comp) or max(comp) < min(M)


def decompose_minor(f: Polynomial, target: TensorFormat, dims: Dims) -> list[Polynomial]:
    """Write a matricization minor as an exact sum of target-family minors.

    The target is TT or HOSVD.  Pieces telescope through single-mode swaps
    (for HOSVD) and are regrouped into prefix-matricization minors for TT;
    the exact identity ``sum(pieces) == f`` is verified before returning.
    """
    if target not in (TensorFormat.TT, TensorFormat.HOSVD):
        raise ValueError("decomposition targets are TT and HOSVD")
    scale, (A, B), M, diffs = _parse_minor(f, dims)
    if _in_family(M, diffs, target, dims.order):
        return [f]

    comp = tuple(k for k in diffs if k not in M)
    tau = min((M, comp), key=lambda t: (len(t), t))
    # Orient so f = c * (-x_A x_B + x_{A'} x_{B'}) with (A', B') the tau-swap:
    # c is minus the coefficient of x_A x_B.
    c = -f.coefficient(Monomial.from_ranks([dims.flat_index(A), dims.flat_index(B)]))

    pieces: list[Polynomial] = []
    cur_a, cur_b = A, B
    for t in sorted(tau):
        nxt_a, nxt_b = _swap(cur_a, cur_b, [t])
        piece = _two_term(dims, c, (cur_a, cur_b), (nxt_a, nxt_b))
        if not piece.is_zero:
            if target is TensorFormat.HOSVD or t == 1:
                pieces.append(piece)
            else:
                pieces.extend(_unfolding_to_prefix(piece, t, dims))
        cur_a, cur_b = nxt_a, nxt_b

    total = Polynomial.zero()
    for p in pieces:
        total = total + p
    if total != f:
        raise AssertionError("minor decomposition does not re-expand to the input")
    return pieces


def _unfolding_to_prefix(piece: Polynomial, t: int, dims: Dims) -> list[Polynomial]:
    """Split a mode-t unfolding minor (t >= 2) into prefix-matricization minors."""
    c1, (A, B), M, diffs = _parse_minor(piece, dims)
    assert M == (t,), "telescoped piece must swap a single mode"
    c = -c1  # piece = c * (-x_A x_B + x_{A<->B at t})
    out = []
    if any(j > t for j in diffs):
        # minor of the prefix {1..t} plus minor of the prefix {1..t-1}
        mid_a, mid_b = _swap(A, B, range(1, t + 1))
        out.append(_two_term(dims, c, (A, B), (mid_a, mid_b)))
        end_a, end_b = _swap(A, B, [t])
        tail = _two_term(dims, c, (mid_a, mid_b), (end_a, end_b))
        if not tail.is_zero:
            out.append(tail)
    else:
        # all differing modes <= t: already a single {1..t-1} minor
        mid_a, mid_b = _swap(A, B, range(1, t))
        out.append(_two_term(dims, c, (A, B), (mid_a, mid_b)))
    return out


# --- certification ---------------------------------------------------------


@dataclass(frozen=True)
class CertificationReport:
    dims: Dims
    format: TensorFormat
    n_minors: int
    buchberger: BuchbergerReport
    reduced: bool
    format_equality: FormatEqualityReport | None

    @property
    def passes(self) -> bool:
        ok = self.buchberger.passes and self.reduced
        if self.format_equality is not None:
            ok = ok and self.format_equality.reductions_zero
        return ok


def certify(spec: IdealSpec) -> CertificationReport:
    """Certify the full basis for the spec's dims, plus format ideal equality."""
    basis = full_groebner_basis(spec.dims)
    equality = None
    if spec.format in (TensorFormat.TT, TensorFormat.HOSVD):
        equality = _format_equality(spec.dims, spec.format)
    n_minors = len(generators(IdealSpec(spec.dims, TensorFormat.FULL)).minors)
    return CertificationReport(
        dims=spec.dims,
        format=spec.format,
        n_minors=n_minors,
        buchberger=basis.report,
        reduced=basis.reduced,
        format_equality=equality,
    )
