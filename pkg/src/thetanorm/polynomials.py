"""Exact multivariate polynomial arithmetic over tensor-entry variables.

One variable per tensor entry ``x[a_1,...,a_d]``.  Variables are totally
ordered by the ambient agreement ``x[1,...,1] > x[1,...,2] > ... > x[n_1,...,n_d]``,
i.e. descending in the shared vectorization order; the *rank* of a variable is
its flat vectorization position, so rank 0 is the greatest variable.

Monomials carry a sparse ``(rank, exponent)`` map and compare in graded
reverse lexicographic (grevlex) order: total degree first, ties broken at the
rightmost (largest-rank) differing exponent, where the smaller exponent wins.
Coefficients are exact ``Fraction``s so that reduction to zero is a hard
equality, never a tolerance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tensors import Dims

__all__ = [
    "VariableOrder",
    "Monomial",
    "Polynomial",
    "grevlex_cmp",
    "s_polynomial",
    "divide",
    "normal_form",
    "buchberger_check",
    "BuchbergerReport",
    "is_reduced",
    "GroebnerBasis",
    "NotGroebnerBasisError",
    "format_polynomial",
    "parse_polynomial",
]


@dataclass(frozen=True)
class VariableOrder:
    """Variables x[alpha] for one tensor shape, ranked by vectorization position."""

    dims: Dims

    @property
    def n_vars(self) -> int:
        return self.dims.size

    def rank(self, alpha: Sequence[int]) -> int:
        return self.dims.flat_index(alpha)

    def index_of(self, rank: int) -> tuple[int, ...]:
        return self.dims.multi_index(rank)

    def name(self, rank: int) -> str:
        return "x[" + ",".join(str(a) for a in self.index_of(rank)) + "]"


@total_ordering
@dataclass(frozen=True)
class Monomial:
    """Sparse exponent map, stored as (rank, exponent) pairs ascending in rank."""

    exps: tuple[tuple[int, int], ...]
    degree: int = field(init=False, compare=False)

    def __post_init__(self):
        if any(e <= 0 for _, e in self.exps):
            raise ValueError(f"zero or negative exponent in {self.exps}")
        ranks = [r for r, _ in self.exps]
        if ranks != sorted(set(ranks)):
            raise ValueError(f"exponent ranks not strictly ascending: {self.exps}")
        object.__setattr__(self, "degree", sum(e for _, e in self.exps))

    @classmethod
    def one(cls) -> "Monomial":
        return cls(())

    @classmethod
    def variable(cls, rank: int) -> "Monomial":
        return cls(((rank, 1),))

    @classmethod
    def from_ranks(cls, ranks: Iterable[int]) -> "Monomial":
        """Product of variables given by rank, repeats allowed."""
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        return cls(tuple(sorted(counts.items())))

    @property
    def is_one(self) -> bool:
        return not self.exps

    def exponent(self, rank: int) -> int:
        for r, e in self.exps:
            if r == rank:
                return e
        return 0

    def ranks(self) -> tuple[int, ...]:
        """Variable ranks with multiplicity, ascending."""
        out: list[int] = []
        for r, e in self.exps:
            out.extend([r] * e)
        return tuple(out)

    def __mul__(self, other: "Monomial") -> "Monomial":
        m = dict(self.exps)
        for r, e in other.exps:
            m[r] = m.get(r, 0) + e
        return Monomial(tuple(sorted(m.items())))

    def divides(self, other: "Monomial") -> bool:
        it = dict(other.exps)
        return all(it.get(r, 0) >= e for r, e in self.exps)

    def __floordiv__(self, other: "Monomial") -> "Monomial":
        m = dict(self.exps)
        for r, e in other.exps:
            have = m.get(r, 0)
            if have < e:
                raise ValueError(f"{other} does not divide {self}")
            if have == e:
                del m[r]
            else:
                m[r] = have - e
        return Monomial(tuple(sorted(m.items())))

    def lcm(self, other: "Monomial") -> "Monomial":
        m = dict(self.exps)
        for r, e in other.exps:
            m[r] = max(m.get(r, 0), e)
        return Monomial(tuple(sorted(m.items())))

    def is_coprime(self, other: "Monomial") -> bool:
        theirs = {r for r, _ in other.exps}
        return all(r not in theirs for r, _ in self.exps)

    def evaluate(self, values) -> float:
        """Float value at a point; ``values[r]`` is the rank-r variable."""
        v = 1.0
        for r, e in self.exps:
            v *= float(values[r]) ** e
        return v

    def __lt__(self, other: "Monomial") -> bool:
        return grevlex_cmp(self, other) < 0


def grevlex_cmp(a: Monomial, b: Monomial) -> int:
    """-1, 0, or +1 as ``a`` is grevlex-smaller than, equal to, or greater than ``b``."""
    if a.degree != b.degree:
        return -1 if a.degree < b.degree else 1
    if a.exps == b.exps:
        return 0
    # Walk the exponent difference from the largest rank (smallest variable)
    # toward rank 0; the first difference decides: smaller exponent wins.
    ia, ib = len(a.exps) - 1, len(b.exps) - 1
    while ia >= 0 or ib >= 0:
        ra = a.exps[ia][0] if ia >= 0 else -1
        rb = b.exps[ib][0] if ib >= 0 else -1
        if ra > rb:
            return -1  # a has a nonzero exponent at a larger rank
        if rb > ra:
            return 1
        ea, eb = a.exps[ia][1], b.exps[ib][1]
        if ea != eb:
            return 1 if ea < eb else -1
        ia -= 1
        ib -= 1
    return 0


@dataclass(frozen=True)
class Polynomial:
    """Terms ``(monomial, coefficient)`` kept strictly descending in grevlex."""

    terms: tuple[tuple[Monomial, Fraction], ...]

    @classmethod
    def from_dict(cls, d: Mapping[Monomial, Fraction | int]) -> "Polynomial":
        items = [(m, Fraction(c)) for m, c in d.items() if c != 0]
        items.sort(key=lambda t: t[0], reverse=True)
        return cls(tuple(items))

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def constant(cls, c: Fraction | int) -> "Polynomial":
        c = Fraction(c)
        return cls(((Monomial.one(), c),)) if c else cls(())

    @classmethod
    def variable(cls, rank: int) -> "Polynomial":
        return cls(((Monomial.variable(rank), Fraction(1)),))

    @classmethod
    def term(cls, mono: Monomial, coeff: Fraction | int = 1) -> "Polynomial":
        c = Fraction(coeff)
        return cls(((mono, c),)) if c else cls(())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return self.terms[0][0]

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.terms[0][1]

    def multidegree(self) -> Monomial:
        return self.leading_monomial()

    def coefficient(self, mono: Monomial) -> Fraction:
        for m, c in self.terms:
            if m == mono:
                return c
        return Fraction(0)

    def monic(self) -> "Polynomial":
        if not self.terms:
            return self
        lc = self.leading_coefficient()
        if lc == 1:
            return self
        return Polynomial(tuple((m, c / lc) for m, c in self.terms))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        d = dict(self.terms)
        for m, c in other.terms:
            s = d.get(m, Fraction(0)) + c
            if s:
                d[m] = s
            elif m in d:
                del d[m]
        return Polynomial.from_dict(d)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple((m, -c) for m, c in self.terms))

    def mul_term(self, mono: Monomial, coeff: Fraction | int) -> "Polynomial":
        c = Fraction(coeff)
        if not c:
            return Polynomial.zero()
        # Multiplying by one monomial preserves the grevlex order of terms.
        return Polynomial(tuple((m * mono, cc * c) for m, cc in self.terms))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        d: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = m1 * m2
                s = d.get(m, Fraction(0)) + c1 * c2
                if s:
                    d[m] = s
                elif m in d:
                    del d[m]
        return Polynomial.from_dict(d)

    def evaluate(self, values: np.ndarray) -> float:
        """Float evaluation; ``values[r]`` is the value of the rank-r variable."""
        total = 0.0
        for m, c in self.terms:
            v = float(c)
            for r, e in m.exps:
                v *= float(values[r]) ** e
            total += v
        return total


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    """Cancel the leading terms: (lcm/LT(f)) f - (lcm/LT(g)) g, exactly."""
    if f.is_zero or g.is_zero:
        raise ValueError("S-polynomial of a zero polynomial is undefined")
    lcm = f.leading_monomial().lcm(g.leading_monomial())
    left = f.mul_term(lcm // f.leading_monomial(), 1 / f.leading_coefficient())
    right = g.mul_term(lcm // g.leading_monomial(), 1 / g.leading_coefficient())
    return left - right


def divide(
    f: Polynomial, divisors: Sequence[Polynomial]
) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division: f = sum_i q_i g_i + r.

    Divisors are tried in the given order at every step.  No monomial of the
    remainder is divisible by any divisor's leading monomial, and every
    nonzero ``q_i g_i`` has multidegree <= multidegree(f).
    """
    if any(g.is_zero for g in divisors):
        raise ValueError("zero divisor")
    lead = [(g.leading_monomial(), g.leading_coefficient()) for g in divisors]
    quotients: list[dict[Monomial, Fraction]] = [{} for _ in divisors]
    remainder: dict[Monomial, Fraction] = {}
    p = f
    while not p.is_zero:
        mono, coeff = p.terms[0]
        for i, (lm, lc) in enumerate(lead):
            if lm.divides(mono):
                q = mono // lm
                qc = coeff / lc
                quotients[i][q] = quotients[i].get(q, Fraction(0)) + qc
                p = p - divisors[i].mul_term(q, qc)
                break
        else:
            remainder[mono] = remainder.get(mono, Fraction(0)) + coeff
            p = Polynomial(p.terms[1:])
    return [Polynomial.from_dict(q) for q in quotients], Polynomial.from_dict(remainder)


class _DivisorIndex:
    """Leading-monomial lookup by variable, for fast repeated reduction.

    Produces the same remainders as :func:`divide` on a certified Groebner
    basis (remainders are unique there); for arbitrary divisor sets it is one
    fixed deterministic reduction strategy, which is all the Buchberger
    criterion needs.
    """

    def __init__(self, polys: Sequence[Polynomial]):
        self.polys = list(polys)
        self.lead = [(p.leading_monomial(), p.leading_coefficient()) for p in self.polys]
        self.by_var: dict[int, list[int]] = {}
        self.constant: int | None = None
        for i, (lm, _) in enumerate(self.lead):
            if lm.is_one and self.constant is None:
                self.constant = i
            for r, _e in lm.exps:
                self.by_var.setdefault(r, []).append(i)

    def find(self, mono: Monomial) -> int | None:
        best = None
        for r, _e in mono.exps:
            for i in self.by_var.get(r, ()):
                if (best is None or i < best) and self.lead[i][0].divides(mono):
                    best = i
        if best is None:
            return self.constant
        return best

    def remainder(self, f: Polynomial) -> Polynomial:
        rem: dict[Monomial, Fraction] = {}
        p = f
        while not p.is_zero:
            mono, coeff = p.terms[0]
            i = self.find(mono)
            if i is None:
                rem[mono] = rem.get(mono, Fraction(0)) + coeff
                p = Polynomial(p.terms[1:])
            else:
                lm, lc = self.lead[i]
                p = p - self.polys[i].mul_term(mono // lm, coeff / lc)
        return Polynomial.from_dict(rem)


@dataclass(frozen=True)
class BuchbergerReport:
    passes: bool
    failing_pair: tuple[int, int] | None
    pairs_total: int
    pairs_skipped_coprime: int
    pairs_reduced: int


def buchberger_check(polys: Sequence[Polynomial]) -> BuchbergerReport:
    """Verify the Groebner property: S(g_i, g_j) divides to remainder zero.

    Pairs with relatively prime leading monomials are skipped; they reduce to
    zero automatically.
    """
    polys = list(polys)
    if any(p.is_zero for p in polys):
        raise ValueError("zero polynomial in candidate basis")
    index = _DivisorIndex(polys)
    lead = [p.leading_monomial() for p in polys]
    total = len(polys) * (len(polys) - 1) // 2
    skipped = 0
    reduced = 0
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if lead[i].is_coprime(lead[j]):
                skipped += 1
                continue
            rem = index.remainder(s_polynomial(polys[i], polys[j]))
            reduced += 1
            if not rem.is_zero:
                return BuchbergerReport(False, (i, j), total, skipped, reduced)
    return BuchbergerReport(True, None, total, skipped, reduced)


def is_reduced(polys: Sequence[Polynomial]) -> bool:
    """Monic, and no monomial of any element is divisible by another's leading monomial."""
    polys = list(polys)
    if any(p.is_zero for p in polys):
        return False
    if any(p.leading_coefficient() != 1 for p in polys):
        return False
    lead = [p.leading_monomial() for p in polys]
    for i, p in enumerate(polys):
        for m, _ in p.terms:
            for j, lm in enumerate(lead):
                if j != i and lm.divides(m):
                    return False
    return True


class NotGroebnerBasisError(ValueError):
    """Raised when a claimed Groebner basis fails the Buchberger criterion."""


class GroebnerBasis:
    """A certified Groebner basis; construction runs the Buchberger check.

    Elements are stored sorted by descending leading monomial, which fixes
    the divisor order used by :func:`normal_form`.
    """

    def __init__(self, polys: Sequence[Polynomial], *, _report: BuchbergerReport | None = None):
        polys = sorted(polys, key=lambda p: p.leading_monomial(), reverse=True)
        self.polys: tuple[Polynomial, ...] = tuple(polys)
        if _report is None:
            _report = buchberger_check(self.polys)
        if not _report.passes:
            raise NotGroebnerBasisError(
                f"Buchberger criterion fails at pair {_report.failing_pair}"
            )
        self.report = _report
        self.reduced = is_reduced(self.polys)
        self._index = _DivisorIndex(self.polys)

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)


def normal_form(f: Polynomial, basis: GroebnerBasis) -> Polynomial:
    """The unique division remainder of ``f`` modulo a certified basis."""
    if not isinstance(basis, GroebnerBasis):
        raise NotGroebnerBasisError(
            "normal_form requires a certified GroebnerBasis; run buchberger_check first"
        )
    return basis._index.remainder(f)


# Textual format: terms like `-1*x[1,1,2]*x[2,2,3] + 1/2*x[1,2,1]^2`, sorted
# descending in grevlex; constants print as bare rationals.

def _format_term(mono: Monomial, coeff: Fraction, order: VariableOrder) -> str:
    parts = [str(coeff)]
    for r, e in mono.exps:
        name = order.name(r)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial, order: VariableOrder) -> str:
    if p.is_zero:
        return "0"
    out = []
    for i, (m, c) in enumerate(p.terms):
        if i == 0:
            out.append(_format_term(m, c, order))
        elif c < 0:
            out.append(" - " + _format_term(m, -c, order))
        else:
            out.append(" + " + _format_term(m, c, order))
    return "".join(out)


_TERM_RE = re.compile(r"^\s*(?P<coeff>[+-]?\d+(?:/\d+)?)?\s*(?P<body>(?:\*?\s*x\[[\d,\s]+\](?:\^\d+)?\s*)*)$")
_FACTOR_RE = re.compile(r"x\[([\d,\s]+)\](?:\^(\d+))?")


def parse_polynomial(text: str, order: VariableOrder) -> Polynomial:
    """Inverse of :func:`format_polynomial`."""
    text = text.strip()
    if text == "0":
        return Polynomial.zero()
    # Terms are separated by whitespace-delimited +/-; the first may carry
    # its own sign.
    chunks = re.split(r"\s+([+-])\s+", text)
    pieces: list[str] = [chunks[0]]
    for i in range(1, len(chunks), 2):
        pieces.append(chunks[i] + chunks[i + 1])
    acc: dict[Monomial, Fraction] = {}
    for piece in pieces:
        piece = piece.strip()
        if not piece:
            continue
        sign = 1
        if piece[0] in "+-":
            sign = -1 if piece[0] == "-" else 1
            piece = piece[1:].strip()
        m = _TERM_RE.match(piece)
        if not m:
            raise ValueError(f"cannot parse term {piece!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        coeff *= sign
        ranks: list[int] = []
        for idx_text, exp_text in _FACTOR_RE.findall(m.group("body") or ""):
            alpha = tuple(int(t) for t in idx_text.split(","))
            ranks.extend([order.rank(alpha)] * (int(exp_text) if exp_text else 1))
        mono = Monomial.from_ranks(ranks)
        acc[mono] = acc.get(mono, Fraction(0)) + coeff
    return Polynomial.from_dict(acc)
