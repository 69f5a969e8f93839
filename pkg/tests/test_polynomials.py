import itertools
import random
from fractions import Fraction

import pytest

from thetanorm.polynomials import (
    GroebnerBasis,
    Monomial,
    NotGroebnerBasisError,
    Polynomial,
    VariableOrder,
    buchberger_check,
    divide,
    format_polynomial,
    grevlex_cmp,
    is_reduced,
    normal_form,
    parse_polynomial,
    s_polynomial,
)
from thetanorm.tensors import Dims, meet_join


def var(order: VariableOrder, *alpha) -> Monomial:
    return Monomial.variable(order.rank(alpha))


def minor(order: VariableOrder, a, b) -> Polynomial:
    """x_a x_b - x_{a^b meet} x_{a^b join} for an incomparable pair (a, b)."""
    lo, hi = meet_join(a, b)
    return Polynomial.from_dict(
        {
            Monomial.from_ranks([order.rank(a), order.rank(b)]): Fraction(1),
            Monomial.from_ranks([order.rank(lo), order.rank(hi)]): Fraction(-1),
        }
    )


def frobenius_poly(order: VariableOrder) -> Polynomial:
    d = {Monomial.from_ranks([r, r]): Fraction(1) for r in range(order.n_vars)}
    d[Monomial.one()] = Fraction(-1)
    return Polynomial.from_dict(d)


def matrix_basis_2x2(order: VariableOrder) -> list[Polynomial]:
    return [minor(order, (1, 2), (2, 1)), frobenius_poly(order)]


def random_monomial(rng: random.Random, n_vars: int, max_deg: int) -> Monomial:
    deg = rng.randint(0, max_deg)
    return Monomial.from_ranks(rng.choices(range(n_vars), k=deg))


def random_polynomial(rng: random.Random, n_vars: int, max_deg: int, n_terms: int) -> Polynomial:
    d = {}
    for _ in range(n_terms):
        d[random_monomial(rng, n_vars, max_deg)] = Fraction(rng.randint(-5, 5))
    return Polynomial.from_dict(d)


class TestGrevlex:
    def test_square_beats_mixed_at_top(self):
        order = VariableOrder(Dims((2, 2, 2)))
        a = Monomial.from_ranks([order.rank((1, 1, 1))] * 2)
        b = Monomial.from_ranks([order.rank((1, 1, 1)), order.rank((1, 1, 2))])
        assert grevlex_cmp(a, b) == 1

    def test_degree_graded(self):
        order = VariableOrder(Dims((2, 2)))
        low = Monomial.from_ranks([order.rank((2, 2))] * 2)
        high = Monomial.from_ranks([order.rank((1, 1))] * 3)
        assert grevlex_cmp(low, high) == -1

    def test_frobenius_leading_monomial_is_top_square(self):
        order = VariableOrder(Dims((2, 2, 2)))
        g = frobenius_poly(order)
        assert g.leading_monomial() == Monomial.from_ranks([order.rank((1, 1, 1))] * 2)

    def test_minor_leads_with_incomparable_pair(self):
        order = VariableOrder(Dims((2, 2, 2)))
        for a, b in [((1, 2, 1), (2, 1, 2)), ((1, 1, 2), (2, 2, 1)), ((1, 2, 2), (2, 1, 1))]:
            f = minor(order, a, b)
            assert f.leading_monomial() == Monomial.from_ranks(
                [order.rank(a), order.rank(b)]
            )

    def test_total_order_properties_random(self):
        rng = random.Random(0)
        monos = [random_monomial(rng, 8, 4) for _ in range(40)]
        for a, b, c in itertools.islice(itertools.product(monos, repeat=3), 4000):
            ab, ba = grevlex_cmp(a, b), grevlex_cmp(b, a)
            assert ab == -ba
            if ab == 0:
                assert a == b
            # multiplicativity
            assert grevlex_cmp(a * c, b * c) == ab
            # transitivity
            if ab > 0 and grevlex_cmp(b, c) > 0:
                assert grevlex_cmp(a, c) > 0
        for a in monos:
            for b in monos:
                if a.degree > b.degree:
                    assert grevlex_cmp(a, b) == 1


class TestSPolynomial:
    def test_worked_order4_example(self):
        order = VariableOrder(Dims((3, 3, 2, 3)))
        f1 = minor(order, (1, 2, 1, 2), (2, 1, 2, 3))
        f2 = minor(order, (3, 3, 1, 1), (2, 1, 2, 3))
        s = s_polynomial(f1, f2)
        expected = Polynomial.from_dict(
            {
                Monomial.from_ranks(
                    [order.rank((1, 1, 1, 2)), order.rank((2, 2, 2, 3)), order.rank((3, 3, 1, 1))]
                ): Fraction(-1),
                Monomial.from_ranks(
                    [order.rank((1, 2, 1, 2)), order.rank((2, 1, 1, 1)), order.rank((3, 3, 2, 3))]
                ): Fraction(1),
            }
        )
        assert s == expected

    def test_s_poly_of_multiple_is_zero(self):
        order = VariableOrder(Dims((2, 2)))
        f = minor(order, (1, 2), (2, 1))
        m = Monomial.from_ranks([order.rank((2, 2))])
        assert s_polynomial(f, f.mul_term(m, 3)).is_zero

    def test_matrix_case_syzygy_identity(self):
        # S(f_{ijkl}, f_{i j^ k^ l}) = x_{k^ l} f_{i j k j^} - x_{ij} f_{k j^ k^ l}
        # with i<k<k^, j<j^<l, written via canonical minors of a 3x3 matrix.
        order = VariableOrder(Dims((3, 3)))
        i, k, kh = 1, 2, 3
        j, jh, l = 1, 2, 3
        f1 = minor(order, (i, l), (k, j))
        f2 = minor(order, (i, l), (kh, jh))
        s = s_polynomial(f1, f2)
        rhs = minor(order, (i, jh), (k, j)).mul_term(
            Monomial.variable(order.rank((kh, l))), 1
        ) - minor(order, (k, l), (kh, jh)).mul_term(
            Monomial.variable(order.rank((i, j))), 1
        )
        assert s == rhs

    def test_zero_input_rejected(self):
        order = VariableOrder(Dims((2, 2)))
        with pytest.raises(ValueError):
            s_polynomial(Polynomial.zero(), minor(order, (1, 2), (2, 1)))


class TestDivide:
    def test_member_divides_to_zero_with_unit_quotient(self):
        order = VariableOrder(Dims((2, 2)))
        G = matrix_basis_2x2(order)
        quots, rem = divide(G[0], G)
        assert rem.is_zero
        assert quots[0] == Polynomial.constant(1)
        assert quots[1].is_zero

    def test_random_reexpansion_exact(self):
        order = VariableOrder(Dims((2, 2)))
        G = matrix_basis_2x2(order)
        rng = random.Random(1)
        for _ in range(30):
            f = random_polynomial(rng, order.n_vars, 3, 6)
            quots, rem = divide(f, G)
            recon = rem
            for q, g in zip(quots, G):
                recon = recon + q * g
            assert recon == f
            # remainder monomials not divisible by any leading monomial
            for m, _ in rem.terms:
                assert not any(g.leading_monomial().divides(m) for g in G)
            # multidegree bound
            for q, g in zip(quots, G):
                prod = q * g
                if not prod.is_zero and not f.is_zero:
                    assert grevlex_cmp(prod.leading_monomial(), f.leading_monomial()) <= 0

    def test_zero_divisor_rejected(self):
        with pytest.raises(ValueError):
            divide(Polynomial.constant(1), [Polynomial.zero()])


class TestNormalForm:
    def test_reduces_antidiagonal_product(self):
        order = VariableOrder(Dims((2, 2)))
        gb = GroebnerBasis(matrix_basis_2x2(order))
        f = Polynomial.term(
            Monomial.from_ranks([order.rank((1, 2)), order.rank((2, 1))])
        )
        expected = Polynomial.term(
            Monomial.from_ranks([order.rank((1, 1)), order.rank((2, 2))])
        )
        assert normal_form(f, gb) == expected

    def test_reduces_top_square_by_sphere(self):
        order = VariableOrder(Dims((2, 2)))
        gb = GroebnerBasis(matrix_basis_2x2(order))
        f = Polynomial.term(Monomial.from_ranks([order.rank((1, 1))] * 2))
        expected = Polynomial.from_dict(
            {
                Monomial.one(): Fraction(1),
                Monomial.from_ranks([order.rank((1, 2))] * 2): Fraction(-1),
                Monomial.from_ranks([order.rank((2, 1))] * 2): Fraction(-1),
                Monomial.from_ranks([order.rank((2, 2))] * 2): Fraction(-1),
            }
        )
        assert normal_form(f, gb) == expected

    def test_idempotent_and_additive(self):
        order = VariableOrder(Dims((2, 2)))
        gb = GroebnerBasis(matrix_basis_2x2(order))
        rng = random.Random(2)
        for _ in range(20):
            f = random_polynomial(rng, 4, 4, 5)
            g = random_polynomial(rng, 4, 4, 5)
            nf = normal_form(f, gb)
            assert normal_form(nf, gb) == nf
            lhs = normal_form(f + g, gb)
            rhs = normal_form(normal_form(f, gb) + normal_form(g, gb), gb)
            assert lhs == rhs

    def test_membership_iff_zero_normal_form(self):
        order = VariableOrder(Dims((2, 2)))
        G = matrix_basis_2x2(order)
        gb = GroebnerBasis(G)
        rng = random.Random(3)
        for _ in range(20):
            member = Polynomial.zero()
            for g in G:
                member = member + random_polynomial(rng, 4, 2, 3) * g
            assert normal_form(member, gb).is_zero

    def test_requires_certified_basis(self):
        with pytest.raises(NotGroebnerBasisError):
            normal_form(Polynomial.constant(1), [Polynomial.constant(1)])


class TestBuchberger:
    def test_matrix_2x2_basis_passes(self):
        order = VariableOrder(Dims((2, 2)))
        report = buchberger_check(matrix_basis_2x2(order))
        assert report.passes
        assert report.pairs_skipped_coprime == 1  # the only pair is coprime

    def test_perturbed_basis_fails_with_witness(self):
        order = VariableOrder(Dims((3, 3)))
        G = [
            minor(order, (i, l), (k, j))
            for i, k in itertools.combinations(range(1, 4), 2)
            for j, l in itertools.combinations(range(1, 4), 2)
        ]
        G.append(frobenius_poly(order))
        assert buchberger_check(G).passes
        # Flip the trailing sign of one minor; confluence generically breaks.
        broken = G[:]
        lm, lc = broken[0].terms[0]
        tm, tc = broken[0].terms[1]
        broken[0] = Polynomial.from_dict({lm: lc, tm: -tc})
        report = buchberger_check(broken)
        assert not report.passes
        assert report.failing_pair is not None

    def test_groebner_basis_class_rejects_failure(self):
        order = VariableOrder(Dims((3, 3)))
        bad = [
            minor(order, (i, l), (k, j))
            for i, k in itertools.combinations(range(1, 4), 2)
            for j, l in itertools.combinations(range(1, 4), 2)
        ]
        lm, lc = bad[0].terms[0]
        tm, tc = bad[0].terms[1]
        bad[0] = Polynomial.from_dict({lm: lc, tm: -tc})
        with pytest.raises(NotGroebnerBasisError):
            GroebnerBasis(bad)


class TestIsReduced:
    def test_matrix_basis_reduced(self):
        order = VariableOrder(Dims((2, 2)))
        assert is_reduced(matrix_basis_2x2(order))

    def test_non_monic_duplicate_not_reduced(self):
        order = VariableOrder(Dims((2, 2)))
        x = Polynomial.variable(order.rank((1, 1)))
        two_x = x.mul_term(Monomial.one(), 2)
        assert not is_reduced([x, two_x])


class TestTextFormat:
    def test_known_rendering(self):
        order = VariableOrder(Dims((2, 2)))
        f = minor(order, (1, 2), (2, 1))
        assert format_polynomial(f, order) == "1*x[1,2]*x[2,1] - 1*x[1,1]*x[2,2]"

    def test_roundtrip_random(self):
        order = VariableOrder(Dims((2, 2, 2)))
        rng = random.Random(4)
        for _ in range(40):
            f = random_polynomial(rng, order.n_vars, 4, 6)
            assert parse_polynomial(format_polynomial(f, order), order) == f

    def test_parse_constant_and_powers(self):
        order = VariableOrder(Dims((2, 2)))
        f = parse_polynomial("-3/2*x[1,1]^2 + 5", order)
        assert f.coefficient(Monomial.one()) == 5
        assert f.coefficient(Monomial.from_ranks([0, 0])) == Fraction(-3, 2)
