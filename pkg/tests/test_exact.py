import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from equispec.exact import RadicalRational, RationalPolynomial, as_fraction, squarefree_split

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.fractions(min_value=0, max_value=200, max_denominator=30)


def brute_squarefree(n):
    s = max(d for d in range(1, math.isqrt(n) + 1) if n % (d * d) == 0)
    return s, n // (s * s)


@given(st.integers(1, 20000))
def test_squarefree_split_matches_brute_force(n):
    assert squarefree_split(n) == brute_squarefree(n)


def test_squarefree_large_square_cofactor():
    p = 1009  # above the trial-division bound
    assert squarefree_split(p * p * 6) == (p, 6)


def test_as_fraction_float_repr():
    assert as_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        as_fraction(math.inf)


class TestRadicalRational:
    def test_canonical_form(self):
        r = RadicalRational(1, Fraction(12, 5))
        assert (r.q, r.t) == (Fraction(2, 5), 15)
        assert RadicalRational(3, 0) == 0
        assert RadicalRational.sqrt(9) == 3

    @given(fractions, radicands)
    def test_float_value(self, q, t):
        assert float(RadicalRational(q, t)) == pytest.approx(float(q) * math.sqrt(t), rel=1e-12, abs=1e-12)

    @given(fractions, radicands, fractions, radicands)
    def test_product_matches_floats(self, q1, t1, q2, t2):
        a, b = RadicalRational(q1, t1), RadicalRational(q2, t2)
        assert float(a * b) == pytest.approx(float(a) * float(b), rel=1e-12, abs=1e-12)

    @given(fractions, radicands)
    def test_square_is_rational(self, q, t):
        r = RadicalRational(q, t)
        assert (r * r).to_fraction() == q * q * t

    @given(fractions, radicands, fractions)
    def test_division_inverts_multiplication(self, q, t, c):
        assume(c != 0)
        r = RadicalRational(q, t)
        d = RadicalRational.sqrt(abs(c) + 1)
        assert (r * d) / d == r

    @given(fractions, fractions, radicands)
    def test_sum_same_radicand(self, a, b, t):
        x, y = RadicalRational(a, t), RadicalRational(b, t)
        assert float(x + y) == pytest.approx(float(x) + float(y), rel=1e-12, abs=1e-12)
        assert x - x == 0

    def test_incommensurable_sum_rejected(self):
        with pytest.raises(ValueError, match="incommensurable"):
            RadicalRational.sqrt(2) + RadicalRational.sqrt(3)

    def test_zero_is_neutral(self):
        assert RadicalRational() + RadicalRational.sqrt(2) == RadicalRational.sqrt(2)

    def test_irrational_to_fraction(self):
        with pytest.raises(ValueError):
            RadicalRational.sqrt(2).to_fraction()

    def test_negative_radicand(self):
        with pytest.raises(ValueError):
            RadicalRational(1, -2)

    def test_divide_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            RadicalRational(1) / RadicalRational()

    def test_format_relative(self):
        r = RadicalRational(Fraction(3, 2), 6)
        assert r.format(Fraction(3, 2)) == "3*sqrt(3/2)"
        with pytest.raises(ValueError):
            r.format(Fraction(2))

    def test_hash_consistent(self):
        assert hash(RadicalRational(2, 8)) == hash(RadicalRational(4, 2))


polys = st.lists(fractions, max_size=6).map(RationalPolynomial)


class TestRationalPolynomial:
    def test_degree(self):
        assert RationalPolynomial().degree == -1
        assert RationalPolynomial([1, 0, 0]).degree == 0

    @given(polys, polys, st.integers(-10, 10))
    def test_ring_operations_pointwise(self, p, q, x):
        assert (p + q)(x) == p(x) + q(x)
        assert (p * q)(x) == p(x) * q(x)
        assert (p - q)(x) == p(x) - q(x)

    @given(polys)
    def test_interpolation_round_trip(self, p):
        xs = list(range(-2, max(p.degree, 0) + 1))
        assert RationalPolynomial.interpolate(xs, [p(x) for x in xs]) == p

    @given(polys, st.integers(-5, 5))
    def test_derivative_matches_difference_quotient_limit(self, p, x):
        # exact derivative from the product rule against p(x+h)-p(x) over h as a polynomial in h
        d = p.derivative()
        h = Fraction(1, 10**9)
        assert abs(float((p(x + h) - p(x)) / h) - float(d(x))) < 1e-4 * (1 + abs(float(d(x))))

    def test_interpolate_errors(self):
        with pytest.raises(ValueError):
            RationalPolynomial.interpolate([1, 1], [2, 3])
        with pytest.raises(ValueError):
            RationalPolynomial.interpolate([], [])

    def test_format(self):
        p = RationalPolynomial([Fraction(-1), 2, 0, Fraction(3, 4)])
        assert p.format("k") == "-1 + 2*k + 3/4*k^3"
        assert RationalPolynomial([0, -1]).format() == "-k"
        assert str(RationalPolynomial()) == "0"

    def test_float_evaluation(self):
        assert RationalPolynomial([1, 1])(0.5) == pytest.approx(1.5)
