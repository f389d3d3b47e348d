import cmath
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tagcalc.coeff import Coeff, I, ONE, SQRT2, TWO_PI, ZERO, as_coeff, format_coeff
from tagcalc.dsl import parse

rationals = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 1000)
coeffs = st.builds(Coeff, rationals, rationals, st.integers(-2, 2), st.integers(0, 1))
nonzero = coeffs.filter(lambda c: not c.is_zero())


def test_sqrt2_squares_to_two():
    assert SQRT2 * SQRT2 == Coeff(2)


def test_inverse_sqrt2_is_half_sqrt2():
    assert SQRT2.inverse() == Coeff(Fraction(1, 2), 0, 0, 1)


def test_two_pi_inverse():
    assert TWO_PI * TWO_PI.inverse() == ONE


def test_i_squared():
    assert I * I == -ONE


def test_mixed_shape_addition_refused():
    with pytest.raises(ValueError):
        ONE + SQRT2


def test_float_reads_as_decimal():
    assert as_coeff(0.5) == Coeff(Fraction(1, 2))
    assert as_coeff(0.1) == Coeff(Fraction(1, 10))


def test_zero_inverse():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


@given(coeffs, coeffs)
def test_product_matches_complex(a, b):
    assert cmath.isclose(complex(a * b), complex(a) * complex(b), rel_tol=1e-12, abs_tol=1e-12)


@given(nonzero)
def test_inverse_is_inverse(c):
    assert c * c.inverse() == ONE


@given(coeffs)
def test_conj_matches_complex(c):
    assert cmath.isclose(complex(c.conj()), complex(c).conjugate(), rel_tol=1e-12, abs_tol=1e-12)


@given(coeffs, coeffs, coeffs)
def test_multiplication_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(coeffs)
def test_format_reparses(c):
    e = parse(format_coeff(c)).canonical()
    got = e.terms[0].coeff if e.terms else ZERO
    assert got == c
