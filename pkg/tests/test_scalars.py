import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from branchsys.scalars import ONE, ZERO, Monomial, Scalar, square_split


def test_square_split():
    assert square_split(12) == (2, 3)
    assert square_split(1) == (1, 1)
    assert square_split(49) == (7, 1)


def test_roots_of_unity_multiply_by_adding_phases():
    i = Scalar.root_of_unity(1, 4)
    assert i * i == Scalar.rational(-1)
    assert i * i * i * i == ONE
    assert i.conj() == Scalar.root_of_unity(3, 4)


def test_sqrt_is_exact():
    r = Scalar.sqrt(Fraction(8, 3))
    assert r * r == Scalar.rational(Fraction(8, 3))
    assert Scalar.sqrt(4) == Scalar.rational(2)


def test_zero():
    assert ZERO.is_zero()
    assert (ZERO * Scalar.root_of_unity(1, 8)).is_zero()
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_negative_magnitude_rejected():
    with pytest.raises(ValueError):
        Scalar(Fraction(-1))


phases = st.fractions(min_value=0, max_value=3)
mags = st.fractions(min_value=Fraction(1, 100), max_value=100)
rads = st.integers(min_value=1, max_value=50)


@given(mags, rads, phases, mags, rads, phases)
def test_product_matches_complex(m1, r1, p1, m2, r2, p2):
    a, b = Scalar(m1, r1, p1), Scalar(m2, r2, p2)
    assert cmath.isclose(complex(a * b), complex(a) * complex(b), rel_tol=1e-9)


@given(mags, rads, phases)
def test_inverse_and_conj(m, r, p):
    a = Scalar(m, r, p)
    assert a * a.inverse() == ONE
    assert cmath.isclose(complex(a.conj()), complex(a).conjugate(), rel_tol=1e-9)
    assert (a * a.conj()).phase == 0


@given(mags, rads, phases)
def test_json_round_trip(m, r, p):
    a = Scalar(m, r, p)
    assert Scalar.from_json(a.to_json()) == a


def test_monomial_sqrt_and_substitution():
    m = Monomial(Scalar.rational(4), Fraction(1))
    s = m.sqrt()
    assert s * s == m
    assert m.substitute_power(Fraction(1, 2)).exp == Fraction(1, 2)
    assert math.isclose(m.evaluate(0.25).real, 1.0)
    with pytest.raises(ValueError):
        Monomial(Scalar.root_of_unity(1, 4)).sqrt()
