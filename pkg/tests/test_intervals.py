import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchsys.intervals import (
    Affine,
    Bundle,
    InexactError,
    LInterval,
    MapError,
    PiecewiseMap,
    Power,
    UnsupportedComposition,
    compose,
    compose_pieces,
    full,
    identity,
    invert,
    measure,
    power,
    radon_nikodym,
    rational_power,
)
from branchsys.scalars import Monomial, Scalar


def pm(*pieces):
    return PiecewiseMap(pieces)


def test_powers_compose_by_multiplying_exponents():
    sq = pm(Power("x", "x", F(1, 2)))
    assert compose(sq, sq) == pm(Power("x", "x", F(1, 4)))


def test_square_after_root_is_identity():
    f = compose(pm(Power("x", "x", 2)), pm(Power("x", "x", F(1, 2))))
    assert f.is_identity
    assert f == identity(Bundle([full("x")]))


def test_affine_composition_slope():
    a = Affine(full("x"), LInterval("x", 0, F(1, 2)))
    b = Affine(LInterval("x", 0, F(1, 2)), LInterval("x", F(1, 2), F(3, 4)))
    c = compose_pieces(b, a)
    assert c.slope == F(1, 4) and c.target == LInterval("x", F(1, 2), F(3, 4))


def test_piecewise_composition():
    halves = pm(
        Affine(full("a"), LInterval("d", 0, F(1, 2))),
        Affine(full("b"), LInterval("d", F(1, 2), 1)),
    )
    shrink = pm(Affine(full("d"), LInterval("c", 0, F(1, 2))))
    h = compose(shrink, halves)
    assert h("a", F(1)) == ("c", F(1, 4))
    assert h("b", F(1, 2)) == ("c", F(3, 8))
    assert all(p.slope == F(1, 4) for p in h.pieces)


def test_compose_domain_mismatch():
    with pytest.raises(MapError):
        compose(pm(Affine(full("a"), full("b"))), pm(Affine(full("c"), full("d"))))


def test_inverses():
    assert invert(pm(Affine(full("x"), full("x")))).is_identity
    assert invert(pm(Power("x", "y", F(1, 2)))) == pm(Power("y", "x", 2))
    a = Affine(full("x"), LInterval("y", F(1, 3), F(2, 3)))
    b = a.inverse()
    assert b.slope == 3 and b.source == LInterval("y", F(1, 3), F(2, 3)) and b.target == full("x")


def test_power_one_is_relabel():
    assert isinstance(power("a", "b", 1), Affine)
    assert pm(Power("a", "b", 1)).pieces[0].is_relabel


def test_power_only_on_full_intervals():
    with pytest.raises(UnsupportedComposition):
        Power("x", "x", 2).restrict(LInterval("x", 0, F(1, 2)))


def test_rational_power():
    assert rational_power(F(1, 4), F(1, 2)) == F(1, 2)
    assert rational_power(F(8, 27), F(2, 3)) == F(4, 9)
    with pytest.raises(InexactError):
        rational_power(F(1, 2), F(1, 2))
    big = F(1, 2**2001)
    assert rational_power(big * big, F(1, 2)) == big


def test_densities():
    assert radon_nikodym(identity(Bundle([full("x")]))).forward == (Monomial(),)
    d = radon_nikodym(pm(Affine(full("x"), LInterval("y", 0, F(1, 5)))))
    assert d.forward == (Monomial.constant(F(1, 5)),) and d.backward == (Monomial.constant(5),)
    p = radon_nikodym(pm(Power("x", "x", F(3, 2))))
    assert p.forward == (Monomial(Scalar.rational(F(3, 2)), F(1, 2)),)
    assert p.backward == (Monomial(Scalar.rational(F(2, 3)), F(-1, 3)),)
    assert p.chain_rule_holds()


def test_measure():
    assert measure(Bundle([full("e")])) == 1
    assert measure(Bundle()) == 0
    assert measure(Bundle([LInterval("a", 0, F(1, 2)), LInterval("b", F(1, 2), 1)])) == 1


def test_bundle_merging_and_points():
    b = Bundle([LInterval("a", 0, F(1, 3)), LInterval("a", F(1, 3), F(1, 2)), LInterval("c", F(1, 2), 1)])
    assert len(b) == 2
    assert b.contains_point("a", F(1, 2)) and not b.contains_point("a", F(0))
    assert not b.contains_point("c", F(1, 2)) and b.contains_point("c", F(1))
    assert not b.contains_point("b", F(1, 2))


def test_overlapping_targets_rejected():
    with pytest.raises(MapError):
        pm(Affine(full("a"), full("x")), Affine(full("b"), LInterval("x", 0, F(1, 2))))


def test_json_round_trip():
    f = pm(Power("x", "y", F(1, 2)), Affine(LInterval("a", F(1, 3), 1), LInterval("b", 0, F(1, 7))))
    assert PiecewiseMap.from_json(f.to_json()) == f
    b = Bundle([LInterval("a", F(1, 9), F(2, 9))])
    assert Bundle.from_json(b.to_json()) == b


fr = st.fractions(min_value=0, max_value=1, max_denominator=64)


@st.composite
def affines(draw):
    lo, hi = sorted(draw(st.lists(fr, min_size=2, max_size=2, unique=True)))
    lo2, hi2 = sorted(draw(st.lists(fr, min_size=2, max_size=2, unique=True)))
    return Affine(LInterval("s", lo, hi), LInterval("t", lo2, hi2))


@settings(max_examples=200, deadline=None)
@given(affines(), fr)
def test_affine_inverse_round_trip(a, u):
    t = a.source.lo + u * a.source.length
    if t == a.source.lo:
        return
    assert a.inverse()(a(t)) == t
    assert a.target.contains_point("t", a(t))


@settings(max_examples=200, deadline=None)
@given(affines())
def test_affine_chain_rule(a):
    assert radon_nikodym(pm(a)).chain_rule_holds()


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=F(1, 8), max_value=8, max_denominator=8), st.integers(1, 20), st.integers(1, 20))
def test_power_derivative_matches_finite_difference(p, k, n):
    # the closed form p t^(p-1) against a numeric derivative at t = k/(n+k)
    t = k / (n + k)
    dens = Power("x", "x", p).density()
    h = 1e-6 * min(t, 1 - t)
    numeric = ((t + h) ** float(p) - (t - h) ** float(p)) / (2 * h)
    assert math.isclose(dens.evaluate(t).real, numeric, rel_tol=1e-4)
