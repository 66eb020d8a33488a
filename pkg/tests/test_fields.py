import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from chowlab.fields import (QQ, FieldElement, NumberField, finite_place, infinite_place,
                            log_abs, places_above, point_height, product_formula_residual,
                            relative_degree)
from chowlab.logheight import LogHeight, UndecidableError, log_integer, log_rational

from conftest import is_exact_zero, random_fraction

FIELDS = [NumberField(d) for d in (-1, 2, 5, -3)]


def test_log_abs_examples():
    assert log_abs(infinite_place(), Fraction(12)).exact_equal(log_integer(12))
    assert log_abs(finite_place(2), Fraction(12)).prime_part == {2: -2}
    K = NumberField(2)
    w = places_above(K, finite_place(2))[0]
    assert w.kind == "ramified"
    assert log_abs(w, K.sqrt_d()).prime_part == {2: Fraction(-1, 2)}


def test_log_of_zero_rejected():
    with pytest.raises(ValueError):
        log_abs(infinite_place(), Fraction(0))


def test_places_above_examples():
    K = NumberField(2)
    split = places_above(K, finite_place(7))
    assert [w.kind for w in split] == ["split", "split"]
    assert [relative_degree(w) for w in split] == [Fraction(1, 2)] * 2
    inert = places_above(K, finite_place(5))
    assert len(inert) == 1 and relative_degree(inert[0]) == 1
    cplx = places_above(NumberField(-1), infinite_place())
    assert len(cplx) == 1 and cplx[0].kind == "complex" and relative_degree(cplx[0]) == 1


@pytest.mark.parametrize("K", FIELDS)
def test_fibre_degrees_sum_to_one(K):
    for p in (2, 3, 5, 7, 11, 13, 97):
        assert sum(relative_degree(w) for w in places_above(K, finite_place(p))) == 1
    assert sum(relative_degree(w) for w in places_above(K, infinite_place())) == 1


def test_point_height_examples():
    assert point_height([3, 4, 5]).exact_equal(log_integer(5))
    assert point_height([Fraction(1, 2), Fraction(1, 3)]).exact_equal(log_integer(3))
    assert is_exact_zero(point_height([1, 1, 1, 1]))
    with pytest.raises(ValueError):
        point_height([0, 0])


def test_product_formula_examples():
    assert is_exact_zero(product_formula_residual(Fraction(6, 5)))
    assert is_exact_zero(product_formula_residual(Fraction(-1)))
    K = NumberField(2)
    r = product_formula_residual(K(1, 1))
    mid, rad = r.enclosure()
    assert abs(mid) <= rad + mpmath.ldexp(1, -224)


@settings(max_examples=200, deadline=None)
@given(st.fractions().filter(lambda q: q != 0))
def test_product_formula_rationals(q):
    assert is_exact_zero(product_formula_residual(q))


@pytest.mark.parametrize("K", FIELDS)
def test_product_formula_quadratic(K, rng):
    for _ in range(40):
        x = K(random_fraction(rng), random_fraction(rng, nonzero=True))
        mid, rad = product_formula_residual(x).enclosure()
        assert abs(mid) <= mpmath.ldexp(1, -224)


@pytest.mark.parametrize("K", FIELDS)
def test_height_scaling_invariance(K, rng):
    for _ in range(20):
        pt = [K(random_fraction(rng), random_fraction(rng)) for _ in range(3)]
        if not any(pt):
            continue
        lam = K(random_fraction(rng, nonzero=True), random_fraction(rng))
        h1 = point_height(pt)
        h2 = point_height([lam * x for x in pt])
        d = h1 - h2
        mid, rad = d.enclosure()
        assert abs(mid) <= rad + mpmath.ldexp(1, -224)


def test_extension_invariance(rng):
    K = NumberField(2)
    for _ in range(30):
        pt = [random_fraction(rng) for _ in range(3)]
        if not any(pt):
            continue
        over_q = point_height(pt)
        over_k = point_height([K(x) for x in pt], field=K)
        mid, rad = (over_q - over_k).enclosure()
        assert abs(mid) <= rad + mpmath.ldexp(1, -224)


def test_height_is_nonnegative(rng):
    for _ in range(50):
        pt = [random_fraction(rng) for _ in range(4)]
        if any(pt):
            assert point_height(pt).sign() in (0, 1)


def test_logheight_error_propagation():
    a = LogHeight(arch=mpmath.mpf("0.5"), err=mpmath.mpf("1e-50"))
    b = LogHeight(arch=mpmath.mpf("0.25"), err=mpmath.mpf("3e-50"))
    assert (a + b).err <= a.err + b.err


def test_exact_signs_are_decided():
    # log 2^10 - log 1000 > 0, decided from the prime parts alone
    x = log_integer(1024) - log_integer(1000)
    assert x.sign() == 1
    assert (log_rational(Fraction(5, 49)) - log_rational(Fraction(5, 49))).sign() == 0


def test_undecidable_float_sign():
    x = LogHeight(arch=mpmath.mpf(0), err=mpmath.mpf("1e-3"))
    assert x.sign() is None
    with pytest.raises(UndecidableError):
        x.sign_strict()


@pytest.mark.parametrize("d", [-1, 2, 5, -3, 17, -7])
def test_finite_valuations_match_hensel(d):
    from chowlab.fields import _finite_valuations, relevant_primes, valuation

    K = NumberField(d)
    rng = random.Random(d)
    for _ in range(60):
        x = K(random_fraction(rng, 200), random_fraction(rng, 200))
        x = x * K(rng.choice([2, 3, 5, 7, 17])) ** rng.randint(0, 3)
        if not x:
            continue
        fast = _finite_valuations(x, K)
        for p in relevant_primes([x]) | {2, 3, 5, 7}:
            for w in places_above(K, finite_place(p)):
                assert fast.get((p, w.index), 0) == valuation(w, x)


@pytest.mark.parametrize("K", FIELDS)
def test_point_height_matches_sum_over_places(K, rng):
    from chowlab.fields import all_places, max_log_abs, relevant_primes

    for _ in range(25):
        pt = [K(random_fraction(rng), random_fraction(rng)) for _ in range(3)]
        pt[0] = pt[0] * K(rng.choice([2, 3, 5, 7]), 1) ** 2
        nonzero = [x for x in pt if x]
        if not nonzero:
            continue
        direct = LogHeight()
        for w in all_places(K, relevant_primes(nonzero)):
            direct = direct + max_log_abs(w, nonzero)
        mid, rad = (point_height(pt) - direct).enclosure()
        assert abs(mid) <= rad + mpmath.ldexp(1, -224)
