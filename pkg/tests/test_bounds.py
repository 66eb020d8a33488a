import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from chowlab.bounds import (A2, CoveringSet, TheoremInputs, bounds_A, bounds_B,
                            check_B1T_le_A1, check_B2_identity, covered, m_from_delta,
                            split_into_systems, systems_bound, theta_for)


def test_A2_example():
    assert A2(1, 1, 1, 1) == 126


def test_A1_example():
    t = TheoremInputs(1, 1, 1, 1, 1, 1, Fraction(1))
    logA1 = bounds_A(t)["logA1"]
    with mpmath.workprec(300):
        expected = (2 * mpmath.log(20) + mpmath.mpf(2) ** 28
                    + mpmath.log(mpmath.log(4) * mpmath.log(mpmath.log(4))))
    mid, rad = logA1.enclosure()
    assert abs(mid - expected) <= rad + mpmath.mpf(10) ** -60


def test_B_examples():
    assert bounds_B(1, 1, 1, 1)["B2"] == 7
    assert m_from_delta(1, 2, Fraction(1, 2)) == 28


def test_delta_out_of_range():
    with pytest.raises(ValueError):
        A2(1, 1, 1, 0)
    with pytest.raises(ValueError):
        bounds_B(1, 1, 1, Fraction(3, 2))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(1, 4), st.integers(1, 3),
       st.integers(1, 2), st.integers(1, 4), st.fractions(Fraction(1, 50), 1))
def test_B2_identity(n, extra, d, s, C, Delta, delta):
    t = TheoremInputs(n, n + extra, d, s, C, Delta, delta)
    assert check_B2_identity(t)


def test_monotone_in_delta():
    t1 = TheoremInputs(2, 3, 2, 1, 1, 2, Fraction(1, 2))
    t2 = TheoremInputs(2, 3, 2, 1, 1, 2, Fraction(1, 4))
    a1, a2 = bounds_A(t1), bounds_A(t2)
    assert a2["A2"] > a1["A2"]
    assert (a2["logA1"] - a1["logA1"]).sign() == 1
    assert (a2["logA3"] - a1["logA3"]).sign() == 1
    b1, b2 = bounds_B(2, 3, 5, Fraction(1, 2)), bounds_B(2, 3, 5, Fraction(1, 4))
    assert (b2["logB1"] - b1["logB1"]).sign() == 1 and b2["B2"] > b1["B2"]


def test_B1T_below_A1():
    for n in (1, 2, 3):
        for delta in (Fraction(1), Fraction(1, 3)):
            for s in (1, 3):
                assert check_B1T_le_A1(TheoremInputs(n, n, 2, s, 2, 2, delta)) == 1


def test_systems_bound():
    assert systems_bound(1, 1, 1) == 17
    assert theta_for(1, 1) == Fraction(1, 6)


def test_covering_members():
    W = CoveringSet(1, Fraction(1, 2))
    assert list(W) == [(Fraction(1),)]
    W = CoveringSet(3, Fraction(1, 4))
    members = list(W)
    assert len(members) == W.size()
    assert all(sum(c) == 1 and min(c) >= 0 and c in W for c in members)


def test_covering_random(rng):
    for q in (2, 3, 4):
        for theta in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
            W = CoveringSet(q, theta)
            for _ in range(200):
                ks = [rng.randint(0, 1000) for _ in range(q)]
                if not sum(ks):
                    continue
                b = [Fraction(k, sum(ks)) for k in ks]
                c = W.cover(b)
                assert c in W
                assert covered(c, [-x for x in b], 1, theta)


def test_select_examples():
    W = CoveringSet(1, Fraction(1, 4))
    c = W.select([-10], 10)
    assert c == (1,) and covered(c, [-10], 10, Fraction(1, 4))
    W = CoveringSet(2, Fraction(1, 4))
    c = W.select([-6, -6], 10)
    assert covered(c, [-6, -6], 10, Fraction(1, 4))
    with pytest.raises(ValueError):
        W.select([1, -6], 10)
    with pytest.raises(ValueError):
        W.select([-1, -1], 10)


def test_split_into_systems():
    A = {("inf", 0): Fraction(-3), ("inf", 1): Fraction(-9)}
    c = split_into_systems(A, 10, 1, 1, Fraction(1, 2))
    theta = theta_for(1, Fraction(1, 2))
    assert sum(c.values()) == 1
    assert all(A[k] <= -c[k] * (1 - theta) * 10 for k in A)


def test_tight_grid_is_smaller_and_still_covers(rng):
    W = CoveringSet(3, Fraction(1, 8), tight=True)
    assert W.size() < CoveringSet(3, Fraction(1, 8)).size()
    for _ in range(500):
        ks = [rng.randint(0, 50) for _ in range(3)]
        if sum(ks):
            b = [Fraction(k, sum(ks)) for k in ks]
            assert covered(W.cover(b), [-x for x in b], 1, Fraction(1, 8))
