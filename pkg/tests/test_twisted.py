import random
from fractions import Fraction

import pytest

from chowlab.fields import NumberField, QQ, finite_place, infinite_place, point_height
from chowlab.logheight import LogHeight, log_integer
from chowlab.twisted import (E_Y, WeightFamily, calH, calH_calD, dual_twisted_height,
                             dual_weights, linear_span_height, report_to_json,
                             span_isomorphism, twisted_height, verify_lemma_5_4)
from chowlab.variety import FullSpace, zoo

from conftest import is_exact_zero

ZOO = zoo()
INF = infinite_place()


def family(R, **places):
    support = {}
    for key, c in places.items():
        support[INF if key == "inf" else finite_place(int(key[1:]))] = c
    return WeightFamily(support, R)


def test_twisted_height_examples():
    cf = family(1, inf=[1, 0])
    assert twisted_height(4, cf, [1, 1]).exact_equal(log_integer(4))
    assert twisted_height(2, family(1, inf=[0, 1]), [3, 2]).exact_equal(log_integer(4))


def test_q_one_is_height(rng):
    cf = family(2, inf=[Fraction(1, 2), 0, 0], p3=[0, Fraction(1, 3), 0])
    for _ in range(20):
        y = [rng.randint(-30, 30) for _ in range(3)]
        if any(y):
            assert twisted_height(1, cf, y).exact_equal(point_height(y))


def test_field_independence(rng):
    K = NumberField(2)
    cf = family(2, inf=[Fraction(1, 3), 0, Fraction(1, 4)], p5=[0, Fraction(1, 2), 0])
    for _ in range(10):
        y = [rng.randint(-20, 20) for _ in range(3)]
        if not any(y):
            continue
        a = twisted_height(1000, cf, y)
        b = twisted_height(1000, cf, [K(t) for t in y], field=K)
        assert a.prime_part == b.prime_part and a.rational == b.rational
        mid, rad = (a - b).enclosure()
        assert abs(mid) <= rad


def test_monotone_in_q(rng):
    cf = family(2, inf=[Fraction(1, 2), 0, Fraction(1, 5)], p2=[0, Fraction(1, 3), 0])
    for _ in range(10):
        y = [rng.randint(-50, 50) for _ in range(3)]
        if any(y):
            lo, hi = twisted_height(10, cf, y), twisted_height(10 ** 4, cf, y)
            assert (hi - lo).sign() in (0, 1)


def test_weight_family_invariants():
    with pytest.raises(ValueError):
        family(1, inf=[1, 0], p2=[Fraction(1, 2), 0])
    with pytest.raises(ValueError):
        family(1, inf=[-1, 0])
    with pytest.raises(ValueError):
        twisted_height(Fraction(1, 2), family(1, inf=[1, 0]), [1, 1])
    with pytest.raises(ValueError):
        twisted_height(2, family(1, inf=[1, 0]), [0, 0])


def test_E_Y_examples():
    assert E_Y(FullSpace(1), family(1, inf=[1, 0])) == Fraction(1, 2)
    assert E_Y(ZOO["conic"], family(2, inf=[1, 0, 0])) == Fraction(1, 2)
    assert E_Y(FullSpace(1), WeightFamily({}, 1)) == 0


def test_E_Y_lower_bound_on_avoiding_subsets(rng):
    # {y0 = y2 = 0} misses the conic; spread total weight 1 over two places
    conic = ZOO["conic"]
    for _ in range(10):
        a = Fraction(rng.randint(0, 6), 6)
        cf = family(2, inf=[a, 0, a], p2=[1 - a, 0, 1 - a])
        assert E_Y(conic, cf) >= Fraction(1, 2)


def test_dual_weight_examples():
    data = dual_weights(FullSpace(1), 2, family(1, inf=[1, 0]))
    assert data.I[INF] == [0, 1, 2]
    assert [data.d[INF][i] for i in range(3)] == [Fraction(-1, 2), 0, Fraction(1, 2)]
    data = dual_weights(FullSpace(1), 2, family(1, inf=[1, 1]))
    assert set(data.d[INF].values()) == {0}
    data = dual_weights(FullSpace(1), 2, WeightFamily({}, 1))
    assert data.d == {}


def test_dual_weights_sum_to_zero(rng):
    for name in ("P1", "conic", "twisted_cubic"):
        Y = ZOO[name]
        for _ in range(5):
            w = [Fraction(rng.randint(0, 4), 8) for _ in range(Y.R + 1)]
            u = [Fraction(rng.randint(0, 4), 8) for _ in range(Y.R + 1)]
            data = dual_weights(Y, 4, family(Y.R, inf=w, p3=u))
            total = sum(sum(dv.values()) for dv in data.d.values())
            assert total == 0


def test_identity_forms():
    forms = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    data = dual_weights(FullSpace(2), 2, WeightFamily({}, 2))
    data.default_I = [0, 1, 2]
    x = [3, -6, 9]
    assert dual_twisted_height(10 ** 6, data, forms, x).exact_equal(point_height(x))


def test_span_examples():
    span = span_isomorphism(FullSpace(1), 2)
    assert span.n_m == 2 and is_exact_zero(span.log_H)
    assert span.forms == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    span = span_isomorphism(ZOO["conic"], 1)
    assert span.n_m == 2 and is_exact_zero(span.log_H)
    span = span_isomorphism(ZOO["twisted_cubic"], 2)
    assert span.n_m == 6 and span.R_m == 9


def test_span_height_two_ways():
    span = span_isomorphism(ZOO["conic"], 2)
    assert span.log_H.exact_equal(linear_span_height(span))


def test_span_inverts_veronese():
    Y = ZOO["twisted_cubic"]
    span = span_isomorphism(Y, 2)
    y = Y.image([2, 3])
    x = span.coordinates(y)
    for form, mon in zip(span.forms, span.monomials):
        val = sum(a * b for a, b in zip(form, x))
        expected = 1
        for c, e in zip(y, mon):
            expected *= Fraction(c) ** e
        assert val == expected


def test_calH_calD_examples(rng):
    forms = [[1, 0], [0, 1], [1, 1]]
    r = calH_calD(forms, {INF: [0, 1]}, [0, 1])
    assert is_exact_zero(r["log_H"]) and is_exact_zero(r["log_D"])
    for _ in range(30):
        forms = [[rng.randint(-9, 9) for _ in range(2)] for _ in range(4)]
        try:
            r = calH_calD(forms, {INF: [0, 2], finite_place(2): [1, 3]}, [0, 1])
        except ValueError:
            continue
        assert r["ok"]


def test_transfer_example():
    r = verify_lemma_5_4(FullSpace(1), family(1, inf=[1, 0]), Fraction(1, 2), [2, 1], 10 ** 6)
    assert r["status"] == "pass" and r["slack"].sign() in (0, 1)
    out = report_to_json(r)
    assert out["status"] == "pass"


def test_transfer_zero_weights():
    r = verify_lemma_5_4(FullSpace(1), WeightFamily({}, 1), Fraction(1, 2), [2, 1], 10 ** 3)
    assert r["status"] == "pass" and r["slack"].sign() == 0


def test_transfer_hypothesis_guard():
    # a point of large twisted height does not meet the small-height hypothesis
    r = verify_lemma_5_4(FullSpace(1), family(1, inf=[1, 0]), Fraction(1, 2), [10 ** 9, 1], 10)
    assert r["status"] == "pass"
    assert r["conclusion"] == "hypothesis not met"


def test_transfer_rejects_off_variety():
    with pytest.raises(ValueError):
        verify_lemma_5_4(ZOO["conic"], family(2, inf=[1, 0, 0]), 1, [1, 1, 2], 100)
