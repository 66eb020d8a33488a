import random
from fractions import Fraction
from itertools import combinations

import pytest

from chowlab.chow import (UnsupportedVariety, admissible_subsets, check_modified_form_heights,
                          check_defining_property, check_delta_form_height, chow_form, chow_weight,
                          coordinate_subset_check, delta_chow_form, modified_chow_form,
                          normalized_chow_weight, variety_height, verify_lemma_3_1,
                          verify_prop_2_5, verify_hilbert_chow_weights)
from chowlab.logheight import log_integer
from chowlab.poly import parse_poly
from chowlab.variety import (FullSpace, LinearSubvariety, ParametrizedImage, degree_dimension,
                             zoo)

ZOO = zoo()


def random_weights(rng, size, den=7):
    return [Fraction(rng.randint(0, den), den) for _ in range(size)]


def test_p1_form():
    F = chow_form(FullSpace(1))
    # u0^(0) u1^(1) - u1^(0) u0^(1), up to sign
    assert set(F.body.terms) == {(1, 0, 0, 1), (0, 1, 1, 0)}
    assert sorted(F.body.terms.values()) == [-1, 1]


@pytest.mark.parametrize("name", list(ZOO))
def test_block_degrees(name):
    Y = ZOO[name]
    n, D = degree_dimension(Y)
    F = chow_form(Y)
    assert F.body.block_degrees() == (D,) * (n + 1)


def test_twisted_cubic_degree():
    assert chow_form(ZOO["twisted_cubic"]).degree == 3


def test_chow_weight_examples(rng):
    for n in range(1, 4):
        F = chow_form(FullSpace(n))
        for _ in range(10):
            c = random_weights(rng, n + 1)
            assert chow_weight(F, c) == sum(c)
    conic = chow_form(ZOO["conic"])
    assert chow_weight(conic, [1, 0, 0]) == 2
    assert chow_weight(conic, [0, 0, 0]) == 0


def test_normalized_weight_examples():
    assert normalized_chow_weight(FullSpace(1), [1, 0]) == Fraction(1, 2)
    assert normalized_chow_weight(ZOO["conic"], [1, 0, 0]) == Fraction(1, 2)
    for Y in ZOO.values():
        assert normalized_chow_weight(Y, [1] * (Y.R + 1)) == 1


def test_fibre_power_cancels(rng):
    single = ParametrizedImage([parse_poly(s, 2) for s in ("x0^2", "x0 x1", "x1^2")])
    double = ParametrizedImage([parse_poly(s, 2) for s in ("x0^4", "x0^2 x1^2", "x1^4")])
    assert double.fibre_degree == 2
    for _ in range(10):
        c = random_weights(rng, 3)
        assert normalized_chow_weight(single, c) == normalized_chow_weight(double, c)


@pytest.mark.parametrize("name", list(ZOO))
def test_defining_property(name):
    r = check_defining_property(ZOO[name], trials=100, seed=1)
    assert r["mismatches"] == 0 and r["vanishing"] > 0


def test_coordinate_subsets():
    conic = ZOO["conic"]
    assert coordinate_subset_check(conic, (0, 2))
    assert not coordinate_subset_check(conic, (0, 1))
    assert coordinate_subset_check(FullSpace(1), (0, 1))
    assert admissible_subsets(conic) == [(0, 2)]


def test_subset_weight_examples(rng):
    assert verify_lemma_3_1(ZOO["conic"], [1, 0, 0], (0, 2)) == 0
    c = random_weights(rng, 3)
    assert verify_lemma_3_1(FullSpace(2), c, (0, 1, 2)) == 0
    assert verify_lemma_3_1(ZOO["twisted_cubic"], [1, 0, 0, 0], (0, 3)) >= 0
    with pytest.raises(ValueError):
        verify_lemma_3_1(ZOO["conic"], [1, 0, 0], (0, 1))


def test_subset_weight_random(rng):
    for Y in ZOO.values():
        for I in admissible_subsets(Y):
            for _ in range(5):
                assert verify_lemma_3_1(Y, random_weights(rng, Y.R + 1), I) >= 0


def test_hilbert_chow_weights_sample(rng):
    for Y in ZOO.values():
        n, D = degree_dimension(Y)
        for m in (D + 1, D + 3):
            for _ in range(3):
                assert verify_hilbert_chow_weights(Y, m, random_weights(rng, Y.R + 1)) >= 0


def test_delta_chow_form_of_p1():
    F = delta_chow_form(FullSpace(1), 2)
    assert F.degree == 2 and F.R == 2
    conic_from_p1 = chow_form(ParametrizedImage(
        [parse_poly(s, 2) for s in ("x0^2", "x0 x1", "x1^2")]))
    assert F.body.terms == conic_from_p1.body.terms


def test_modified_form_coefficients():
    G = modified_chow_form(FullSpace(1), 2)
    assert G.body.block_degrees() == (2, 2)
    F = delta_chow_form(FullSpace(1), 2)
    # u_(x0x1) enters with beta = 2 in each block, so sqrt(2)^2 appears
    mon = (1, 1, 0, 0, 1, 1)
    assert F.body.terms[mon] == -1
    assert G.body.terms[mon].r == -2 and G.body.terms[mon].k == 1


def test_height_estimates():
    for delta in (1, 2, 3):
        assert check_modified_form_heights(FullSpace(1), delta).sign() in (0, 1)
        assert check_delta_form_height(FullSpace(1), delta).sign() in (0, 1)
    line = LinearSubvariety([[1, 0], [0, 1], [1, 1]])
    assert check_delta_form_height(line, 2).sign() in (0, 1)


def test_variety_heights():
    assert variety_height(FullSpace(2)).sign() == 0
    # (a0 b2 - a2 b0)^2 contributes the coefficient -2
    assert variety_height(ZOO["conic"]).exact_equal(log_integer(2))


def test_composed_height_bound():
    X = FullSpace(1)
    veronese = [parse_poly(s, 2) for s in ("x0^2", "x0 x1", "x1^2")]
    assert verify_prop_2_5(X, veronese).sign() == 1
    other = [parse_poly("x0^2", 2), parse_poly("x0 x1 + x1^2"), parse_poly("x1^2", 2)]
    assert verify_prop_2_5(X, other).sign() in (0, 1)
    with pytest.raises(ValueError):
        verify_prop_2_5(X, [parse_poly("x0^2", 2), parse_poly("x0 x1")])


def test_unsupported_delta_form():
    with pytest.raises(UnsupportedVariety):
        delta_chow_form(FullSpace(2), 2)
