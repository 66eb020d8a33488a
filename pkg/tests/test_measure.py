from fractions import Fraction

import pytest

from chowlab.fields import NumberField
from chowlab.logheight import log_integer
from chowlab.measure import (SampleConfig, correction_term, h_star, sphere_integral,
                             verify_measure_bound, verify_lemma_2_2, verify_multiplicativity,
                             verify_remond_identity)
from chowlab.poly import BlockPoly, HomogeneousPoly, parse_poly
from chowlab.variety import FullSpace, LinearSubvariety

from conftest import is_exact_zero, random_form

CFG = SampleConfig(samples=40_000, seed=3)


def within(a, b, tol):
    return abs(a - b) <= tol


def test_single_variable_block_is_exact():
    est = sphere_integral(HomogeneousPoly(1, {(1,): 1}), CFG)
    assert abs(est.value) < 1e-12 and est.stderr < 1e-12


def test_z0_on_two_sphere():
    est = sphere_integral(parse_poly("x0", 2), CFG)
    assert within(est.value, -0.25, 3 * est.stderr + 1e-6)


def test_correction_term():
    assert correction_term([2], [1]) == Fraction(1, 4)
    assert correction_term([2], [1], "full") == Fraction(1, 2)
    assert correction_term([3, 1], [2, 5]) == Fraction(3, 4)


def test_determinism():
    f = parse_poly("x0 + 2*x1 - x2")
    assert sphere_integral(f, CFG) == sphere_integral(f, CFG)


def test_jobs_do_not_change_estimate():
    f = parse_poly("x0 + 2*x1 - x2")
    cfg = SampleConfig(samples=3 * 65_536 + 17, seed=5)
    par = SampleConfig(samples=cfg.samples, seed=5, jobs=3)
    a, b = sphere_integral(f, cfg), sphere_integral(f, par)
    assert abs(a.value - b.value) < 1e-12


def test_stderr_scaling():
    f = parse_poly("x0 + x1")
    small = sphere_integral(f, SampleConfig(10_000, 11)).stderr
    big = sphere_integral(f, SampleConfig(40_000, 11)).stderr
    assert 1.7 <= small / big <= 2.3


def test_h_star_examples():
    r = verify_measure_bound(parse_poly("x0 + x1"), CFG)
    assert r["ok"] and abs(r["bound"] - 0.6931471805599453) < 1e-12
    r = verify_measure_bound(parse_poly("x0", 2), CFG)
    assert r["ok"] and r["h1"] == 0
    r = verify_multiplicativity([parse_poly("x0 + x1")] * 2, CFG)
    assert r["ok"]


def test_h_star_adds_finite_part():
    a = h_star(parse_poly("x0 + x1"), CFG)
    b = h_star(parse_poly("6*x0 + 6*x1"), CFG)
    # scaling by 6 changes m(f) by log 6 and the finite part by -log 6
    assert abs(a.value - b.value) < 1e-9


def test_h_star_quadratic_coefficients():
    K = NumberField(2)
    f = HomogeneousPoly(2, {(1, 0): K(1, 1), (0, 1): 1})
    assert verify_measure_bound(f, CFG)["ok"]


def test_mahler_norm_comparison(rng):
    # log||f||_1 - log A <= m(f) <= log||f||_1 + log A with A = prod (l_h+1)^deg_h
    import math
    for _ in range(5):
        f = random_form(rng, 3, 2, nterms=4)
        est = sphere_integral(f, CFG)
        l1 = math.log(sum(abs(float(c)) for c in f.terms.values()))
        logA = 2 * math.log(3)
        tol = 3 * est.stderr + 1e-6
        assert est.value <= l1 + logA + tol and l1 <= est.value + logA + tol


def test_block_polynomial():
    # u0 v1 - u1 v0 on S(2) x S(2)
    F = BlockPoly([2, 2], {(1, 0, 0, 1): 1, (0, 1, 1, 0): -1})
    r = verify_measure_bound(F, CFG)
    assert r["ok"]


def test_product_h1_examples():
    f = parse_poly("x0 + x1")
    r = verify_lemma_2_2([f, f])
    assert is_exact_zero(r["left_slack"])
    assert r["right_slack"].exact_equal(log_integer(16))
    assert verify_lemma_2_2([f])["ok"]


def test_product_h1_random(rng):
    for _ in range(30):
        fs = [random_form(rng, 3, rng.randint(1, 2), nterms=3) for _ in range(2)]
        assert verify_lemma_2_2(fs)["ok"]


def test_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        sphere_integral(HomogeneousPoly(2, {}), CFG)


@pytest.mark.parametrize("X,delta", [(FullSpace(1), 1), (FullSpace(1), 2),
                                     (LinearSubvariety([[1, 0], [0, 1], [1, 1]]), 2)])
def test_remond_identity(X, delta):
    cfg = SampleConfig(samples=100_000, seed=9, normalization="full")
    assert verify_remond_identity(X, delta, cfg)["ok"]


def test_printed_normalization_gap():
    r = verify_remond_identity(FullSpace(1), 2, SampleConfig(100_000, 9))
    assert not r["ok"] and abs(r["difference"] - 0.5) < 0.05
