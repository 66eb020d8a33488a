import json
import math
from fractions import Fraction

import pytest

from chowlab.census import (ConfigError, ExperimentConfig, GuardExceeded, canonical,
                            check_condition_13, check_reduction_estimates, enumerate_points,
                            evaluate_inequality, fit_hypersurfaces, lhs_grouped, lhs_streaming,
                            pell_config, planted_plane_config, primitive_count_oracle,
                            reduce_system, run_census, write_report)
from chowlab.fields import NumberField
from chowlab.logheight import log_integer, log_rational
from chowlab.poly import HomogeneousPoly, parse_poly
from chowlab.variety import FullSpace, ParametrizedImage, zoo


def config(systems, n=1, delta="1/2", bound=50, **kw):
    data = {"variety": {"type": "projective_space", "n": n}, "systems": systems,
            "delta": delta, "height_bound": bound}
    data.update(kw)
    return ExperimentConfig.from_json(data)


def test_common_zero_examples():
    assert all(check_condition_13(pell_config(10)).values())
    bad = config({"inf": ["x0^2", "x0 x1"]})
    assert not any(check_condition_13(bad).values())
    lin = config({"inf": ["x0", "x1", "x2"]}, n=2)
    assert all(check_condition_13(lin).values())
    meets = config({"inf": ["x0", "x1", "x0 + x1"]}, n=2)
    assert not any(check_condition_13(meets).values())


def test_reduction_examples():
    red = reduce_system(pell_config(10))
    assert red.Delta == 2 and red.R == 1 and red.C == 1
    assert [g.to_text() for g in red.g] == [parse_poly("x0^2 - 2 x1^2").to_text(),
                                            parse_poly("x1^2").to_text()]
    lin = reduce_system(config({"inf": ["x0", "x1", "x0 + x1 + x2"]}, n=2))
    assert lin.Delta == 1 and [g.terms for g in lin.g] == [
        parse_poly(t, 3).terms for t in ("x0", "x1", "x0 + x1 + x2")]
    surd = reduce_system(config({"inf": ["x0 - sqrt(2) x1", "x1"]}))
    assert surd.C == 2 and surd.R == 2 and not surd.rational


def test_reduction_estimates():
    cfg = pell_config(10)
    est = check_reduction_estimates(cfg, reduce_system(cfg))
    assert est["slack_h1"].sign() == 1 and est["slack_hY"].sign() == 1


def test_canonical():
    assert canonical([-2, 4, 6]) == (1, -2, -3)
    assert canonical([0, Fraction(-1, 2), Fraction(1, 3)]) == (0, 3, -2)
    with pytest.raises(ValueError):
        canonical([0, 0])


def test_enumerate_p1():
    pts = set(enumerate_points(FullSpace(1), 2))
    assert pts == {(0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)}


@pytest.mark.parametrize("n,B", [(1, 1), (1, 17), (1, 50), (2, 1), (2, 9), (3, 4)])
def test_enumeration_matches_oracle(n, B):
    pts = list(enumerate_points(FullSpace(n), B))
    assert len(pts) == len(set(pts)) == primitive_count_oracle(n, B)


def test_enumerate_hypersurface_and_image():
    pyth = zoo()["conic"].__class__(parse_poly("x0^2 + x1^2 - x2^2", 3))
    pts = set(enumerate_points(pyth, 5))
    assert (3, 4, 5) in pts and all(a * a + b * b == c * c for a, b, c in pts)
    cubic = zoo()["twisted_cubic"]
    pts = list(enumerate_points(cubic, 27, param_bound=3))
    assert (8, 12, 18, 27) in pts and all(cubic.contains(p) for p in pts)


def test_enumeration_guard():
    with pytest.raises(GuardExceeded):
        list(enumerate_points(FullSpace(3), 10 ** 4))


def test_pell_example():
    cfg = pell_config(10)
    rec = evaluate_inequality((7, 5), cfg)
    assert rec.lhs_log.exact_equal(log_rational(Fraction(5, 49)))
    assert rec.threshold_log.exact_equal(log_integer(7) * Fraction(-5, 2))
    assert rec.margin.sign() == 1 and rec.is_solution is False
    zero = evaluate_inequality((1, 0), cfg)
    assert zero.flagged and zero.is_solution


def test_linear_flags():
    cfg = config({"inf": ["x0", "x1", "x0 + x1 + x2"]}, n=2)
    rec = evaluate_inequality((0, 1, 3), cfg)
    assert rec.flagged and "x0" in rec.flag_reason


def test_two_accumulations_agree():
    cfg = planted_plane_config(16)
    for x in [(4, -4, 1), (3, 5, 7), (16, -16, 1), (1, 2, 5)]:
        a, b = lhs_streaming(cfg, x), lhs_grouped(cfg, x)
        assert a.prime_part == b.prime_part and a.rational == b.rational


def test_quadratic_coefficients():
    cfg = config({"inf": ["x0 - sqrt(2) x1", "x1"]}, bound=20)
    rec = evaluate_inequality((7, 5), cfg)
    assert rec.is_solution is False
    # 17/12 approximates sqrt(2), but the conjugate 17 + 12 sqrt(2) sets the max
    rec = evaluate_inequality((17, 12), cfg)
    assert rec.is_solution is False
    assert abs(float(rec.lhs_log) - (math.log(17 + 12 * math.sqrt(2)) + math.log(12) - 2 * math.log(17))) < 1e-12


def test_fit_examples():
    fit = fit_hypersurfaces([(1, 0, 1), (0, 1, 1), (1, 1, 2)], FullSpace(2), 1)
    assert [f.terms for f in fit.forms] == [parse_poly("x0 + x1 - x2", 3).terms]
    assert fit.verified
    general = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
    assert fit_hypersurfaces(general, FullSpace(2), 1).forms == []
    conic = zoo()["conic"]
    pts = [(1, t, t * t) for t in range(-3, 4)][:4]
    fit = fit_hypersurfaces(pts, conic, 2)
    assert fit.ideal_rank == 1
    for f in fit.forms:
        assert all(f.evaluate(p) == 0 for p in pts)
        assert f.terms != parse_poly("x0 x2 - x1^2", 3).terms


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        config({"inf": ["x0"]})
    with pytest.raises(ConfigError):
        config({"4": ["x0", "x1"]})
    with pytest.raises(ConfigError):
        config({"inf": ["x0", "x1"]}, delta="3/2")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_config_round_trip():
    cfg = planted_plane_config(8)
    again = ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again.to_json() == cfg.to_json()


def test_small_pell_census(tmp_path):
    rep = run_census(pell_config(300))
    assert rep.nontrivial() == []
    assert rep.enumerated == primitive_count_oracle(1, 300)
    assert rep.exit_code == 0
    files = write_report(rep, tmp_path)
    data = json.loads(open(files[0]).read())
    assert data["summary"]["nontrivial_solutions"] == 0


def test_small_planted_census():
    rep = run_census(planted_plane_config(32))
    assert rep.solutions
    assert all(r.margin.sign() <= 0 for r in rep.solutions)
    assert [f.terms for f in rep.fits[0].forms] == [parse_poly("x0 + x1", 3).terms]
    assert all(info["system_ok"] for info in rep.transfers)
