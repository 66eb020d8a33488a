import random
from fractions import Fraction
from math import comb

import pytest

from chowlab.poly import parse_poly
from chowlab.variety import (FullSpace, Hypersurface, LinearSubvariety, ParametrizedImage,
                             PresentationError, SizeGuardError, degree_dimension,
                             hilbert_function, hilbert_weight, hilbert_weight_bruteforce,
                             ideal_piece, optimal_support, variety_from_json, zoo)

ZOO = zoo()


def random_weights(rng, size, den=6):
    return [Fraction(rng.randint(0, den), den) for _ in range(size)]


def test_ideal_piece_examples():
    assert ideal_piece(FullSpace(2), 3).rank == 0
    assert ideal_piece(FullSpace(2), 3).hilbert == 10
    conic = ideal_piece(ZOO["conic"], 3)
    assert conic.rank == 3 and conic.hilbert == 7
    cubic = ideal_piece(ZOO["twisted_cubic"], 2)
    assert cubic.rank == 3 and cubic.hilbert == 7


def test_ideal_rows_vanish_on_points():
    Y = ZOO["twisted_cubic"]
    piece = ideal_piece(Y, 2)
    for t in [(1, 2), (3, -1), (2, 5)]:
        y = Y.image(t)
        for row in piece.basis:
            total = sum(c * _mono(mon, y) for c, mon in zip(row, piece.monomials))
            assert total == 0


def _mono(mon, y):
    out = 1
    for a, e in zip(y, mon):
        out *= Fraction(a) ** e
    return out


def test_hilbert_functions():
    for m in range(1, 6):
        assert hilbert_function(FullSpace(3), m) == comb(m + 3, 3)
        assert hilbert_function(ZOO["conic"], m) == 2 * m + 1
        assert hilbert_function(ZOO["twisted_cubic"], m) == 3 * m + 1
        assert hilbert_function(ZOO["quadric"], m) == (m + 1) ** 2


def test_hypersurface_matches_kernel_computation():
    # the conic as the image of P^1 under the Veronese map
    param = ParametrizedImage([parse_poly(s, 2) for s in ("x0^2", "x0 x1", "x1^2")])
    for m in range(1, 5):
        assert hilbert_function(param, m) == hilbert_function(ZOO["conic"], m)


def test_chardin_bound():
    for Y in ZOO.values():
        n, D = degree_dimension(Y)
        for m in range(1, 6):
            assert hilbert_function(Y, m) <= D * comb(m + n, n)


def test_degree_dimension():
    assert degree_dimension(ZOO["twisted_cubic"]) == (1, 3)
    assert degree_dimension(ZOO["conic"]) == (1, 2)
    assert degree_dimension(FullSpace(3)) == (3, 1)
    assert degree_dimension(ZOO["quadric"]) == (2, 2)
    assert degree_dimension(LinearSubvariety([[1, 0], [0, 1], [1, 1]])) == (1, 1)


def test_fibre_degree_flagged():
    # t -> (t0^2, t1^2) is 2-to-1 onto P^1
    Y = ParametrizedImage([parse_poly("x0^2", 2), parse_poly("x1^2", 2)])
    assert Y.fibre_degree == 2
    assert degree_dimension(Y) == (1, 1)


def test_common_zero_rejected():
    with pytest.raises(PresentationError):
        ParametrizedImage([parse_poly("x0^2", 2), parse_poly("x0 x1", 2)])


def test_hilbert_weight_examples():
    s, mons = hilbert_weight(FullSpace(1), 2, [1, 0])
    assert s == 3 and mons == [(2, 0), (1, 1), (0, 2)]
    assert hilbert_weight(FullSpace(1), 2, [1, 1])[0] == 6
    s, mons = hilbert_weight(ZOO["conic"], 1, [1, 0, 0])
    assert s == 1 and len(mons) == 3
    assert optimal_support(FullSpace(1), 2, [1, 0]) == [0, 1, 2]
    assert optimal_support(ZOO["conic"], 1, [1, 0, 0]) == [0, 1, 2]


def test_conic_weight_avoids_ideal():
    # y0 y2 = y1^2 on the conic, so y0y2 and y1^2 cannot both be chosen
    s, mons = hilbert_weight(ZOO["conic"], 2, [0, 1, 0])
    assert s == 4
    assert not ((1, 0, 1) in mons and (0, 2, 0) in mons)


def test_normalized_weight_at_one():
    for Y in ZOO.values():
        for m in range(1, 4):
            s, _ = hilbert_weight(Y, m, [1] * (Y.R + 1))
            assert s == m * hilbert_function(Y, m)


def test_greedy_matches_bruteforce(rng):
    cases = [(FullSpace(1), m) for m in (1, 2, 3, 5)] + [
        (FullSpace(2), 2), (ZOO["conic"], 2), (ZOO["conic"], 3),
        (ZOO["twisted_cubic"], 2), (ZOO["quadric"], 2)]
    for Y, m in cases:
        for _ in range(5):
            c = random_weights(rng, Y.R + 1)
            assert hilbert_weight(Y, m, c)[0] == hilbert_weight_bruteforce(Y, m, c)


def test_bruteforce_guard():
    with pytest.raises(SizeGuardError):
        hilbert_weight_bruteforce(FullSpace(2), 4, [0, 0, 0])


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        hilbert_weight(FullSpace(1), 2, [1, -1])


def test_from_json():
    assert isinstance(variety_from_json({"type": "projective_space", "n": 2}), FullSpace)
    Y = variety_from_json({"type": "hypersurface", "poly": "x0 x2 - x1^2", "nvars": 3})
    assert isinstance(Y, Hypersurface) and Y.contains([1, 2, 4])
    L = variety_from_json({"type": "linear", "psi": [[1, 0], [0, 1], [1, 1]]})
    assert L.contains([1, 2, 3]) and not L.contains([1, 2, 4])
    P = variety_from_json({"type": "parametrized", "components": ["x0^2", "x0 x1", "x1^2"]})
    assert P.contains([4, 6, 9])
    with pytest.raises(ValueError):
        variety_from_json({"type": "grassmannian"})
