"""Explicit bound formulas and the covering set of weight tuples.

The large bounds are only ever handled through their natural logarithms.
Where the exponent is an exact rational it is kept in the rational part of a
LogHeight, so nothing like exp(2^28) is ever materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import mpmath

from .logheight import DEFAULT_PREC, LogHeight, log_integer, log_rational


def _delta(delta) -> Fraction:
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return delta


def _loglog_term(x: int, prec: int) -> LogHeight:
    """log(log x * log log x) for an integer x >= 4."""
    with mpmath.workprec(prec + 32):
        lx = mpmath.log(x)
        val = mpmath.log(lx * mpmath.log(lx))
        err = (abs(val) + 1) * mpmath.ldexp(1, -(prec - 4))
    return LogHeight(arch=val, err=err)


@dataclass(frozen=True)
class TheoremInputs:
    n: int
    N: int
    d: int
    s: int
    C: int
    Delta: int
    delta: Fraction

    def __post_init__(self):
        if not 1 <= self.n <= self.N:
            raise ValueError("need 1 <= n <= N")
        if min(self.d, self.s, self.C, self.Delta) < 1:
            raise ValueError("d, s, C, Delta must be positive")
        object.__setattr__(self, "delta", _delta(self.delta))


def A2(n: int, d: int, Delta: int, delta) -> Fraction:
    return Fraction((8 * n + 6) * (n + 2) ** 2 * d * Delta ** (n + 1)) / _delta(delta)


def bounds_A(t: TheoremInputs, h_X: LogHeight | None = None,
             h_f: LogHeight | None = None, prec: int = DEFAULT_PREC) -> dict:
    """log A1, A2, log A3 and H for the given data.

    ``h_X`` and ``h_f`` (the largest h(1, f_i)) default to zero; H is only
    assembled from them.
    """
    n, d, s, C, Dl, delta = t.n, t.d, t.s, t.C, t.Delta, t.delta
    expo1 = Fraction(2) ** (12 * n + 16) * n ** (4 * n) * delta ** (-2 * n) \
        * d ** (2 * n + 2) * Fraction(Dl) ** (n * (2 * n + 2))
    logA1 = log_rational(Fraction(20 * n) / delta, prec) * ((n + 1) * s) \
        + LogHeight(rational=expo1) + _loglog_term(4 * C, prec)
    coeff3 = Fraction(2) ** (6 * n + 20) * n ** (2 * n + 3) * delta ** (-n - 1) \
        * d ** (n + 2) * Fraction(Dl) ** (n * (n + 2))
    # log A3 = coeff3 * log(2Cs): stored as a scaled prime part
    logA3 = log_integer(2 * C * s, prec) * coeff3
    H = log_integer(2 * t.N, prec) + (h_X or LogHeight()) + (h_f or LogHeight())
    return {"logA1": logA1, "A2": A2(n, d, Dl, delta), "logA3": logA3, "H": H}


def bounds_B(n: int, D: int, R: int, delta, prec: int = DEFAULT_PREC) -> dict:
    """log B1, B2, log B3 for an n-dimensional Y of degree D in P^R."""
    delta = _delta(delta)
    if n < 1 or D < 1 or R < n:
        raise ValueError("need n >= 1, D >= 1, R >= n")
    expo1 = Fraction(2) ** (10 * n + 4) * delta ** (-2 * n) * Fraction(D) ** (2 * n + 2)
    logB1 = LogHeight(rational=expo1) + _loglog_term(4 * R, prec)
    B2 = Fraction(4 * n + 3) * D / delta
    coeff3 = Fraction(2) ** (5 * n + 4) * delta ** (-n - 1) * Fraction(D) ** (n + 2)
    logB3 = log_integer(4 * R, prec) * coeff3
    return {"logB1": logB1, "B2": B2, "logB3": logB3}


def m_from_delta(n: int, D: int, delta) -> int:
    """m = floor((4n+3) D / delta)."""
    return math.floor(Fraction(4 * n + 3) * D / _delta(delta))


def primed_parameters(t: TheoremInputs) -> dict:
    """Substitutions used to pass from the twisted-height bounds to the polynomial ones."""
    return {
        "delta": t.delta / (2 * (t.n + 2) ** 2),
        "R": t.C * (t.n + 1) * t.s - 1,
        "D": t.d * t.Delta ** t.n,
    }


def bounds_B_primed(t: TheoremInputs, prec: int = DEFAULT_PREC) -> dict:
    p = primed_parameters(t)
    return bounds_B(t.n, p["D"], max(p["R"], t.n), p["delta"], prec)


def check_B2_identity(t: TheoremInputs) -> bool:
    """B2' * Delta == A2, exactly."""
    return bounds_B_primed(t)["B2"] * t.Delta == A2(t.n, t.d, t.Delta, t.delta)


def check_B1T_le_A1(t: TheoremInputs, prec: int = DEFAULT_PREC):
    """Compare log(B1' T) with log A1 where T bounds the number of systems."""
    p = primed_parameters(t)
    R = max(p["R"], 1)
    expo = Fraction(2) ** (10 * t.n + 4) * Fraction(2 * (t.n + 2) ** 2) ** (2 * t.n) \
        * t.delta ** (-2 * t.n) * Fraction(p["D"]) ** (2 * t.n + 2)
    logB1p = LogHeight(rational=expo) + _loglog_term(4 * (R + 1), prec)
    logT = log_rational(Fraction(17 * t.n) / t.delta, prec) * ((t.n + 1) * t.s - 1)
    logA1 = bounds_A(t, prec=prec)["logA1"]
    return (logA1 - logB1p - logT).sign(prec)


def systems_bound(n: int, s: int, delta) -> Fraction:
    """(17 n / delta)^((n+1)s - 1)."""
    return (Fraction(17 * n) / _delta(delta)) ** ((n + 1) * s - 1)


def theta_for(n: int, delta) -> Fraction:
    delta = _delta(delta)
    return delta / (2 * n + 2 + 2 * delta)


def to_log10(x: LogHeight) -> float:
    return float(x) / math.log(10)


# -- covering set -----------------------------------------------------------------

def grid_size(q: int, theta: Fraction, tight: bool = False) -> int:
    """Grid denominator M.  The default is ceil(q^2/theta); ``tight`` uses the
    smallest M with M theta/(1-theta) >= 2q-1, which still guarantees coverage."""
    if tight:
        return max(1, math.ceil((2 * q - 1) * (1 - theta) / theta))
    return math.ceil(Fraction(q * q) / theta)


class CoveringSet:
    """All tuples (k_1/M, ..., k_q/M) with nonnegative integers summing to M.

    The set is not materialized: membership, size and iteration are computed
    on demand.  ``cover`` returns the member used for a given direction b.
    """

    def __init__(self, q: int, theta, tight: bool = False):
        theta = Fraction(theta)
        if q < 1:
            raise ValueError("q must be positive")
        if not 0 < theta <= Fraction(1, 2):
            raise ValueError(f"theta must lie in (0, 1/2], got {theta}")
        self.q = q
        self.theta = theta
        self.M = grid_size(q, theta, tight)

    def size(self) -> int:
        return math.comb(self.M + self.q - 1, self.q - 1)

    def __len__(self) -> int:
        return self.size()

    def reference_bound(self) -> float:
        """(e/theta)^(q-1) as a float."""
        return (math.e / float(self.theta)) ** (self.q - 1)

    def __contains__(self, c) -> bool:
        c = [Fraction(x) for x in c]
        return (len(c) == self.q and sum(c) == 1 and all(x >= 0 for x in c)
                and all((x * self.M).denominator == 1 for x in c))

    def __iter__(self) -> Iterator[tuple]:
        def rec(prefix, left, slots):
            if slots == 1:
                yield prefix + (left,)
                return
            for k in range(left, -1, -1):
                yield from rec(prefix + (k,), left - k, slots - 1)

        for ks in rec((), self.M, self.q):
            yield tuple(Fraction(k, self.M) for k in ks)

    def cover_units(self, ks: Sequence[int], denom: int) -> tuple:
        """Grid numerators (over M) for the direction b = ks/denom, sum(ks) = denom."""
        if len(ks) != self.q or sum(ks) != denom or any(k < 0 for k in ks):
            raise ValueError("direction must be a nonnegative vector summing to 1")
        M = self.M
        tn, td = self.theta.numerator, self.theta.denominator
        base = [(M * k) // denom for k in ks]
        # largest units allowed: c_j (1 - theta) <= b_j
        cap = [(M * k * td) // (denom * (td - tn)) for k in ks]
        deficit = M - sum(base)
        out = list(base)
        for j in range(self.q):
            if deficit == 0:
                break
            room = cap[j] - out[j]
            take = min(room, deficit)
            if take > 0:
                out[j] += take
                deficit -= take
        if deficit:
            raise AssertionError("covering construction ran out of room")
        return tuple(out)

    def cover(self, b: Sequence) -> tuple:
        """A member c with c_j (1 - theta) <= b_j for all j (b >= 0, sum b = 1)."""
        b = [Fraction(x) for x in b]
        den = math.lcm(*(x.denominator for x in b))
        ks = [int(x * den) for x in b]
        return tuple(Fraction(u, self.M) for u in self.cover_units(ks, den))

    def select(self, A: Sequence, Lam) -> tuple:
        """Member c with A_j <= -c_j (1 - theta) Lambda for every j."""
        A = [Fraction(a) for a in A]
        Lam = Fraction(Lam)
        if any(a > 0 for a in A):
            raise ValueError("not a solution: some A_j is positive")
        total = sum(A)
        if Lam <= 0 or total > -Lam:
            raise ValueError("not a solution: sum A_j exceeds -Lambda")
        return self.cover([a / total for a in A])


def covering_set(q: int, theta, tight: bool = False) -> CoveringSet:
    return CoveringSet(q, theta, tight)


def covered(c: Sequence, A: Sequence, Lam, theta) -> bool:
    theta = Fraction(theta)
    return all(Fraction(a) <= -Fraction(cj) * (1 - theta) * Fraction(Lam) for a, cj in zip(A, c))


def split_into_systems(A: Mapping, Lam, n: int, s: int, delta, tight: bool = False) -> dict:
    """Assign to one solution the weights c_{i,v} of its covering tuple.

    ``A`` maps (place label, i) to the nonpositive log ratio; ``Lam`` is
    (n + 1 + delta) Delta h(x).
    """
    keys = sorted(A, key=str)
    W = CoveringSet(len(keys), theta_for(n, delta), tight)
    c = W.select([A[k] for k in keys], Lam)
    return dict(zip(keys, c))
