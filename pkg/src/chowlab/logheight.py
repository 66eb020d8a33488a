"""Logarithms of products of absolute values, kept as exactly as possible.

A :class:`LogHeight` represents the real number

    rational + sum_p e_p * log(p) + arch

where the ``e_p`` are rational exponents of prime logarithms, ``rational`` is an
exact rational constant and ``arch`` is a multiprecision float carrying an
absolute error bound ``err``.  Everything coming from finite places is exact;
only irrational archimedean contributions live in ``arch``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath
from sympy import factorint, isprime

DEFAULT_PREC = 256
MAX_PREC = 4096

# integers above this are only trial-divided before falling back to floats
_FACTOR_LIMIT = 1 << 64
_TRIAL_LIMIT = 1 << 16
# exact sign decisions build integers with at most this many bits
_EXACT_BITS = 1 << 20
# stored floats are combined at this precision so sums stay exact in practice
_ARITH_PREC = MAX_PREC + 64


_ZERO = mpmath.mpf(0)


class UndecidableError(ArithmeticError):
    """A comparison could not be settled at the maximal working precision."""


class LogHeight:
    __slots__ = ("prime_part", "rational", "arch", "err")

    def __init__(self, prime_part: Mapping[int, Fraction] | None = None,
                 rational=0, arch=0, err=0):
        pp = {}
        for p, e in (prime_part or {}).items():
            e = Fraction(e)
            if e:
                pp[int(p)] = e
        self.prime_part = pp
        self.rational = rational if type(rational) is Fraction else Fraction(rational)
        if type(arch) is int and type(err) is int and not arch and not err:
            self.arch = self.err = _ZERO
            return
        with mpmath.workprec(_ARITH_PREC):
            self.arch = mpmath.mpf(arch)
            self.err = mpmath.mpf(err)
        if self.err < 0:
            raise ValueError("negative error bound")

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "LogHeight":
        return cls()

    @classmethod
    def log_prime_power(cls, p: int, e) -> "LogHeight":
        return cls({p: Fraction(e)})

    @classmethod
    def from_float(cls, x, err=0) -> "LogHeight":
        return cls(arch=x, err=err)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogHeight(rational=other)
        if not isinstance(other, LogHeight):
            return NotImplemented
        pp = dict(self.prime_part)
        for p, e in other.prime_part.items():
            pp[p] = pp.get(p, 0) + e
        if self.is_exact and other.is_exact:
            return LogHeight(pp, self.rational + other.rational)
        with mpmath.workprec(_ARITH_PREC):
            return LogHeight(pp, self.rational + other.rational,
                             self.arch + other.arch, self.err + other.err)

    __radd__ = __add__

    def __neg__(self):
        # negating an mpf rounds to the ambient precision
        with mpmath.workprec(_ARITH_PREC):
            return LogHeight({p: -e for p, e in self.prime_part.items()},
                             -self.rational, -self.arch, self.err)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogHeight(rational=other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        k = Fraction(k)
        with mpmath.workprec(_ARITH_PREC):
            kf = mpmath.mpf(k.numerator) / k.denominator
            # the division may round; charge it to the error bound
            slack = abs(self.arch * kf) * mpmath.ldexp(1, -(_ARITH_PREC - 8))
            return LogHeight({p: k * e for p, e in self.prime_part.items()},
                             k * self.rational, self.arch * kf,
                             self.err * abs(kf) + slack)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / Fraction(k))

    # -- inspection -------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        """True when no floating archimedean part is present."""
        return self.arch == 0 and self.err == 0

    def exact_equal(self, other: "LogHeight") -> bool:
        return (self.prime_part == other.prime_part
                and self.rational == other.rational
                and self.arch == other.arch and self.err == other.err)

    def enclosure(self, prec: int = DEFAULT_PREC):
        """Return ``(mid, radius)`` with the true value in ``[mid-radius, mid+radius]``."""
        with mpmath.workprec(prec + 16):
            mid = mpmath.mpf(self.rational.numerator) / self.rational.denominator
            size = abs(mid)
            for p, e in self.prime_part.items():
                term = mpmath.log(p) * e.numerator / e.denominator
                mid += term
                size += abs(term)
            mid += self.arch
            rad = self.err + (size + abs(self.arch) + 1) * mpmath.ldexp(1, -(prec - 4))
        return mid, rad

    def __float__(self):
        return float(self.enclosure(64)[0])

    def value(self, prec: int = DEFAULT_PREC):
        return self.enclosure(prec)[0]

    def _exact_sign(self):
        """Sign of ``sum e_p log p`` by integer comparison, or None if too large."""
        if not self.prime_part:
            return 0
        den = math.lcm(*(e.denominator for e in self.prime_part.values()))
        bits = sum(abs(e) * den * p.bit_length() for p, e in self.prime_part.items())
        if bits > _EXACT_BITS:
            return None
        num, dnm = 1, 1
        for p, e in self.prime_part.items():
            k = int(e * den)
            if k > 0:
                num *= p ** k
            else:
                dnm *= p ** (-k)
        return (num > dnm) - (num < dnm)

    def sign(self, prec: int = DEFAULT_PREC):
        """Three-valued sign: -1, 0, 1, or None when undecidable.

        Exact values (no float part) are always decided, escalating the working
        precision internally as needed.
        """
        if self.is_exact:
            if self.rational == 0:
                s = self._exact_sign()
                if s is not None:
                    return s
            elif not self.prime_part:
                return (self.rational > 0) - (self.rational < 0)
            # a nonzero rational plus logs of primes never vanishes
            p = prec
            while True:
                mid, rad = self.enclosure(p)
                if mid > rad:
                    return 1
                if mid < -rad:
                    return -1
                p *= 2
                if p > 1 << 16:
                    raise UndecidableError("exact sign not resolved")
        mid, rad = self.enclosure(prec)
        if mid > rad:
            return 1
        if mid < -rad:
            return -1
        return None

    def sign_strict(self, prec: int = DEFAULT_PREC) -> int:
        s = self.sign(prec)
        if s is None:
            raise UndecidableError(
                f"sign undecidable at {prec} bits (value ~ {float(self):.3g}, "
                f"error {float(self.err):.3g})")
        return s

    def le(self, other, prec: int = DEFAULT_PREC):
        """Three-valued ``self <= other``: True, False or None."""
        s = (self - other).sign(prec)
        if s is None:
            return None
        return s <= 0

    def lt(self, other, prec: int = DEFAULT_PREC):
        s = (self - other).sign(prec)
        if s is None:
            return None
        return s < 0

    def __repr__(self):
        parts = []
        if self.rational:
            parts.append(str(self.rational))
        for p in sorted(self.prime_part):
            parts.append(f"{self.prime_part[p]}*log({p})")
        if self.arch or self.err:
            parts.append(f"{mpmath.nstr(self.arch, 12)}(+-{mpmath.nstr(self.err, 3)})")
        return "LogHeight(" + (" + ".join(parts) or "0") + ")"

    def to_json(self) -> dict:
        mid, rad = self.enclosure(DEFAULT_PREC)
        return {
            "value": mpmath.nstr(mid, 20),
            "error": mpmath.nstr(rad, 5),
            "prime_part": {str(p): str(e) for p, e in sorted(self.prime_part.items())},
            "rational": str(self.rational),
        }


def log_sum(items: Iterable[LogHeight]) -> LogHeight:
    total = LogHeight()
    for x in items:
        total = total + x
    return total


def log_max(items: Iterable[LogHeight], prec: int = DEFAULT_PREC) -> LogHeight:
    """Maximum of log values with a rigorous error bound.

    Exact inputs are compared exactly; otherwise the candidate with the largest
    midpoint is returned and its error widened to cover near ties.
    """
    items = list(items)
    if not items:
        raise ValueError("max of empty sequence")
    if all(x.is_exact for x in items):
        best = items[0]
        for x in items[1:]:
            if (x - best).sign(prec) > 0:
                best = x
        return best
    encl = [x.enclosure(prec) for x in items]
    j = max(range(len(items)), key=lambda i: encl[i][0])
    mid_j, rad_j = encl[j]
    widen = mpmath.mpf(0)
    for i, (mid, rad) in enumerate(encl):
        if i != j:
            with mpmath.workprec(prec + 16):
                gap = mid + rad - mid_j + rad_j
            if gap > widen:
                widen = gap
    best = items[j]
    if widen == 0:
        return best
    with mpmath.workprec(_ARITH_PREC):
        return LogHeight(best.prime_part, best.rational, best.arch, best.err + widen)


# -- logs of integers and rationals ---------------------------------------

def prime_factors(n: int) -> dict[int, int]:
    """Complete factorization of a nonzero integer (sign ignored)."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor zero")
    return dict(_factor_cached(n))


@lru_cache(maxsize=1 << 16)
def _factor_cached(n: int) -> tuple:
    return tuple((int(p), int(e)) for p, e in factorint(n).items())


def _partial_factor(n: int):
    """Factor ``n`` as far as is cheap; return (factors, cofactor)."""
    if n < _FACTOR_LIMIT:
        return prime_factors(n), 1
    fac = {}
    for p, e in factorint(n, limit=_TRIAL_LIMIT).items():
        p = int(p)
        if p < _TRIAL_LIMIT or isprime(p):
            fac[p] = int(e)
        else:
            return fac, n // math.prod(q ** k for q, k in fac.items())
    return fac, 1


def log_integer(n: int, prec: int = DEFAULT_PREC) -> LogHeight:
    """``log|n|`` for a nonzero integer; exact whenever factoring is cheap."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("log of zero")
    fac, rest = _partial_factor(n)
    if rest == 1:
        return LogHeight(fac)
    with mpmath.workprec(prec + 16):
        arch = mpmath.log(rest)
    return LogHeight(fac, arch=arch, err=abs(arch) * mpmath.ldexp(1, -(prec - 2)))


def log_rational(q, prec: int = DEFAULT_PREC) -> LogHeight:
    q = Fraction(q)
    if q == 0:
        raise ValueError("log of zero")
    return log_integer(q.numerator, prec) - log_integer(q.denominator, prec)


def decide_sign(build, prec: int = DEFAULT_PREC) -> tuple[int, int]:
    """Sign of ``build(p)`` recomputed at doubling precision p until decided.

    Returns (sign, bits used); raises UndecidableError past MAX_PREC.
    """
    p = prec
    while True:
        s = build(p).sign(p)
        if s is not None:
            return s, p
        if p >= MAX_PREC:
            raise UndecidableError(f"sign undecidable at {MAX_PREC} bits")
        p = min(2 * p, MAX_PREC)
