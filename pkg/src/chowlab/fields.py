"""The rationals and quadratic fields Q(sqrt d), their places and heights.

Absolute values are normalized so that on Q a place above p restricts to
``|.|_p ** ([K_w:Q_p] / [K:Q])`` and an archimedean place to
``|.| ** ([K_w:R] / [K:Q])``; with this choice the product formula holds and
point heights do not depend on the field used to compute them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
from sympy import factorint
from sympy.ntheory import sqrt_mod

from .logheight import DEFAULT_PREC, LogHeight, log_integer, log_rational, prime_factors

MAX_ABS_D = 10 ** 6


class NumberField:
    """Either Q (``d is None``) or Q(sqrt d) with d squarefree, d not in {0, 1}."""

    __slots__ = ("d",)

    def __init__(self, d: int | None = None):
        if d is not None:
            d = int(d)
            if d in (0, 1) or abs(d) > MAX_ABS_D:
                raise ValueError(f"unsupported quadratic field parameter d={d}")
            if any(e > 1 for e in factorint(abs(d)).values()):
                raise ValueError(f"d={d} is not squarefree")
        self.d = d

    @property
    def is_rational(self) -> bool:
        return self.d is None

    @property
    def degree(self) -> int:
        return 1 if self.d is None else 2

    @property
    def discriminant(self) -> int:
        if self.d is None:
            return 1
        return self.d if self.d % 4 == 1 else 4 * self.d

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.d == other.d

    def __hash__(self):
        return hash(("NumberField", self.d))

    def __repr__(self):
        return "QQ" if self.d is None else f"Q(sqrt({self.d}))"

    def __call__(self, a, b=0) -> "FieldElement | Fraction":
        return self.element(a, b)

    def element(self, a, b=0):
        """Canonical element: a Fraction over Q, a FieldElement otherwise."""
        if isinstance(a, FieldElement):
            if b:
                raise ValueError("cannot combine FieldElement with extra component")
            if self.d is None:
                if a.b:
                    raise ValueError(f"{a} is not rational")
                return a.a
            if a.field.d is not None and a.field != self:
                raise ValueError(f"{a} does not lie in {self}")
            return FieldElement(a.a, a.b, self)
        if self.d is None:
            if b:
                raise ValueError("Q has no sqrt component")
            return Fraction(a)
        return FieldElement(a, b, self)

    def sqrt_d(self) -> "FieldElement":
        if self.d is None:
            raise ValueError("Q has no generator sqrt(d)")
        return FieldElement(0, 1, self)


QQ = NumberField()


def field_of(values) -> NumberField:
    """Smallest supported field containing all given scalars."""
    field = QQ
    for x in values:
        if isinstance(x, FieldElement) and x.field.d is not None:
            if field.d is None:
                field = x.field
            elif field != x.field:
                raise ValueError(f"mixed fields {field} and {x.field}")
    return field


class FieldElement:
    """``a + b*sqrt(d)`` with rational a, b."""

    __slots__ = ("a", "b", "field")

    def __init__(self, a, b=0, field: NumberField = QQ):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.field = field
        if field.d is None and self.b:
            raise ValueError("nonzero sqrt component over Q")

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                if other.field.d is None:
                    return FieldElement(other.a, 0, self.field)
                if self.field.d is None:
                    return None
                raise ValueError(f"mixed fields {self.field} and {other.field}")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(other, 0, self.field)
        return NotImplemented

    def _lift(self, other):
        """Promote self when other lives in a quadratic field and self in Q."""
        if isinstance(other, FieldElement) and self.field.d is None and other.field.d is not None:
            return FieldElement(self.a, 0, other.field)
        return self

    def __add__(self, other):
        s = self._lift(other)
        o = s._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(s.a + o.a, s.b + o.b, s.field)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.a, -self.b, self.field)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = self._lift(other)
        o = s._coerce(other)
        if o is NotImplemented:
            return o
        d = s.field.d or 0
        return FieldElement(s.a * o.a + d * s.b * o.b, s.a * o.b + s.b * o.a, s.field)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldElement":
        return FieldElement(self.a, -self.b, self.field)

    def norm(self) -> Fraction:
        d = self.field.d or 0
        return self.a * self.a - d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a if self.field.d is not None else self.a

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in number field")
        c = self.conjugate()
        return FieldElement(c.a / n, c.b / n, self.field)

    def __truediv__(self, other):
        s = self._lift(other)
        o = s._coerce(other)
        if o is NotImplemented:
            return o
        return s * o.inverse()

    def __rtruediv__(self, other):
        return FieldElement(other, 0, self.field) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = FieldElement(1, 0, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, FieldElement):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.field == other.field and self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.field.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        if self.field.d is None or self.b == 0:
            return str(self.a)
        return f"({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}*sqrt({self.field.d}))"

    def to_complex(self, embedding: int = 0) -> complex:
        """Image under the embedding sqrt(d) -> +sqrt(d) (0) or -sqrt(d) (1)."""
        d = self.field.d
        if d is None or self.b == 0:
            return complex(float(self.a))
        sign = 1 if embedding == 0 else -1
        if d > 0:
            return complex(float(self.a) + sign * float(self.b) * math.sqrt(d))
        return complex(float(self.a), sign * float(self.b) * math.sqrt(-d))


def conj(x):
    """Galois conjugation on Q(sqrt d); identity on rationals."""
    if isinstance(x, FieldElement):
        return x.conjugate()
    return x


def as_element(x, field: NumberField) -> FieldElement:
    if isinstance(x, FieldElement):
        if x.field == field or x.field.d is None:
            return FieldElement(x.a, x.b, field)
        raise ValueError(f"{x} not in {field}")
    return FieldElement(x, 0, field)


def scalar_norm(x) -> Fraction:
    return x.norm() if isinstance(x, FieldElement) else Fraction(x)


# -- places ------------------------------------------------------------------

@dataclass(frozen=True)
class Place:
    """A place of ``field``.

    ``p`` is None for archimedean places.  ``kind`` is one of ``real``,
    ``complex``, ``rational`` (a place of Q), ``split``, ``inert`` or
    ``ramified``.  ``index`` distinguishes the two real embeddings or the two
    split places (index 0 uses +sqrt(d), resp. the Hensel root with the smaller
    residue).
    """

    field: NumberField
    p: int | None
    kind: str
    index: int = 0

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    @property
    def local_degree(self) -> int:
        if self.kind in ("complex", "inert", "ramified"):
            return 2
        return 1

    @property
    def weight(self) -> Fraction:
        """``[K_w:Q_v] / [K:Q]``, the exponent normalizing this place."""
        return Fraction(self.local_degree, self.field.degree)

    def below(self) -> "Place":
        return Place(QQ, self.p, "rational" if self.p else "real")

    def __repr__(self):
        where = "inf" if self.p is None else str(self.p)
        return f"Place({self.field}, {where}, {self.kind}#{self.index})"

    def label(self) -> str:
        where = "inf" if self.p is None else str(self.p)
        if self.field.d is None:
            return where
        return f"{where}:{self.kind}:{self.index}"


def infinite_place(field: NumberField = QQ) -> Place:
    return archimedean_places(field)[0]


def finite_place(p: int) -> Place:
    """The place of Q attached to the prime p."""
    return Place(QQ, int(p), "rational")


def archimedean_places(field: NumberField) -> list[Place]:
    if field.d is None:
        return [Place(field, None, "real")]
    if field.d > 0:
        return [Place(field, None, "real", 0), Place(field, None, "real", 1)]
    return [Place(field, None, "complex")]


def splitting_type(field: NumberField, p: int) -> str:
    d = field.d
    if field.discriminant % p == 0:
        return "ramified"
    if p == 2:
        return "split" if d % 8 == 1 else "inert"
    return "split" if pow(d % p, (p - 1) // 2, p) == 1 else "inert"


def places_above(field: NumberField, v: Place) -> list[Place]:
    """All places of ``field`` above the place ``v`` of Q."""
    if v.field.d is not None:
        raise ValueError("places_above expects a place of Q")
    if v.p is None:
        return archimedean_places(field)
    if field.d is None:
        return [v]
    kind = splitting_type(field, v.p)
    if kind == "split":
        return [Place(field, v.p, kind, 0), Place(field, v.p, kind, 1)]
    return [Place(field, v.p, kind)]


def relative_degree(w: Place) -> Fraction:
    """d(w|v) for w over the place v of Q below it."""
    return w.weight


@lru_cache(maxsize=None)
def _base_root(d: int, p: int) -> int:
    """Root of t^2 = d at p used for split place 0 (smallest residue class)."""
    if p == 2:
        return 1  # the 2-adic root congruent to 1 mod 4
    roots = sqrt_mod(d % p, p, all_roots=True)
    return min(int(r) for r in roots)


@lru_cache(maxsize=4096)
def hensel_sqrt(d: int, p: int, k: int, index: int = 0) -> int:
    """Root r of r^2 = d modulo p^k, for a prime p split in Q(sqrt d).

    ``index`` 0 selects the root reducing to the smallest residue (mod p, or
    mod 4 when p = 2); ``index`` 1 the other one.
    """
    if p == 2:
        if d % 8 != 1:
            raise ValueError("2 does not split")
        # r^2 = d mod 2^j determines r mod 2^(j-1)
        r, j = 1, 3
        while j < k + 1:
            if ((r * r - d) >> j) & 1:
                r += 1 << (j - 1)
            j += 1
        r %= 1 << k
        if r % 4 != 1:
            r = (-r) % (1 << k)
    else:
        r = _base_root(d % p, p)
        pk = p
        while pk < p ** k:
            pk = min(pk * pk, p ** k)
            r = (r - (r * r - d) * pow(2 * r, -1, pk)) % pk
        if (r * r - d) % (p ** k):
            raise ArithmeticError("insufficient local precision")
    if index == 1:
        r = (-r) % (p ** k)
    return r


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _integral_parts(x: FieldElement):
    """Write x = (A + B sqrt d) / L with integers A, B, L > 0."""
    a, b = x.a, x.b
    L = math.lcm(a.denominator, b.denominator)
    return a.numerator * (L // a.denominator), b.numerator * (L // b.denominator), L


def valuation(place: Place, x) -> Fraction:
    """Valuation extending v_p (so that v(p) = 1) at a finite place."""
    if place.p is None:
        raise ValueError("valuation at an archimedean place")
    if not x:
        raise ValueError("log of zero")
    p = place.p
    if place.field.d is None or not isinstance(x, FieldElement) or x.b == 0:
        q = Fraction(x.a if isinstance(x, FieldElement) else x)
        return Fraction(_rational_vp(q, p))
    A, B, L = _integral_parts(x)
    d = place.field.d
    if place.kind in ("inert", "ramified"):
        return Fraction(_vp(A * A - d * B * B, p) - 2 * _vp(L, p), 2)
    nv = _vp(A * A - d * B * B, p)
    k = nv + 2
    while True:
        r = hensel_sqrt(d, p, k, place.index)
        t = (A + B * r) % (p ** k)
        if t != 0:
            v = _vp(t, p)
            if v < k:
                break
        k *= 2
        if k > 4096:
            raise ArithmeticError("insufficient local precision")
    return Fraction(v - _vp(L, p))


def _rational_vp(q: Fraction, p: int) -> int:
    v = 0
    n, m = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while m % p == 0:
        m //= p
        v -= 1
    return v


@lru_cache(maxsize=None)
def _sqrt_d(d: int, prec: int):
    with mpmath.workprec(prec):
        return mpmath.sqrt(d)


def _embed_real(x: FieldElement, index: int, prec: int):
    """Real embedding value computed without cancellation."""
    d = x.field.d
    sign = 1 if index == 0 else -1
    with mpmath.workprec(prec + 32):
        a = mpmath.mpf(x.a.numerator) / x.a.denominator
        bs = sign * mpmath.mpf(x.b.numerator) / x.b.denominator * _sqrt_d(d, prec + 32)
        if a == 0 or bs == 0 or (a > 0) == (bs > 0):
            return a + bs
        # a and b*sqrt(d) have opposite signs: go through the conjugate
        n = x.norm()
        return (mpmath.mpf(n.numerator) / n.denominator) / (a - bs)


def log_abs(place: Place, x, prec: int = DEFAULT_PREC) -> LogHeight:
    """``log |x|_place`` with the normalization described in the module docstring."""
    if not x:
        raise ValueError("log of zero")
    field = place.field
    if place.p is not None:
        v = valuation(place, x)
        return LogHeight({place.p: -v * place.weight})
    if field.d is None or not isinstance(x, FieldElement) or x.b == 0:
        q = x.a if isinstance(x, FieldElement) else Fraction(x)
        return log_rational(q, prec) * place.weight
    if place.kind == "complex":
        return log_rational(x.norm(), prec) * Fraction(1, 2)
    return _log_embedded(_embed_real(x, place.index, prec), place, prec)


def _log_embedded(val, place: Place, prec: int) -> LogHeight:
    with mpmath.workprec(prec + 32):
        lg = mpmath.log(abs(val))
        err = (abs(lg) + 1) * mpmath.ldexp(1, -(prec - 4))
    return LogHeight(arch=lg, err=err) * place.weight


def relevant_primes(values) -> set[int]:
    """Primes p such that some value has a non-unit at some place above p."""
    primes: set[int] = set()
    for x in values:
        if not x:
            continue
        if isinstance(x, FieldElement) and x.b != 0:
            A, B, L = _integral_parts(x)
            d = x.field.d
            primes.update(prime_factors(A * A - d * B * B))
            if L > 1:
                primes.update(prime_factors(L))
        else:
            q = Fraction(x.a if isinstance(x, FieldElement) else x)
            for n in (q.numerator, q.denominator):
                if abs(n) > 1:
                    primes.update(prime_factors(n))
    return primes


def _integral_data(x, field: NumberField):
    """(A, B, L, N): x = (A + B sqrt d)/L and N = A^2 - d B^2 (B = 0, N = A over Q)."""
    if field.d is None or not isinstance(x, FieldElement) or x.b == 0:
        q = Fraction(x.a if isinstance(x, FieldElement) else x)
        return q.numerator, 0, q.denominator, q.numerator
    A, B, L = _integral_parts(x)
    return A, B, L, A * A - field.d * B * B


def _valuations_at(data, field: NumberField, p: int, x=None) -> tuple:
    """Valuations of x at the places above p, in the order of places_above.

    At an odd split prime at most one conjugate of the p-primitive part of
    A + B sqrt(d) is divisible by p, so the norm valuation goes to that place.
    """
    A, B, L, N = data
    eL = _vp(L, p) if L % p == 0 else 0
    if B == 0:
        v = Fraction((_vp(A, p) if A % p == 0 else 0) - eL)
        return (v, v) if field.d is not None and _split(field, p) else (v,)
    eN = _vp(N, p) if N % p == 0 else 0
    if not _split(field, p):
        return (Fraction(eN - 2 * eL, 2),)
    if p == 2:
        return tuple(valuation(Place(field, 2, "split", i), x) for i in (0, 1))
    g = math.gcd(A, B)
    gp = _vp(g, p) if g % p == 0 else 0
    rest = eN - 2 * gp
    v0 = v1 = gp - eL
    if rest:
        pg = p ** gp
        if (A // pg + (B // pg) * _base_root(field.d % p, p)) % p == 0:
            v0 += rest
        else:
            v1 += rest
    return Fraction(v0), Fraction(v1)


@lru_cache(maxsize=1 << 14)
def _split_cached(d: int, p: int) -> bool:
    return splitting_type(NumberField(d), p) == "split"


def _split(field: NumberField, p: int) -> bool:
    return _split_cached(field.d, p)


def _finite_valuations(x, field: NumberField) -> dict:
    """All nonzero valuations of x at finite places, keyed by (p, index)."""
    data = _integral_data(x, field)
    primes = set(prime_factors(data[3])) | set(prime_factors(data[2]))
    out = {}
    for p in primes:
        for i, v in enumerate(_valuations_at(data, field, p, x)):
            if v:
                out[(p, i)] = v
    return out


def all_places(field: NumberField, primes) -> list[Place]:
    places = list(archimedean_places(field))
    for p in sorted(primes):
        places.extend(places_above(field, finite_place(p)))
    return places


def product_formula_residual(x, field: NumberField | None = None,
                             prec: int = DEFAULT_PREC) -> LogHeight:
    """Sum of ``log|x|_v`` over all places of the field of x."""
    if not x:
        raise ValueError("log of zero")
    field = field or field_of([x])
    pp: dict[int, Fraction] = {}
    for (p, i), v in _finite_valuations(x, field).items():
        w = places_above(field, finite_place(p))[i]
        pp[p] = pp.get(p, 0) - v * w.weight
    arch = [log_abs(w, x, prec) for w in archimedean_places(field)]
    total = LogHeight(pp)
    for a in arch:
        total = total + a
    return total


def _primitive_integers(coords: Sequence) -> list[int]:
    qs = [Fraction(c) for c in coords]
    den = math.lcm(*(q.denominator for q in qs))
    ints = [int(q * den) for q in qs]
    g = math.gcd(*ints)
    return [i // g for i in ints]


def point_height(point: Sequence, field: NumberField | None = None,
                 prec: int = DEFAULT_PREC) -> LogHeight:
    """Absolute logarithmic height of a projective point."""
    if not point or not any(point):
        raise ValueError("not a projective point")
    field = field or field_of(point)
    if field.d is None:
        coords = [c.a if isinstance(c, FieldElement) else c for c in point]
        ints = _primitive_integers(coords)
        return log_integer(max(abs(i) for i in ints), prec)
    nonzero = [x for x in point if x]
    data = [_integral_data(x, field) for x in nonzero]
    # a prime matters only if it divides a denominator or every norm
    primes = set(prime_factors(math.gcd(*(dt[3] for dt in data))))
    for dt in data:
        primes.update(prime_factors(dt[2]))
    # finite places contribute exact prime exponents: collect them in one dict
    pp: dict[int, Fraction] = {}
    for p in primes:
        local = [_valuations_at(dt, field, p, x) for dt, x in zip(data, nonzero)]
        for i, w in enumerate(places_above(field, finite_place(p))):
            v = min(vs[i] for vs in local)
            if v:
                pp[p] = pp.get(p, 0) - v * w.weight
    arch = [max_log_abs(w, nonzero, prec) for w in archimedean_places(field)]
    total = LogHeight(pp)
    for a in arch:
        total = total + a
    return total


def max_log_abs(place: Place, values, prec: int = DEFAULT_PREC) -> LogHeight:
    """``log max_i |values_i|_place`` over the nonzero values."""
    from .logheight import log_max

    nonzero = [x for x in values if x]
    if not nonzero:
        raise ValueError("all values vanish")
    if place.p is not None:
        v = min(valuation(place, x) for x in nonzero)
        return LogHeight({place.p: -v * place.weight})
    if place.kind == "complex" or place.field.d is None or all(
            not isinstance(x, FieldElement) or x.b == 0 for x in nonzero):
        # squared absolute values are rational here: compare exactly
        def sq(x):
            if isinstance(x, FieldElement):
                return x.norm() if place.kind == "complex" else x.a * x.a
            return Fraction(x) ** 2
        best = max(nonzero, key=sq)
        return log_abs(place, best, prec)
    # real place: the embedded values carry relative error far below 2^-prec,
    # so a clear winner only needs one logarithm
    nonzero = [x if isinstance(x, FieldElement) else FieldElement(x, 0, place.field)
               for x in nonzero]
    with mpmath.workprec(prec + 32):
        vals = [abs(_embed_real(x, place.index, prec)) for x in nonzero]
    order = sorted(range(len(vals)), key=lambda i: vals[i], reverse=True)
    if len(order) == 1 or vals[order[0]] > vals[order[1]] * (1 + mpmath.ldexp(1, -(prec // 2))):
        best = order[0]
        if nonzero[best].b == 0:
            return log_abs(place, nonzero[best], prec)
        return _log_embedded(vals[best], place, prec)
    return log_max([log_abs(place, x, prec) for x in nonzero], prec)
