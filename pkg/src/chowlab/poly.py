"""Sparse polynomials over Q and Q(sqrt d), their norms and heights.

A polynomial is a map from exponent tuples to nonzero coefficients.  Block
(multihomogeneous) polynomials keep the same flat representation and record
the sizes of their variable blocks.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

import mpmath
from sympy import factorint

from .fields import (QQ, FieldElement, NumberField, Place, all_places, archimedean_places,
                     field_of, log_abs, max_log_abs, point_height, relevant_primes)
from .logheight import DEFAULT_PREC, LogHeight, log_integer, log_rational, log_sum


# -- quadratic surds --------------------------------------------------------

def _squarefree_split(n: int) -> tuple[int, int]:
    """Write n = a^2 * k with k squarefree; return (a, k)."""
    a, k = 1, 1
    for p, e in factorint(n).items():
        a *= p ** (e // 2)
        if e % 2:
            k *= p
    return a, k


class QuadraticSurd:
    """The real number ``r * sqrt(k)`` with r rational and k squarefree."""

    __slots__ = ("r", "k")

    def __init__(self, r, k: int = 1):
        r = Fraction(r)
        k = int(k)
        if k <= 0:
            raise ValueError("surd radicand must be positive")
        a, k = _squarefree_split(k)
        self.r = r * a
        self.k = k if self.r else 1

    @classmethod
    def sqrt_of(cls, q) -> "QuadraticSurd":
        """``sqrt(q)`` for a positive rational q."""
        q = Fraction(q)
        if q < 0:
            raise ValueError("negative radicand")
        num, den = q.numerator, q.denominator
        # sqrt(num/den) = sqrt(num*den)/den
        return cls(Fraction(1, den), num * den) if num else cls(0)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadraticSurd(self.r * other, self.k)
        if not isinstance(other, QuadraticSurd):
            return NotImplemented
        g = math.gcd(self.k, other.k)
        return QuadraticSurd(self.r * other.r * g, (self.k // g) * (other.k // g))

    __rmul__ = __mul__

    def __neg__(self):
        return QuadraticSurd(-self.r, self.k)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadraticSurd(other)
        if not isinstance(other, QuadraticSurd):
            return NotImplemented
        if not other.r:
            return self
        if not self.r:
            return other
        if self.k != other.k:
            raise ValueError("sum of unlike surds is not a surd")
        return QuadraticSurd(self.r + other.r, self.k)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.k == 1 and self.r == other
        if isinstance(other, QuadraticSurd):
            return self.r == other.r and self.k == other.k
        return NotImplemented

    def __hash__(self):
        return hash(self.r) if self.k == 1 else hash((self.r, self.k))

    def __bool__(self):
        return bool(self.r)

    def __float__(self):
        return float(self.r) * math.sqrt(self.k)

    def to_mpf(self):
        return mpmath.mpf(self.r.numerator) / self.r.denominator * mpmath.sqrt(self.k)

    def __repr__(self):
        if self.k == 1:
            return str(self.r)
        return f"{self.r}*sqrt({self.k})"


# -- coefficient helpers ----------------------------------------------------

def coeff_to_complex(c, embedding: int = 0) -> complex:
    if isinstance(c, FieldElement):
        return c.to_complex(embedding)
    return complex(float(c))


def coeff_abs_log_finite(c, p: int) -> Fraction:
    """Exponent e with ``log|c|_p = e * log p`` (any extension of |.|_p)."""
    if isinstance(c, QuadraticSurd):
        return -_vp_rational(c.r, p) - Fraction(_vp_rational(Fraction(c.k), p), 2)
    if isinstance(c, FieldElement) and c.b:
        return -Fraction(_vp_rational(c.norm(), p), 2)
    q = c.a if isinstance(c, FieldElement) else Fraction(c)
    return Fraction(-_vp_rational(q, p))


def _vp_rational(q: Fraction, p: int) -> int:
    v = 0
    n, m = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while m % p == 0:
        m //= p
        v -= 1
    return v


def _format_coeff(c) -> str:
    if isinstance(c, FieldElement) and c.b:
        root = f"sqrt({c.field.d})" if abs(c.b) == 1 else f"{abs(c.b)}*sqrt({c.field.d})"
        if not c.a:
            return ("-" if c.b < 0 else "") + root
        return f"({c.a} {'+' if c.b > 0 else '-'} {root})"
    if isinstance(c, QuadraticSurd):
        return repr(c)
    q = c.a if isinstance(c, FieldElement) else Fraction(c)
    return str(q)


# -- polynomials ------------------------------------------------------------

class Poly:
    """Sparse polynomial in ``nvars`` variables x0, x1, ..."""

    __slots__ = ("nvars", "terms", "field")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None,
                 field: NumberField | None = None):
        self.nvars = int(nvars)
        clean = {}
        for mon, c in (terms or {}).items():
            mon = tuple(int(e) for e in mon)
            if len(mon) != self.nvars or any(e < 0 for e in mon):
                raise ValueError(f"bad exponent tuple {mon} for {self.nvars} variables")
            if not isinstance(c, (FieldElement, QuadraticSurd)):
                c = Fraction(c)
            if c:
                clean[mon] = c
        self.terms = clean
        coeff_field = field_of(c for c in clean.values() if isinstance(c, FieldElement))
        if field is None:
            field = coeff_field
        elif coeff_field.d is not None and coeff_field != field:
            raise ValueError(f"coefficients do not lie in {field}")
        self.field = field

    # construction helpers
    def _new(self, nvars, terms, field=None):
        return Poly(nvars, terms, field)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Poly":
        mon = [0] * nvars
        mon[i] = 1
        return Poly(nvars, {tuple(mon): 1})

    @classmethod
    def constant(cls, c, nvars: int) -> "Poly":
        return Poly(nvars, {(0,) * nvars: c})

    def _join_field(self, other: "Poly") -> NumberField:
        if self.field.d is None:
            return other.field
        if other.field.d is None or other.field == self.field:
            return self.field
        raise ValueError(f"mixed fields {self.field} and {other.field}")

    def _check(self, other):
        if isinstance(other, (int, Fraction, FieldElement, QuadraticSurd)):
            return Poly.constant(other, self.nvars)
        if not isinstance(other, Poly):
            return None
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        return other

    # ring operations
    def __add__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for mon, c in other.terms.items():
            terms[mon] = terms[mon] + c if mon in terms else c
        return self._new(self.nvars, terms, self._join_field(other))

    __radd__ = __add__

    def __neg__(self):
        return self._new(self.nvars, {m: -c for m, c in self.terms.items()}, self.field)

    def __sub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElement, QuadraticSurd)):
            return self._new(self.nvars, {m: c * other for m, c in self.terms.items()},
                             self.field if not isinstance(other, FieldElement)
                             else field_of([other]) if self.field.d is None else self.field)
        other = self._check(other)
        if other is None:
            return NotImplemented
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mon = tuple(a + b for a, b in zip(m1, m2))
                prod = c1 * c2
                terms[mon] = terms[mon] + prod if mon in terms else prod
        return self._new(self.nvars, terms, self._join_field(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self._new(self.nvars, {(0,) * self.nvars: 1}, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(other, self.nvars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # inspection
    def monomials(self) -> list[tuple]:
        """Monomials in graded-lex order, largest first."""
        return sorted(self.terms, key=lambda m: (sum(m), m), reverse=True)

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def coefficients(self) -> list:
        return [self.terms[m] for m in self.monomials()]

    def leading(self):
        """(monomial, coefficient) of the graded-lex largest term."""
        m = self.monomials()[0]
        return m, self.terms[m]

    def num_terms(self) -> int:
        return len(self.terms)

    # evaluation and substitution
    def evaluate(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        total = Fraction(0)
        for mon, c in self.terms.items():
            term = c
            for x, e in zip(point, mon):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    __call__ = evaluate

    def evaluate_float(self, point: Sequence[complex], embedding: int = 0) -> complex:
        total = 0j
        for mon, c in self.terms.items():
            term = coeff_to_complex(c, embedding)
            for x, e in zip(point, mon):
                if e:
                    term *= x ** e
            total += term
        return total

    def substitute(self, polys: Sequence["Poly"]) -> "Poly":
        """Replace x_i by ``polys[i]`` (all in the same variables)."""
        if len(polys) != self.nvars:
            raise ValueError("substitution length mismatch")
        if not polys:
            raise ValueError("empty substitution")
        nv = polys[0].nvars
        cache: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = polys[i] ** e
            return cache[key]

        result = Poly(nv, {}, self.field)
        for mon, c in self.terms.items():
            term = Poly.constant(c, nv)
            for i, e in enumerate(mon):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def conjugate(self) -> "Poly":
        """Apply a + b sqrt d -> a - b sqrt d to every coefficient."""
        return self._new(self.nvars, {m: (c.conjugate() if isinstance(c, FieldElement) else c)
                                      for m, c in self.terms.items()}, self.field)

    def derivative(self, i: int) -> "Poly":
        terms = {}
        for mon, c in self.terms.items():
            if mon[i]:
                new = list(mon)
                new[i] -= 1
                terms[tuple(new)] = c * mon[i]
        return Poly(self.nvars, terms, self.field)

    def to_text(self) -> str:
        return format_poly(self)

    def __repr__(self):
        return f"{type(self).__name__}({format_poly(self)})"


class HomogeneousPoly(Poly):
    """Homogeneous polynomial with a declared degree (kept for the zero polynomial)."""

    __slots__ = ("degree",)

    def __init__(self, nvars: int, terms=None, field=None, degree: int | None = None):
        super().__init__(nvars, terms, field)
        degs = {sum(m) for m in self.terms}
        if len(degs) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degs)}")
        if degs:
            (d,) = degs
            if degree is not None and degree != d:
                raise ValueError(f"declared degree {degree} but terms have degree {d}")
            degree = d
        self.degree = 0 if degree is None else int(degree)

    @classmethod
    def from_poly(cls, f: Poly, degree: int | None = None) -> "HomogeneousPoly":
        return cls(f.nvars, f.terms, f.field, degree)

    def _new(self, nvars, terms, field=None):
        p = Poly(nvars, terms, field)
        if p.is_homogeneous():
            return HomogeneousPoly(nvars, p.terms, p.field, p.total_degree() if p.terms else None)
        return p

    def __mul__(self, other):
        res = super().__mul__(other)
        if isinstance(res, HomogeneousPoly) and not res.terms:
            deg = self.degree + (other.degree if isinstance(other, HomogeneousPoly) else 0)
            res.degree = deg
        return res

    __rmul__ = __mul__

    def __pow__(self, k: int):
        res = super().__pow__(k)
        if isinstance(res, HomogeneousPoly):
            res.degree = self.degree * k
        return res

    def __hash__(self):
        return Poly.__hash__(self)


class BlockPoly(Poly):
    """Multihomogeneous polynomial; ``blocks[h]`` is the size of block h.

    Variables are stored flat, block after block.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Sequence[int], terms=None, field=None):
        self.blocks = tuple(int(b) for b in blocks)
        super().__init__(sum(self.blocks), terms, field)
        self.block_degrees()  # validates homogeneity per block

    def _new(self, nvars, terms, field=None):
        p = Poly(nvars, terms, field)
        try:
            return BlockPoly(self.blocks, p.terms, p.field)
        except ValueError:
            return p

    def split(self, mon: tuple) -> list[tuple]:
        out, i = [], 0
        for b in self.blocks:
            out.append(mon[i:i + b])
            i += b
        return out

    def block_degrees(self) -> tuple[int, ...]:
        degs = None
        for mon in self.terms:
            d = tuple(sum(part) for part in self.split(mon))
            if degs is None:
                degs = d
            elif d != degs:
                raise ValueError("polynomial is not homogeneous in each block")
        return degs if degs is not None else (0,) * len(self.blocks)

    def evaluate_blocks(self, vectors: Sequence[Sequence]):
        flat = [x for v in vectors for x in v]
        return self.evaluate(flat)

    def map_coefficients(self, fn) -> "BlockPoly":
        return BlockPoly(self.blocks, {m: fn(m, c) for m, c in self.terms.items()})

    def __hash__(self):
        return Poly.__hash__(self)


# -- Veronese data ----------------------------------------------------------

def veronese_monomials(m: int, N: int) -> list[tuple]:
    """All degree-m monomials in x0..xN, lex-descending (x0^m first)."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    out = []
    for combo in combinations_with_replacement(range(N + 1), m):
        mon = [0] * (N + 1)
        for i in combo:
            mon[i] += 1
        out.append(tuple(mon))
    return out


def multinomial(mon: Sequence[int]) -> int:
    """``(sum a)! / prod a_i!``."""
    out = math.factorial(sum(mon))
    for a in mon:
        out //= math.factorial(a)
    return out


def monomial_value(mon: Sequence[int], point: Sequence):
    val = Fraction(1)
    for x, e in zip(point, mon):
        if e:
            val = val * x ** e
    return val


def veronese_point(point: Sequence, m: int) -> list:
    return [monomial_value(mon, point) for mon in veronese_monomials(m, len(point) - 1)]


# -- compose ----------------------------------------------------------------

def compose(f: Poly, gs: Sequence[Poly]) -> HomogeneousPoly | Poly:
    """``f(g_0, ..., g_n)`` for homogeneous g of one common degree."""
    if len(gs) != f.nvars:
        raise ValueError(f"need {f.nvars} substitutions, got {len(gs)}")
    degs = {g.total_degree() for g in gs if g.terms}
    if isinstance(gs[0], HomogeneousPoly):
        degs |= {g.degree for g in gs if isinstance(g, HomogeneousPoly)}
    if len(degs) > 1 or not all(g.is_homogeneous() for g in gs):
        raise ValueError("substituted polynomials must be homogeneous of equal degree")
    e = degs.pop() if degs else 0
    res = f.substitute(gs)
    fdeg = f.degree if isinstance(f, HomogeneousPoly) else f.total_degree()
    return HomogeneousPoly(res.nvars, res.terms, res.field, fdeg * e)


# -- norms and heights ------------------------------------------------------

def _all_coeffs(fs: Iterable[Poly]) -> list:
    cs = [c for f in fs for c in f.terms.values()]
    if not cs:
        raise ValueError("all polynomials vanish")
    return cs


def _coeff_field(cs) -> NumberField:
    return field_of(c for c in cs if isinstance(c, FieldElement))


def _arch_abs_mpf(c, place: Place):
    """|sigma_v(c)| as an mpf (current working precision)."""
    if isinstance(c, QuadraticSurd):
        return abs(c.to_mpf())
    if isinstance(c, FieldElement) and c.b:
        d = c.field.d
        a = mpmath.mpf(c.a.numerator) / c.a.denominator
        b = mpmath.mpf(c.b.numerator) / c.b.denominator
        if d < 0:
            n = c.norm()
            return mpmath.sqrt(mpmath.mpf(n.numerator) / n.denominator)
        s = 1 if place.index == 0 else -1
        val = a + s * b * mpmath.sqrt(d)
        if (a > 0) != (s * b > 0):
            n = c.norm()
            val = (mpmath.mpf(n.numerator) / n.denominator) / (a - s * b * mpmath.sqrt(d))
        return abs(val)
    q = c.a if isinstance(c, FieldElement) else Fraction(c)
    return abs(mpmath.mpf(q.numerator) / q.denominator)


def _exact_abs(c, place: Place):
    """|sigma_v(c)| as a Fraction when it is rational, else None."""
    if isinstance(c, QuadraticSurd):
        return abs(c.r) if c.k == 1 else None
    if isinstance(c, FieldElement):
        if c.b:
            return None
        return abs(c.a)
    return abs(Fraction(c))


def _log_l1_arch(cs, place: Place, prec: int) -> LogHeight:
    exact = [_exact_abs(c, place) for c in cs]
    if all(e is not None for e in exact):
        return log_rational(sum(exact), prec) * place.weight
    with mpmath.workprec(prec + 32):
        total = mpmath.fsum(_arch_abs_mpf(c, place) for c in cs)
        lg = mpmath.log(total)
        err = (abs(lg) + len(cs) + 1) * mpmath.ldexp(1, -(prec - 4))
    return LogHeight(arch=lg, err=err) * place.weight


def _surd_free(cs) -> bool:
    return not any(isinstance(c, QuadraticSurd) and c.k != 1 for c in cs)


def _plain(c):
    return c.r if isinstance(c, QuadraticSurd) else c


def poly_norms(fs: Sequence[Poly], place: Place, prec: int = DEFAULT_PREC):
    """``(log ||fs||_v, log ||fs||_{v,1})`` at ``place``."""
    cs = _all_coeffs(fs)
    if not _surd_free(cs):
        if place.p is not None:
            e = max(coeff_abs_log_finite(c, place.p) for c in cs)
            sup = LogHeight({place.p: e * place.weight})
            return sup, sup
        with mpmath.workprec(prec + 32):
            vals = [_arch_abs_mpf(c, place) for c in cs]
            lmax = mpmath.log(max(vals))
            err = (abs(lmax) + 1) * mpmath.ldexp(1, -(prec - 4))
        sup = LogHeight(arch=lmax, err=err) * place.weight
        return sup, _log_l1_arch(cs, place, prec)
    cs = [_plain(c) for c in cs]
    sup = max_log_abs(place, cs, prec)
    if place.p is not None:
        return sup, sup
    return sup, _log_l1_arch(cs, place, prec)


def _equal_abs(cs, place: Place) -> bool:
    """True when all coefficients share one absolute value at an archimedean place."""
    field = place.field
    xs = [c if isinstance(c, FieldElement) else FieldElement(c, 0, field) for c in cs]
    if place.kind == "complex":
        n0 = xs[0].norm()
        return all(x.norm() == n0 for x in xs[1:])
    # real embeddings are injective, so equal size means x = +-x_0
    x0 = xs[0]
    return all((x.a, x.b) in ((x0.a, x0.b), (-x0.a, -x0.b)) for x in xs[1:])


def _surd_primes(cs) -> set[int]:
    primes: set[int] = set()
    for c in cs:
        if isinstance(c, QuadraticSurd):
            for n in (c.r.numerator, c.r.denominator, c.k):
                if abs(n) > 1:
                    primes.update(factorint(abs(n)))
    return primes


def poly_heights(fs: Sequence[Poly], prec: int = DEFAULT_PREC):
    """``(h(fs), h_1(fs))`` summed over all places of a field containing the coefficients."""
    cs = _all_coeffs(fs)
    if not _surd_free(cs):
        # surd coefficients: real embeddings all give |r|*sqrt(k); finite places via valuations
        primes = _surd_primes(cs)
        h = LogHeight()
        for p in sorted(primes):
            e = max(coeff_abs_log_finite(c, p) for c in cs)
            h = h + LogHeight({p: e})
        arch = Place(QQ, None, "real")
        sup, l1 = poly_norms(fs, arch, prec)
        return h + sup, h + l1
    plain = [_plain(c) for c in cs]
    field = _coeff_field(plain)
    if field.d is None:
        qs = [Fraction(c.a if isinstance(c, FieldElement) else c) for c in plain]
        den = math.lcm(*(q.denominator for q in qs))
        ints = [int(q * den) for q in qs]
        g = math.gcd(*ints)
        ints = [abs(i // g) for i in ints]
        return log_integer(max(ints), prec), log_integer(sum(ints), prec)
    h = LogHeight()
    h1 = LogHeight()
    for w in all_places(field, relevant_primes(plain)):
        sup, l1 = poly_norms(fs, w, prec)
        h = h + sup
        h1 = h1 + l1
    return h, h1


def poly_height(fs, prec: int = DEFAULT_PREC) -> LogHeight:
    return poly_heights(fs, prec)[0]


def poly_h1(fs, prec: int = DEFAULT_PREC) -> LogHeight:
    return poly_heights(fs, prec)[1]


def push_height_bound(x: Sequence, fs: Sequence[Poly], prec: int = DEFAULT_PREC) -> LogHeight:
    """Slack ``D h(x) + h_1(fs) - h(y)`` for ``y = (f_0(x), ..., f_r(x))``.

    Raises AssertionError if the slack is negative.
    """
    degs = {f.degree if isinstance(f, HomogeneousPoly) else f.total_degree() for f in fs}
    if len(degs) != 1:
        raise ValueError("polynomials must share one degree")
    D = degs.pop()
    y = [f.evaluate(x) for f in fs]
    if not any(y):
        raise ValueError("image is the zero tuple")
    slack = point_height(x, prec=prec) * D + poly_h1(fs, prec) - point_height(y, prec=prec)
    s = slack.sign(prec)
    if s is not None and s < 0:
        raise AssertionError(f"height bound violated: slack {slack}")
    return slack


def _degree(f: Poly) -> int:
    return f.degree if isinstance(f, HomogeneousPoly) else f.total_degree()


def value_bound_slack(f: Poly, x: Sequence, place: Place, prec: int = DEFAULT_PREC):
    """Slack of ``|f(x)|_v <= ||f||_{v,1} ||x||_v^D``, or None when f(x) = 0."""
    y = f.evaluate(x)
    if not y:
        return None
    l1 = poly_norms([f], place, prec)[1]
    return l1 + max_log_abs(place, x, prec) * _degree(f) - log_abs(place, y, prec)


def height_comparison_slacks(fs: Sequence[Poly], prec: int = DEFAULT_PREC):
    """Slacks of ``h <= h_1 <= h + log M``, M counting all nonzero coefficients."""
    M = sum(f.num_terms() for f in fs)
    gap = _h1_minus_h(fs, prec)
    return gap, log_integer(M, prec) - gap


def _h1_minus_h(fs: Sequence[Poly], prec: int = DEFAULT_PREC) -> LogHeight:
    """``h_1(fs) - h(fs)`` built place by place so that exact cases stay exact.

    Finite places contribute nothing; an archimedean place where all
    coefficients have one size contributes log of their number.
    """
    cs = _all_coeffs(fs)
    plain = [_plain(c) for c in cs] if _surd_free(cs) else None
    field = _coeff_field(plain) if plain else None
    if field is None or field.d is None:
        h, h1 = poly_heights(fs, prec)
        return h1 - h
    gap = LogHeight()
    for w in archimedean_places(field):
        if _equal_abs(plain, w):
            gap = gap + log_integer(len(plain), prec) * w.weight
        else:
            sup, l1 = poly_norms(fs, w, prec)
            gap = gap + (l1 - sup)
    return gap


def compose_height_slack(f: Poly, gs: Sequence[Poly], prec: int = DEFAULT_PREC) -> LogHeight:
    """Slack of ``h_1(f(g)) <= h_1(f) + D h_1(g)`` with D = deg f."""
    fg = compose(f, gs)
    if not fg.terms:
        raise ValueError("composition vanishes")
    return poly_h1([f], prec) + poly_h1(gs, prec) * _degree(f) - poly_h1([fg], prec)


# -- exact roots ------------------------------------------------------------

def poly_root(f: Poly, k: int) -> Poly | None:
    """Return g with ``g**k == f`` (g normalized with positive leading coefficient
    when k is even), or None if f is not a k-th power over Q."""
    if k == 1:
        return f
    if not f.terms:
        return f
    if any(isinstance(c, (FieldElement, QuadraticSurd)) and not
           (isinstance(c, FieldElement) and not c.b) for c in f.terms.values()):
        return None
    nv = f.nvars
    lead_m, lead_c = f.leading()
    if any(e % k for e in lead_m):
        return None
    c = _rational_root(Fraction(lead_c.a if isinstance(lead_c, FieldElement) else lead_c), k)
    if c is None:
        return None
    g0 = tuple(e // k for e in lead_m)
    g = Poly(nv, {g0: c})
    # peel off terms of g from the top using the largest monomial of the remainder
    kg = g ** (k - 1) * k
    lead_kg_m, lead_kg_c = kg.leading()
    for _ in range(len(f.terms) * 4 + 64):
        rem = f - g ** k
        if not rem.terms:
            return HomogeneousPoly.from_poly(g) if g.is_homogeneous() else g
        rm, rc = rem.leading()
        new_m = tuple(a - b for a, b in zip(rm, lead_kg_m))
        if any(e < 0 for e in new_m):
            return None
        if (sum(rm), rm) >= (sum(lead_m), lead_m):
            return None
        g = g + Poly(nv, {new_m: Fraction(rc) / Fraction(lead_kg_c)})
    return None


def _rational_root(q: Fraction, k: int):
    if q < 0 and k % 2 == 0:
        return None
    sign = -1 if q < 0 else 1
    num = _int_root(abs(q.numerator), k)
    den = _int_root(q.denominator, k)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


def _int_root(n: int, k: int):
    if n == 0:
        return 0
    r = round(n ** (1.0 / k)) if n < 1 << 1000 else None
    if r is None:
        lo, hi = 0, 1 << (n.bit_length() // k + 1)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid ** k <= n:
                lo = mid
            else:
                hi = mid - 1
        r = lo
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


# -- text format ------------------------------------------------------------

def format_poly(f: Poly) -> str:
    if not f.terms:
        return "0"
    out = ""
    for mon in f.monomials():
        c = f.terms[mon]
        vars_ = " ".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mon) if e)
        coeff = _format_coeff(c)
        sep = " + "
        if coeff.startswith("-"):
            sep, coeff = " - ", coeff[1:]
        if vars_:
            term = vars_ if coeff == "1" else f"{coeff} {vars_}"
        else:
            term = coeff
        out = (("-" if sep == " - " else "") + term) if not out else out + sep + term
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|(sqrt)|(\*\*|[-+*/^()]))")


class _Parser:
    def __init__(self, text: str, nvars: int | None):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse polynomial near {text[pos:pos + 12]!r}")
            num, var, sq, op = m.groups()
            if num is not None:
                self.tokens.append(("num", int(num)))
            elif var is not None:
                self.tokens.append(("var", int(var[1:])))
            elif sq is not None:
                self.tokens.append(("sqrt", None))
            else:
                self.tokens.append(("op", "^" if op == "**" else op))
            pos = m.end()
        self.i = 0
        used = [v for kind, v in self.tokens if kind == "var"]
        self.nvars = nvars if nvars is not None else (max(used) + 1 if used else 1)
        if used and max(used) >= self.nvars:
            raise ValueError(f"variable x{max(used)} exceeds {self.nvars} variables")

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ValueError(f"expected {op!r}")

    def parse(self) -> Poly:
        p = self.expr()
        if self.i != len(self.tokens):
            raise ValueError("trailing input in polynomial")
        return p

    def expr(self) -> Poly:
        kind, val = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term() * sign
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                den = self.factor()
                if den.total_degree() != 0 or len(den.terms) != 1:
                    raise ValueError("can only divide by constants")
                (c,) = den.terms.values()
                acc = acc * (1 / c)
            elif kind in ("num", "var", "sqrt") or (kind == "op" and val == "("):
                acc = acc * self.factor()  # juxtaposition
            else:
                return acc

    def factor(self) -> Poly:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k, e = self.take()
            if k != "num":
                raise ValueError("exponent must be a nonnegative integer")
            base = base ** e
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.constant(val, self.nvars)
        if kind == "var":
            return Poly.variable(val, self.nvars)
        if kind == "sqrt":
            self.expect("(")
            sign = 1
            k, v = self.take()
            if k == "op" and v == "-":
                sign = -1
                k, v = self.take()
            if k != "num":
                raise ValueError("sqrt takes an integer")
            self.expect(")")
            return Poly.constant(sqrt_element(sign * v), self.nvars)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ValueError("unexpected token in polynomial")


def sqrt_element(n: int):
    """sqrt(n) as a rational or an element of Q(sqrt k), k the squarefree part."""
    if n == 0:
        return Fraction(0)
    a, k = _squarefree_split(abs(n))
    k = k if n > 0 else -k
    if k == 1:
        return Fraction(a)
    return FieldElement(0, a, NumberField(k))


def parse_poly(text: str, nvars: int | None = None, homogeneous: bool = True):
    """Parse ``coeff * x0^a x1^b + ...``; juxtaposition means multiplication."""
    p = _Parser(text, nvars).parse()
    if homogeneous:
        return HomogeneousPoly.from_poly(p)
    return p


def poly_finite_part(fs: Sequence[Poly], prec: int = DEFAULT_PREC) -> LogHeight:
    """Sum over the finite places of ``log ||fs||_v`` (exact)."""
    cs = _all_coeffs(fs)
    if not _surd_free(cs):
        total = LogHeight()
        for p in sorted(_surd_primes(cs)):
            total = total + LogHeight({p: max(coeff_abs_log_finite(c, p) for c in cs)})
        return total
    plain = [_plain(c) for c in cs]
    field = _coeff_field(plain)
    total = LogHeight()
    for w in all_places(field, relevant_primes(plain)):
        if w.p is not None:
            total = total + max_log_abs(w, plain, prec)
    return total


def block_structure(f: Poly) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(block sizes, block degrees); a plain form counts as a single block."""
    if isinstance(f, BlockPoly):
        return f.blocks, f.block_degrees()
    if not f.is_homogeneous():
        raise ValueError("expected a homogeneous or block polynomial")
    return (f.nvars,), (f.total_degree(),)
