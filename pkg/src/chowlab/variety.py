"""Projective varieties given by simple presentations, and their Hilbert data.

Every presentation knows how to send a degree-m monomial in y_0..y_R to a
vector representing its residue class in the degree-m part of the coordinate
ring.  Ranks, ideal pieces and the Hilbert-weight greedy are all computed from
these class vectors.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import sympy

from .fields import FieldElement
from .linalg import SparseEchelon, nullspace, rank
from .poly import HomogeneousPoly, Poly, veronese_monomials

MAX_MONOMIALS = 20_000
MAX_PULLBACK = 50_000


class SizeGuardError(ValueError):
    """A computation would exceed one of the configured size guards."""


class PresentationError(ValueError):
    """The presentation does not describe a variety of the expected kind."""


def _check_guard(R: int, m: int):
    count = math.comb(R + m, m)
    if count > MAX_MONOMIALS:
        raise SizeGuardError(f"monomial guard: C({R}+{m},{m}) = {count} > {MAX_MONOMIALS}")
    return count


class VarietySpec:
    """Base class.  ``R`` is the dimension of the ambient projective space."""

    R: int
    kind: str = ""

    def class_vector(self, mon: tuple) -> dict:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return degree_dimension(self)[0]

    def contains(self, point: Sequence) -> bool:
        raise NotImplementedError

    def _classes(self, m: int) -> list[dict]:
        cache = self.__dict__.setdefault("_class_cache", {})
        if m not in cache:
            _check_guard(self.R, m)
            cache[m] = [self.class_vector(mon) for mon in veronese_monomials(m, self.R)]
        return cache[m]

    def to_json(self) -> dict:
        raise NotImplementedError


class FullSpace(VarietySpec):
    kind = "projective_space"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need n >= 1")
        self.n = int(n)
        self.R = self.n

    def class_vector(self, mon):
        return {mon: Fraction(1)}

    def contains(self, point):
        return len(point) == self.R + 1 and any(point)

    def __repr__(self):
        return f"FullSpace({self.n})"

    def to_json(self):
        return {"type": "projective_space", "n": self.n}


class Hypersurface(VarietySpec):
    """Zero set of one homogeneous polynomial f in y_0..y_R."""

    kind = "hypersurface"

    def __init__(self, f: Poly):
        if not f.terms or not f.is_homogeneous() or f.total_degree() < 1:
            raise PresentationError("hypersurface needs a nonconstant homogeneous polynomial")
        if f.nvars < 3:
            raise PresentationError("hypersurfaces are supported in P^2 and above")
        self.f = HomogeneousPoly.from_poly(f)
        self.R = f.nvars - 1
        # lex-largest monomial of f is its leading term
        self.lead = max(self.f.terms)
        lc = self.f.terms[self.lead]
        self._tail = {m: -c / lc for m, c in self.f.terms.items() if m != self.lead}
        self._nf: dict = {}

    def normal_form(self, mon: tuple) -> dict:
        """Remainder of a monomial on division by f (lex leading term)."""
        if mon in self._nf:
            return self._nf[mon]
        q = tuple(a - b for a, b in zip(mon, self.lead))
        if any(e < 0 for e in q):
            res = {mon: Fraction(1)}
        else:
            res = {}
            for tm, c in self._tail.items():
                sub = tuple(a + b for a, b in zip(q, tm))
                for k, v in self.normal_form(sub).items():
                    nv = res.get(k, 0) + c * v
                    if nv:
                        res[k] = nv
                    else:
                        res.pop(k, None)
        self._nf[mon] = res
        return res

    def class_vector(self, mon):
        return self.normal_form(mon)

    def contains(self, point):
        return any(point) and not self.f.evaluate(point)

    def __repr__(self):
        return f"Hypersurface({self.f.to_text()})"

    def to_json(self):
        return {"type": "hypersurface", "poly": self.f.to_text(), "nvars": self.f.nvars}


def _pullback_vector(p: Poly) -> dict:
    return dict(p.terms)


class LinearSubvariety(VarietySpec):
    """Image of P^n under ``y = psi x`` with psi an (R+1) x (n+1) matrix of full column rank."""

    kind = "linear"

    def __init__(self, psi: Sequence[Sequence]):
        self.psi = [[Fraction(x) if not isinstance(x, FieldElement) else x for x in row]
                    for row in psi]
        self.R = len(self.psi) - 1
        self.n = len(self.psi[0]) - 1
        if self.n < 1:
            raise PresentationError("linear subvariety must have dimension >= 1")
        cols = [[row[j] for row in self.psi] for j in range(self.n + 1)]
        if rank(cols) != self.n + 1:
            raise PresentationError("psi must have full column rank")
        self.forms = [Poly(self.n + 1, {tuple(int(i == j) for i in range(self.n + 1)): c
                                        for j, c in enumerate(row)}) for row in self.psi]
        self._powers: dict = {}

    def _power(self, i, e):
        if (i, e) not in self._powers:
            self._powers[(i, e)] = self.forms[i] ** e
        return self._powers[(i, e)]

    def pullback(self, mon) -> Poly:
        p = Poly.constant(1, self.n + 1)
        for i, e in enumerate(mon):
            if e:
                p = p * self._power(i, e)
        return p

    def class_vector(self, mon):
        return _pullback_vector(self.pullback(mon))

    def contains(self, point):
        if not any(point):
            return False
        rows = [list(r) + [x] for r, x in zip(self.psi, point)]
        return rank(rows) == self.n + 1

    def __repr__(self):
        return f"LinearSubvariety({[[str(x) for x in r] for r in self.psi]})"

    def to_json(self):
        return {"type": "linear", "psi": [[str(x) for x in r] for r in self.psi]}


class ParametrizedImage(VarietySpec):
    """Closure of the image of ``t -> (g_0(t), ..., g_R(t))``.

    The source is P^k with k = nvars - 1 of the components.  Chow forms and
    degrees are supported for k = 1.
    """

    kind = "parametrized"

    def __init__(self, components: Sequence[Poly]):
        if len(components) < 2:
            raise PresentationError("need at least two components")
        nv = components[0].nvars
        if any(g.nvars != nv for g in components):
            raise PresentationError("components must share the source variables")
        degs = {g.total_degree() for g in components if g.terms}
        if len(degs) != 1 or not all(g.is_homogeneous() for g in components):
            raise PresentationError("components must be homogeneous of one degree")
        self.g = [HomogeneousPoly.from_poly(g, degs and next(iter(degs))) for g in components]
        self.e = degs.pop()
        self.source_dim = nv - 1
        self.R = len(components) - 1
        if not self._no_common_zero():
            raise PresentationError("components have a common zero on the source")
        self._powers: dict = {}

    def _no_common_zero(self) -> bool:
        if self.source_dim == 1:
            return binary_gcd_degree(self.g) == 0
        # every source variable must appear as a pure power in some component
        for i in range(self.source_dim + 1):
            pure = tuple(self.e if j == i else 0 for j in range(self.source_dim + 1))
            if not any(pure in g.terms for g in self.g):
                if all(len(g.terms) <= 1 for g in self.g):
                    return False
                raise PresentationError(
                    "common-zero test is only implemented for binary forms and monomial maps")
        return True

    def _power(self, i, e):
        if (i, e) not in self._powers:
            self._powers[(i, e)] = self.g[i] ** e
        return self._powers[(i, e)]

    def pullback(self, mon) -> Poly:
        size = math.comb(self.source_dim + self.e * sum(mon), self.source_dim)
        if size > MAX_PULLBACK:
            raise SizeGuardError(f"pullback guard: {size} > {MAX_PULLBACK}")
        p = Poly.constant(1, self.source_dim + 1)
        for i, e in enumerate(mon):
            if e:
                p = p * self._power(i, e)
        return p

    def class_vector(self, mon):
        return _pullback_vector(self.pullback(mon))

    def image(self, t: Sequence) -> list:
        return [g.evaluate(t) for g in self.g]

    def contains(self, point):
        """Exact membership for curves: the fibre equations share a root."""
        if not any(point) or len(point) != self.R + 1:
            return False
        if self.source_dim != 1:
            raise NotImplementedError("membership only for curves")
        j = next(i for i, x in enumerate(point) if x)
        forms = [self.g[i] * point[j] - self.g[j] * point[i] for i in range(self.R + 1) if i != j]
        forms = [f for f in forms if f.terms]
        if not forms:
            return True
        return binary_gcd_degree(forms) > 0

    @cached_property
    def fibre_degree(self) -> int:
        if self.source_dim != 1:
            raise NotImplementedError("fibre degree only for curves")
        return fibre_degree(self.g)

    def __repr__(self):
        return f"ParametrizedImage({[g.to_text() for g in self.g]})"

    def to_json(self):
        return {"type": "parametrized", "components": [g.to_text() for g in self.g],
                "source_vars": self.source_dim + 1}


# -- binary forms ---------------------------------------------------------------

_T = sympy.Symbol("t")


def _to_sympy_coeff(c):
    if isinstance(c, FieldElement):
        a = sympy.Rational(c.a.numerator, c.a.denominator)
        if c.b and c.field.d is not None:
            return a + sympy.Rational(c.b.numerator, c.b.denominator) * sympy.sqrt(c.field.d)
        return a
    c = Fraction(c)
    return sympy.Rational(c.numerator, c.denominator)


def _dehomogenize(f: Poly):
    """(sympy poly in t = x0/x1, multiplicity of the point (1:0))."""
    expr = sum(_to_sympy_coeff(c) * _T ** mon[0] for mon, c in f.terms.items())
    deg = f.total_degree()
    top = max(mon[0] for mon in f.terms)
    return sympy.Poly(expr, _T, extension=True), deg - top


def binary_gcd_degree(forms: Sequence[Poly]) -> int:
    """Degree of the gcd of nonzero binary forms (roots counted on P^1)."""
    forms = [f for f in forms if f.terms]
    if not forms:
        raise ValueError("all forms vanish")
    if any(f.nvars != 2 for f in forms):
        raise ValueError("binary forms expected")
    g = None
    inf = None
    for f in forms:
        p, mult = _dehomogenize(f)
        g = p if g is None else sympy.gcd(g, p)
        inf = mult if inf is None else min(inf, mult)
    return g.degree() + inf


def fibre_degree(components: Sequence[Poly], trials: int = 3, seed: int = 7) -> int:
    """Generic number of parameters on P^1 mapping to one image point."""
    rng = random.Random(seed)
    best = None
    for _ in range(trials):
        t0 = (Fraction(rng.randint(-97, 97)), Fraction(rng.randint(1, 89)))
        vals = [g.evaluate(t0) for g in components]
        j = next(i for i, v in enumerate(vals) if v)
        forms = [components[i] * vals[j] - components[j] * vals[i]
                 for i in range(len(components)) if i != j]
        forms = [f for f in forms if f.terms]
        k = binary_gcd_degree(forms) if forms else components[0].total_degree()
        best = k if best is None else min(best, k)
    return best


# -- graded pieces --------------------------------------------------------------

@dataclass
class GradedPiece:
    m: int
    monomials: list
    basis: list  # rows spanning (I_Y)_m in the monomial basis
    rank: int = dc_field(init=False)

    def __post_init__(self):
        self.rank = len(self.basis)

    @property
    def hilbert(self) -> int:
        return len(self.monomials) - self.rank


def _class_matrix(Y: VarietySpec, m: int):
    mons = veronese_monomials(m, Y.R)
    classes = Y._classes(m)
    keys = sorted({k for c in classes for k in c}, reverse=True)
    index = {k: i for i, k in enumerate(keys)}
    # rows: target coordinates, columns: monomials
    mat = [[Fraction(0)] * len(mons) for _ in keys]
    for j, c in enumerate(classes):
        for k, v in c.items():
            mat[index[k]][j] = v
    return mons, mat


def ideal_piece(Y: VarietySpec, m: int) -> GradedPiece:
    """Basis of the degree-m part of the ideal of Y."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_guard(Y.R, m)
    mons = veronese_monomials(m, Y.R)
    if isinstance(Y, FullSpace):
        return GradedPiece(m, mons, [])
    if isinstance(Y, Hypersurface):
        d = Y.f.degree
        if m < d:
            return GradedPiece(m, mons, [])
        index = {mon: i for i, mon in enumerate(mons)}
        rows = []
        for q in veronese_monomials(m - d, Y.R):
            row = [Fraction(0)] * len(mons)
            for tm, c in Y.f.terms.items():
                row[index[tuple(a + b for a, b in zip(q, tm))]] = c
            rows.append(row)
        return GradedPiece(m, mons, rows)
    _, mat = _class_matrix(Y, m)
    return GradedPiece(m, mons, nullspace(mat, len(mons)))


def hilbert_function(Y: VarietySpec, m: int) -> int:
    if isinstance(Y, FullSpace):
        return math.comb(Y.R + m, m)
    if isinstance(Y, Hypersurface):
        d = Y.f.degree
        return math.comb(Y.R + m, m) - (math.comb(Y.R + m - d, m - d) if m >= d else 0)
    ech = SparseEchelon()
    for c in Y._classes(m):
        ech.insert(c)
    return len(ech)


def degree_dimension(Y: VarietySpec) -> tuple[int, int]:
    """(dimension, degree) of Y."""
    cache = Y.__dict__.get("_degdim")
    if cache is not None:
        return cache
    if isinstance(Y, FullSpace):
        out = (Y.n, 1)
    elif isinstance(Y, Hypersurface):
        out = (Y.R - 1, Y.f.degree)
    elif isinstance(Y, LinearSubvariety):
        out = (Y.n, 1)
    elif isinstance(Y, ParametrizedImage) and Y.source_dim == 1:
        k = Y.fibre_degree
        if Y.e % k:
            raise PresentationError("fibre degree does not divide the parametrization degree")
        D = Y.e // k
        # cross-check against first differences of the Hilbert function
        diffs = {hilbert_function(Y, m + 1) - hilbert_function(Y, m) for m in (D, D + 1)}
        if diffs != {D}:
            raise PresentationError(
                "presentation not reduced/irreducible as assumed: "
                f"Hilbert differences {sorted(diffs)} vs degree {D}")
        out = (1, D)
    elif isinstance(Y, ParametrizedImage):
        out = _fit_hilbert_polynomial(Y)
    else:
        raise TypeError(f"unsupported variety {Y!r}")
    Y.__dict__["_degdim"] = out
    return out


def _fit_hilbert_polynomial(Y: VarietySpec) -> tuple[int, int]:
    """Read (n, D) from n-th differences of H_Y once they stabilize."""
    n = Y.source_dim
    start = Y.e + 1
    values = [hilbert_function(Y, m) for m in range(start, start + n + 3)]
    diffs = values
    for _ in range(n):
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    if len(set(diffs)) != 1 or diffs[0] <= 0:
        raise PresentationError("Hilbert polynomial fit did not stabilize")
    return n, diffs[0]


def is_fibre_flagged(Y: VarietySpec) -> bool:
    return isinstance(Y, ParametrizedImage) and Y.source_dim == 1 and Y.fibre_degree > 1


# -- Hilbert weight -------------------------------------------------------------

def monomial_weight(mon: Sequence[int], c: Sequence) -> Fraction:
    return sum((Fraction(a) * Fraction(ci) for a, ci in zip(mon, c)), Fraction(0))


def _check_weights(Y: VarietySpec, c: Sequence):
    if len(c) != Y.R + 1:
        raise ValueError(f"weight vector needs {Y.R + 1} entries")
    if any(Fraction(x) < 0 for x in c):
        raise ValueError("weights must be nonnegative")


def _greedy(Y: VarietySpec, m: int, c: Sequence):
    _check_weights(Y, c)
    mons = veronese_monomials(m, Y.R)
    classes = Y._classes(m)
    weights = [monomial_weight(mon, c) for mon in mons]
    order = sorted(range(len(mons)), key=lambda i: -weights[i])  # stable: ties keep veronese order
    ech = SparseEchelon()
    chosen = []
    target = hilbert_function(Y, m) if isinstance(Y, (FullSpace, Hypersurface)) else None
    for i in order:
        if ech.insert(classes[i]):
            chosen.append(i)
            if target is not None and len(chosen) == target:
                break
    s = sum((weights[i] for i in chosen), Fraction(0))
    return s, sorted(chosen)


def hilbert_weight(Y: VarietySpec, m: int, c: Sequence):
    """(s_Y(m, c), chosen monomials) via the matroid greedy."""
    s, idx = _greedy(Y, m, c)
    mons = veronese_monomials(m, Y.R)
    return s, [mons[i] for i in idx]


def optimal_support(Y: VarietySpec, m: int, c: Sequence) -> list[int]:
    """Indices (in veronese order) of a monomial basis of maximal c-weight."""
    return _greedy(Y, m, c)[1]


def hilbert_weight_bruteforce(Y: VarietySpec, m: int, c: Sequence) -> Fraction:
    """Exhaustive maximum over all monomial bases of the quotient (tiny cases only)."""
    _check_weights(Y, c)
    mons = veronese_monomials(m, Y.R)
    if len(mons) > 12:
        raise SizeGuardError("brute force limited to 12 monomials")
    piece = ideal_piece(Y, m)
    H = len(mons) - piece.rank
    best = None
    for subset in combinations(range(len(mons)), H):
        rows = [list(r) for r in piece.basis]
        for i in subset:
            rows.append([Fraction(int(j == i)) for j in range(len(mons))])
        if rank(rows) == len(mons):
            w = sum((monomial_weight(mons[i], c) for i in subset), Fraction(0))
            if best is None or w > best:
                best = w
    return best


# -- parsing --------------------------------------------------------------------

def variety_from_json(data: dict) -> VarietySpec:
    from .poly import parse_poly

    kind = data.get("type")
    if kind == "projective_space":
        return FullSpace(int(data["n"]))
    if kind == "hypersurface":
        nv = data.get("nvars")
        return Hypersurface(parse_poly(data["poly"], nv))
    if kind == "linear":
        return LinearSubvariety([[Fraction(x) for x in row] for row in data["psi"]])
    if kind == "parametrized":
        nv = int(data.get("source_vars", 2))
        return ParametrizedImage([parse_poly(g, nv) for g in data["components"]])
    raise ValueError(f"unknown variety type {kind!r}")


def zoo() -> dict[str, VarietySpec]:
    """The small test varieties: P^1, P^2, a conic, the twisted cubic, a quadric surface."""
    from .poly import parse_poly

    return {
        "P1": FullSpace(1),
        "P2": FullSpace(2),
        "conic": Hypersurface(parse_poly("x0 x2 - x1^2", 3)),
        "twisted_cubic": ParametrizedImage([parse_poly(s, 2) for s in
                                            ("x0^3", "x0^2 x1", "x0 x1^2", "x1^3")]),
        "quadric": Hypersurface(parse_poly("x0 x3 - x1 x2", 4)),
    }
