"""Chow forms of the supported varieties, Chow weights and related checks.

A Chow form of an n-dimensional Y in P^R lives in n+1 blocks of R+1 variables
u^(0), ..., u^(n); block h occupies flat variables h*(R+1) .. h*(R+1)+R.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .fields import FieldElement
from .linalg import nullspace, poly_det, rank
from .logheight import DEFAULT_PREC, LogHeight, log_integer
from .poly import (BlockPoly, HomogeneousPoly, Poly, QuadraticSurd, multinomial, poly_heights,
                   poly_root, veronese_monomials)
from .variety import (FullSpace, Hypersurface, LinearSubvariety, ParametrizedImage,
                      PresentationError, SizeGuardError, VarietySpec, binary_gcd_degree,
                      degree_dimension, monomial_weight)

MAX_FORM_TERMS = 1_000_000


@dataclass
class ChowForm:
    body: BlockPoly
    n: int
    R: int
    degree: int  # per-block degree of body
    provenance: str
    power: int = 1  # body is F_Y ** power

    @property
    def blocks(self):
        return self.body.blocks

    def __repr__(self):
        flag = f", power={self.power}" if self.power != 1 else ""
        return f"ChowForm({self.provenance}, n={self.n}, R={self.R}, D={self.degree}{flag})"


@dataclass
class ModifiedChowForm:
    body: BlockPoly
    n: int
    R: int
    degree: int
    delta: int


class UnsupportedVariety(ValueError):
    pass


def _u(h: int, i: int, R: int, n: int) -> Poly:
    nv = (n + 1) * (R + 1)
    return Poly.variable(h * (R + 1) + i, nv)


def normalize_form(f: Poly) -> Poly:
    """Primitive integer coefficients with positive lex-leading coefficient.

    Forms with irrational coefficients are made monic instead.
    """
    if not f.terms:
        raise ValueError("zero form")
    lead = max(f.terms)
    if any(isinstance(c, FieldElement) and c.b for c in f.terms.values()):
        return f * (1 / f.terms[lead])
    qs = {m: Fraction(c.a if isinstance(c, FieldElement) else c) for m, c in f.terms.items()}
    den = math.lcm(*(q.denominator for q in qs.values()))
    g = math.gcd(*(int(q * den) for q in qs.values()))
    scale = Fraction(den, g)
    if qs[lead] < 0:
        scale = -scale
    return Poly(f.nvars, {m: q * scale for m, q in qs.items()})


def _wrap(f: Poly, n: int, R: int, provenance: str, power: int = 1) -> ChowForm:
    body = BlockPoly([R + 1] * (n + 1), normalize_form(f).terms)
    degs = set(body.block_degrees())
    if len(degs) != 1:
        raise AssertionError(f"unequal block degrees {degs}")
    return ChowForm(body, n, R, degs.pop(), provenance, power)


def sylvester_resultant(a: Sequence[Poly], b: Sequence[Poly]) -> Poly:
    """Resultant of two binary forms of one degree e, given by coefficient lists
    ``a[j]`` of ``t0^(e-j) t1^j`` (the coefficients may be polynomials)."""
    e = len(a) - 1
    if len(b) != e + 1:
        raise ValueError("forms must share a degree")
    nv = a[0].nvars
    zero = Poly(nv)
    size = 2 * e
    M = []
    for r in range(e):
        M.append([zero] * r + list(a) + [zero] * (e - 1 - r))
    for r in range(e):
        M.append([zero] * r + list(b) + [zero] * (e - 1 - r))
    assert all(len(row) == size for row in M)
    return poly_det(M)


def _binary_coeffs(g: Poly, e: int) -> list:
    return [g.terms.get((e - j, j), Fraction(0)) for j in range(e + 1)]


def chow_form(Y: VarietySpec) -> ChowForm:
    """Chow form of Y, normalized; powers from non-birational parametrizations are flagged."""
    cache = Y.__dict__.get("_chow")
    if cache is not None:
        return cache
    R = Y.R
    if isinstance(Y, FullSpace):
        n = Y.n
        M = [[_u(h, j, R, n) for j in range(n + 1)] for h in range(n + 1)]
        F = _wrap(poly_det(M), n, R, "determinant")
    elif isinstance(Y, LinearSubvariety):
        n = Y.n
        M = [[sum((_u(h, i, R, n) * Y.psi[i][k] for i in range(R + 1)), Poly((n + 1) * (R + 1)))
              for k in range(n + 1)] for h in range(n + 1)]
        F = _wrap(poly_det(M), n, R, "linear determinant")
    elif isinstance(Y, Hypersurface):
        n = R - 1
        rows = [[_u(h, j, R, n) for j in range(R + 1)] for h in range(n + 1)]
        point = []
        for i in range(R + 1):
            minor = [[row[j] for j in range(R + 1) if j != i] for row in rows]
            p = poly_det(minor)
            point.append(p if i % 2 == 0 else -p)
        F = _wrap(Y.f.substitute(point), n, R, "hypersurface at Cramer point")
    elif isinstance(Y, ParametrizedImage):
        if Y.source_dim != 1:
            raise UnsupportedVariety("Chow forms of parametrized images need a P^1 source")
        n = 1
        e = Y.e
        nv = 2 * (R + 1)
        forms = []
        for h in range(2):
            coeffs = [Poly(nv) for _ in range(e + 1)]
            for i, g in enumerate(Y.g):
                for j, c in enumerate(_binary_coeffs(g, e)):
                    if c:
                        coeffs[j] = coeffs[j] + _u(h, i, R, n) * c
            forms.append(coeffs)
        res = sylvester_resultant(forms[0], forms[1])
        k = Y.fibre_degree
        F = _wrap(res, n, R, "Sylvester resultant", power=k)
    else:
        raise UnsupportedVariety(f"no Chow form construction for {Y!r}")
    if F.body.num_terms() > MAX_FORM_TERMS:
        raise SizeGuardError("Chow form too large")
    Y.__dict__["_chow"] = F
    return F


def reduced_chow_form(Y: VarietySpec) -> ChowForm:
    """F_Y itself, extracting an exact root when the construction gave a power."""
    F = chow_form(Y)
    if F.power == 1:
        return F
    root = poly_root(F.body, F.power)
    if root is None:
        raise PresentationError("resultant is not an exact power")
    return _wrap(root, F.n, F.R, F.provenance + " (root)")


# -- weights --------------------------------------------------------------------

def _block_weight(F: ChowForm, mon: tuple, c: Sequence) -> Fraction:
    R1 = F.R + 1
    total = Fraction(0)
    for idx, e in enumerate(mon):
        if e:
            total += e * Fraction(c[idx % R1])
    return total


def chow_weight(F: ChowForm, c: Sequence) -> Fraction:
    """e_Y(c): the largest c-weight of a monomial of F."""
    if len(c) != F.R + 1:
        raise ValueError(f"weight vector needs {F.R + 1} entries")
    if not F.body.terms:
        raise ValueError("zero form")
    return max(_block_weight(F, mon, c) for mon in F.body.terms)


def normalized_chow_weight(Y: VarietySpec, c: Sequence) -> Fraction:
    """e_Y(c) / ((n+1) D), computed with the block degree of the actual form."""
    F = chow_form(Y)
    return chow_weight(F, c) / ((F.n + 1) * F.degree)


def evaluate_at_units(F: ChowForm, I: Sequence[int]):
    """F(e_{i_0}, ..., e_{i_n}): the coefficient of prod_h (u^(h)_{i_h})^D."""
    if len(I) != F.n + 1:
        raise ValueError(f"need {F.n + 1} indices")
    mon = [0] * ((F.n + 1) * (F.R + 1))
    for h, i in enumerate(I):
        mon[h * (F.R + 1) + i] = F.degree
    return F.body.terms.get(tuple(mon), Fraction(0))


def coordinate_subset_check(Y: VarietySpec, I: Sequence[int]) -> bool:
    """True when Y misses the linear space {y_i = 0 : i in I}."""
    return bool(evaluate_at_units(chow_form(Y), I))


def admissible_subsets(Y: VarietySpec) -> list[tuple]:
    F = chow_form(Y)
    return [I for I in combinations(range(Y.R + 1), F.n + 1) if evaluate_at_units(F, I)]


def verify_lemma_3_1(Y: VarietySpec, c: Sequence, I: Sequence[int]) -> Fraction:
    """Exact slack of  e_Y(c)/((n+1)D) >= (c_{i_0} + ... + c_{i_n})/(n+1)."""
    if not coordinate_subset_check(Y, I):
        raise ValueError("subset meets Y")
    F = chow_form(Y)
    lhs = normalized_chow_weight(Y, c)
    rhs = sum((Fraction(c[i]) for i in I), Fraction(0)) / (F.n + 1)
    slack = lhs - rhs
    if slack < 0:
        raise AssertionError(f"coordinate-subset inequality fails: slack {slack}")
    return slack


def verify_hilbert_chow_weights(Y: VarietySpec, m: int, c: Sequence) -> Fraction:
    """Exact slack of the lower bound for s_Y(m, c) in terms of e_Y(c)."""
    from .variety import hilbert_function, hilbert_weight

    n, D = degree_dimension(Y)
    s, _ = hilbert_weight(Y, m, c)
    H = hilbert_function(Y, m)
    lhs = s / (m * H)
    rhs = normalized_chow_weight(Y, c) - Fraction((2 * n + 1) * D, m) * max(Fraction(x) for x in c)
    return lhs - rhs


# -- Delta-Chow forms -------------------------------------------------------------

def veronese_image(X: VarietySpec, delta: int) -> VarietySpec:
    """phi_Delta(X) as a presentation; X must be a curve parametrized by P^1 or P^1 itself."""
    if delta < 1:
        raise ValueError("Delta must be positive")
    if isinstance(X, FullSpace) and X.n == 1:
        param = [Poly.variable(0, 2), Poly.variable(1, 2)]
    elif isinstance(X, LinearSubvariety) and X.n == 1:
        param = X.forms
    elif isinstance(X, ParametrizedImage) and X.source_dim == 1:
        param = X.g
    elif delta == 1:
        return X
    else:
        raise UnsupportedVariety("Delta-Chow forms need a curve parametrized by P^1")
    comps = []
    for mon in veronese_monomials(delta, len(param) - 1):
        p = Poly.constant(1, 2)
        for i, e in enumerate(mon):
            if e:
                p = p * param[i] ** e
        comps.append(p)
    return ParametrizedImage(comps)


def delta_chow_form(X: VarietySpec, delta: int) -> ChowForm:
    if delta == 1:
        return chow_form(X)
    return chow_form(veronese_image(X, delta))


def modified_chow_form(X: VarietySpec, delta: int) -> ModifiedChowForm:
    """G_{X,Delta}: substitute beta(m)^(1/2) u_m for each variable u_m."""
    F = delta_chow_form(X, delta)
    N = X.R
    betas = [multinomial(mon) for mon in veronese_monomials(delta, N)]
    R1 = len(betas)
    if R1 != F.R + 1:
        raise AssertionError("block size mismatch")
    terms = {}
    for mon, c in F.body.terms.items():
        square, odd = 1, 1
        for idx, e in enumerate(mon):
            if e:
                b = betas[idx % R1]
                square *= b ** (e // 2)
                if e % 2:
                    odd *= b
        terms[mon] = QuadraticSurd(Fraction(c) * square, odd)
    body = BlockPoly(F.body.blocks, terms)
    return ModifiedChowForm(body, F.n, F.R, F.degree, delta)


def check_modified_form_heights(X: VarietySpec, delta: int, prec: int = DEFAULT_PREC) -> LogHeight:
    """Slack of |h1(F_{X,Delta}) - h1(G_{X,Delta})| <= (n+1) d Delta^n log(Delta!)/2."""
    n, d = degree_dimension(X)
    F = delta_chow_form(X, delta)
    G = modified_chow_form(X, delta)
    diff = poly_heights([F.body], prec)[1] - poly_heights([G.body], prec)[1]
    bound = log_integer(math.factorial(delta), prec) * Fraction((n + 1) * d * delta ** n, 2)
    s1 = (bound - diff).sign(prec)
    s2 = (bound + diff).sign(prec)
    if s1 is not None and s1 < 0 or s2 is not None and s2 < 0:
        raise AssertionError("(F, G) height comparison violated")
    upper = log_integer(delta, prec) * Fraction((n + 1) * d * delta ** (n + 1), 2) if delta > 1 \
        else LogHeight()
    if (upper - bound).sign(prec) < 0:
        raise AssertionError("log(Delta!) <= Delta log Delta failed")
    diff_abs = diff if (diff.sign(prec) or 0) >= 0 else -diff
    return bound - diff_abs


def variety_height(Y: VarietySpec, prec: int = DEFAULT_PREC) -> LogHeight:
    """h(Y) as the height of its (reduced) Chow form."""
    return poly_heights([reduced_chow_form(Y).body], prec)[0]


def check_delta_form_height(X: VarietySpec, delta: int, prec: int = DEFAULT_PREC) -> LogHeight:
    """Slack of h1(F_{X,Delta}) <= Delta^(n+1) h(F_X) + 5(n+1) d Delta^(n+1) log(N+Delta)."""
    n, d = degree_dimension(X)
    N = X.R
    lhs = poly_heights([delta_chow_form(X, delta).body], prec)[1]
    rhs = variety_height(X, prec) * delta ** (n + 1) + \
        log_integer(N + delta, prec) * (5 * (n + 1) * d * delta ** (n + 1))
    slack = rhs - lhs
    if slack.sign(prec) < 0:
        raise AssertionError("Delta-Chow form height bound violated")
    return slack


def verify_prop_2_5(X: VarietySpec, gs: Sequence[Poly], prec: int = DEFAULT_PREC) -> LogHeight:
    """Slack of the height bound for Y = phi(X), X a curve with P^1 parametrization."""
    from .poly import compose

    if not (isinstance(X, FullSpace) and X.n == 1):
        if not (isinstance(X, (LinearSubvariety, ParametrizedImage)) and degree_dimension(X)[0] == 1):
            raise UnsupportedVariety("only curves parametrized by P^1")
    degs = {g.total_degree() for g in gs}
    if len(degs) != 1:
        raise ValueError("components must share one degree")
    delta = degs.pop()
    if isinstance(X, FullSpace):
        param = [Poly.variable(0, 2), Poly.variable(1, 2)]
    elif isinstance(X, LinearSubvariety):
        param = X.forms
    else:
        param = X.g
    pulled = [compose(g, param) for g in gs]
    if binary_gcd_degree(pulled) > 0:
        raise ValueError("the components have a common zero on X")
    Y = ParametrizedImage(pulled)
    n, d = degree_dimension(X)
    N, R = X.R, len(gs) - 1
    hY = variety_height(Y, prec)
    h1g = poly_heights(list(gs), prec)[1]
    bound = (variety_height(X, prec) * delta ** (n + 1)
             + h1g * ((n + 1) * d * delta ** n)
             + log_integer(N + delta, prec) * (5 * (n + 1) * d * delta ** (n + 1))
             + (log_integer(R + 1, prec) * (3 * (n + 1) * d * delta ** n) if R > 0 else LogHeight()))
    slack = bound - hY
    if slack.sign(prec) < 0:
        raise AssertionError("image height bound violated")
    return slack


# -- defining property ----------------------------------------------------------

def _random_vector(rng: random.Random, size: int, bound: int = 9) -> list:
    return [Fraction(rng.randint(-bound, bound)) for _ in range(size)]


def _through(rng, point, size):
    u = _random_vector(rng, size)
    j = next(i for i, x in enumerate(point) if x)
    dot = sum((a * b for a, b in zip(u, point)), Fraction(0))
    u[j] -= dot / point[j]
    return u


def sample_point(Y: VarietySpec, rng: random.Random) -> list:
    """A rational point of Y (small search for hypersurfaces)."""
    if isinstance(Y, FullSpace):
        while True:
            p = _random_vector(rng, Y.R + 1)
            if any(p):
                return p
    if isinstance(Y, LinearSubvariety):
        while True:
            t = _random_vector(rng, Y.n + 1)
            if any(t):
                return [sum((a * b for a, b in zip(row, t)), Fraction(0)) for row in Y.psi]
    if isinstance(Y, ParametrizedImage):
        while True:
            t = _random_vector(rng, Y.source_dim + 1)
            y = Y.image(t) if any(t) else None
            if y and any(y):
                return y
    if isinstance(Y, Hypersurface):
        pts = Y.__dict__.get("_small_points")
        if pts is None:
            pts = _small_points(Y)
            Y.__dict__["_small_points"] = pts
        if not pts:
            raise UnsupportedVariety("no small rational points found")
        return list(rng.choice(pts))
    raise UnsupportedVariety(repr(Y))


def _small_points(Y: Hypersurface, bound: int = 4) -> list:
    from itertools import product

    out = []
    for p in product(range(-bound, bound + 1), repeat=Y.R + 1):
        if any(p) and next(x for x in p if x) > 0 and math.gcd(*p) == 1:
            if not Y.f.evaluate(p):
                out.append(tuple(Fraction(x) for x in p))
    return out


def meets(Y: VarietySpec, hyperplanes: Sequence[Sequence]) -> bool:
    """Whether Y and the given hyperplanes share a point (computed without F_Y)."""
    n = len(hyperplanes) - 1
    if isinstance(Y, FullSpace):
        return rank(hyperplanes) < Y.R + 1
    if isinstance(Y, LinearSubvariety):
        M = [[sum((u[i] * Y.psi[i][k] for i in range(Y.R + 1)), Fraction(0))
              for k in range(Y.n + 1)] for u in hyperplanes]
        return rank(M) < Y.n + 1
    if isinstance(Y, Hypersurface):
        ker = nullspace([list(u) for u in hyperplanes])
        if len(ker) >= 2:
            return True  # a line or more always meets a hypersurface
        if not ker:
            return False
        return not Y.f.evaluate(ker[0])
    if isinstance(Y, ParametrizedImage) and Y.source_dim == 1:
        forms = [sum((g * u[i] for i, g in enumerate(Y.g)), Poly(2)) for u in hyperplanes]
        forms = [f for f in forms if f.terms]
        if not forms:
            return True
        return binary_gcd_degree(forms) > 0
    raise UnsupportedVariety(repr(Y))


def check_defining_property(Y: VarietySpec, trials: int = 200, seed: int = 0) -> dict:
    """Compare vanishing of F_Y with direct intersection tests on random hyperplanes.

    Half of the tuples pass through a point of Y, half are unconstrained.
    """
    rng = random.Random(seed)
    F = chow_form(Y)
    n, R = F.n, F.R
    mismatches = []
    vanishing = 0
    for t in range(trials):
        if t % 2 == 0:
            pt = sample_point(Y, rng)
            hyps = [_through(rng, pt, R + 1) for _ in range(n + 1)]
        else:
            hyps = [_random_vector(rng, R + 1) for _ in range(n + 1)]
        value = F.body.evaluate([x for u in hyps for x in u])
        truth = meets(Y, hyps)
        vanishing += value == 0
        if (value == 0) != truth:
            mismatches.append(hyps)
    return {"trials": trials, "vanishing": vanishing, "mismatches": len(mismatches),
            "examples": mismatches[:3]}
