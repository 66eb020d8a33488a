"""Experiment driver: enumerate rational points of bounded height on X and test
the product inequality for a family of systems of forms at finitely many places.

All positive statements concern solutions at accessible heights.  The height
condition under which the finiteness theorem applies is astronomically large,
so the twisted-height implication is checked conditionally and reported as such.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import sympy

from .bounds import (CoveringSet, TheoremInputs, bounds_A, systems_bound, theta_for)
from .fields import (QQ, NumberField, Place, finite_place, infinite_place, log_abs,
                     places_above, point_height)
from .linalg import nullspace, rank
from .logheight import (DEFAULT_PREC, LogHeight, UndecidableError, decide_sign, log_integer,
                        log_max)
from .poly import (HomogeneousPoly, Poly, format_poly, monomial_value, parse_poly,
                   poly_heights, poly_norms, veronese_monomials)
from .variety import (FullSpace, Hypersurface, LinearSubvariety, ParametrizedImage,
                      VarietySpec, binary_gcd_degree, degree_dimension, ideal_piece,
                      variety_from_json)

MAX_CANDIDATES = 10_000_000
MAX_STREAMED = 2_000_000_000
FLAG_SAMPLE = 200  # flagged points listed individually; the rest are only counted
GROEBNER_GUARD = 64

HEADER = ("Solutions are reported at accessible heights only. The height condition "
          "h(x) >= A3*H of the finiteness theorem is never met here, so the "
          "twisted-height implication is checked conditionally: cases where its "
          "hypotheses hold are listed separately from vacuous ones.")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class GuardExceeded(ValueError):
    pass


# -- configuration ----------------------------------------------------------------

def _parse_place(key: str) -> Place:
    key = str(key).strip()
    if key in ("inf", "oo", "infinity"):
        return infinite_place(QQ)
    try:
        p = int(key)
    except ValueError as exc:
        raise ConfigError(f"bad place {key!r}") from exc
    if not sympy.isprime(p):
        raise ConfigError(f"{p} is not prime")
    return finite_place(p)


@dataclass
class ExperimentConfig:
    X: VarietySpec
    systems: dict  # Place -> list of HomogeneousPoly
    delta: Fraction
    height_bound: int  # points with max |coordinate| <= height_bound, i.e. h <= log bound
    fit_degree_cap: int = 1
    fit_min_height: int = 1  # fits and "nontrivial" use points with exp h(x) > this
    param_bound: int | None = None
    precision: int = DEFAULT_PREC
    seed: int = 0
    name: str = "census"

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ConfigError("delta must lie in (0, 1]")
        if self.height_bound < 1:
            raise ConfigError("height_bound must be a positive integer")
        if not self.systems:
            raise ConfigError("no places given")
        n, _ = degree_dimension(self.X)
        for v, fs in self.systems.items():
            if len(fs) != n + 1:
                raise ConfigError(f"place {v.label()} needs {n + 1} forms, got {len(fs)}")
            for f in fs:
                if f.nvars != self.X.R + 1 or not f.terms or not f.is_homogeneous():
                    raise ConfigError(f"form {f.to_text()} is not a nonzero form on P^{self.X.R}")

    @property
    def n(self) -> int:
        return degree_dimension(self.X)[0]

    @property
    def places(self) -> list:
        return list(self.systems)

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        try:
            X = variety_from_json(data["variety"])
            nv = X.R + 1
            systems = {}
            for key, forms in data["systems"].items():
                systems[_parse_place(key)] = [parse_poly(t, nv) for t in forms]
            return cls(
                X=X, systems=systems, delta=Fraction(str(data["delta"])),
                height_bound=int(data["height_bound"]),
                fit_degree_cap=int(data.get("fit_degree_cap", 1)),
                fit_min_height=int(data.get("fit_min_height", 1)),
                param_bound=data.get("param_bound"),
                precision=int(data.get("precision", DEFAULT_PREC)),
                seed=int(data.get("seed", 0)),
                name=str(data.get("name", "census")))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_json(data)

    def to_json(self) -> dict:
        return {"name": self.name, "variety": self.X.to_json(),
                "systems": {v.label(): [f.to_text() for f in fs] for v, fs in self.systems.items()},
                "delta": str(self.delta), "height_bound": self.height_bound,
                "fit_degree_cap": self.fit_degree_cap, "fit_min_height": self.fit_min_height,
                "param_bound": self.param_bound, "precision": self.precision, "seed": self.seed}


def _irrational(f: Poly) -> NumberField | None:
    from .fields import FieldElement

    for c in f.terms.values():
        if isinstance(c, FieldElement) and c.b:
            return c.field
    return None


# -- common zeros of the forms ----------------------------------------------------

def _to_sympy(f: Poly, syms):
    from .variety import _to_sympy_coeff

    return sum((_to_sympy_coeff(c) * sympy.Mul(*[s ** e for s, e in zip(syms, mon)])
                for mon, c in f.terms.items()), sympy.Integer(0))


def _no_projective_zero(polys: Sequence[Poly]) -> bool:
    """Exact: the forms have no common zero in projective space (Groebner, chart by chart)."""
    polys = [p for p in polys if p.terms]
    nv = polys[0].nvars
    if math.prod(p.total_degree() for p in polys) > GROEBNER_GUARD:
        raise GuardExceeded("degree product above the exact elimination guard")
    if nv == 2:
        return binary_gcd_degree(polys) == 0
    syms = sympy.symbols(f"x0:{nv}")
    exprs = [_to_sympy(p, syms) for p in polys]
    ext = [_irrational(p) for p in polys if _irrational(p)]
    opts = {"extension": sympy.sqrt(ext[0].d)} if ext else {}
    for j in range(nv):
        chart = [e.subs(syms[j], 1) for e in exprs]
        rest = [s for k, s in enumerate(syms) if k != j]
        G = sympy.groebner(chart, *rest, order="grevlex", **opts)
        if list(G.exprs) != [1]:
            return False
    return True


def _pullback_forms(X: VarietySpec, fs: Sequence[Poly]) -> list:
    if isinstance(X, FullSpace):
        return list(fs)
    if isinstance(X, Hypersurface):
        return [X.f] + list(fs)
    if isinstance(X, LinearSubvariety):
        nv = X.n + 1
        lin = [Poly(nv, {tuple(int(k == j) for k in range(nv)): c for j, c in enumerate(row) if c})
               for row in X.psi]
        return [f.substitute(lin) for f in fs]
    if isinstance(X, ParametrizedImage):
        return [f.substitute(X.g) for f in fs]
    raise ConfigError(f"unsupported variety {X!r}")


def check_condition_13(config: ExperimentConfig) -> dict:
    """Per place: True when X and {f_0 = ... = f_n = 0} do not meet."""
    return {v: _no_projective_zero(_pullback_forms(config.X, fs))
            for v, fs in config.systems.items()}


# -- the reduction --------------------------------------------------------------------

@dataclass
class Reduction:
    g: list  # distinct forms g_i = f_i^(Delta / deg f_i)
    f: list  # the distinct f_i
    index: dict  # (place, j) -> i
    Delta: int
    C: int
    R: int
    Y: VarietySpec | None
    rational: bool


def reduce_system(config: ExperimentConfig) -> Reduction:
    """Distinct conjugate-closed f_i, their powers g_i of common degree, and Y = phi(X)."""
    distinct: list = []
    index = {}

    def slot(f):
        for k, h in enumerate(distinct):
            if h == f:
                return k
        distinct.append(f)
        return len(distinct) - 1

    C = 1
    for v, fs in config.systems.items():
        for j, f in enumerate(fs):
            index[(v, j)] = slot(f)
            if _irrational(f):
                C = 2
                slot(f.conjugate())
    Delta = math.lcm(*(f.total_degree() for f in distinct))
    g = [HomogeneousPoly.from_poly(f ** (Delta // f.total_degree())) for f in distinct]
    rational = C == 1
    Y = None
    X = config.X
    if rational:
        if isinstance(X, FullSpace) and Delta == 1:
            psi = [[f.terms.get(tuple(int(k == j) for k in range(X.R + 1)), Fraction(0))
                    for j in range(X.R + 1)] for f in g]
            if rank(psi) == X.R + 1:
                Y = LinearSubvariety(psi)
        elif isinstance(X, FullSpace) and X.R == 1:
            Y = ParametrizedImage(g)
        elif isinstance(X, ParametrizedImage) and X.source_dim == 1:
            Y = ParametrizedImage([gi.substitute(X.g) for gi in g])
    return Reduction(g, distinct, index, Delta, C, len(g) - 1, Y, rational)


def h_one_f(f: Poly, prec: int = DEFAULT_PREC) -> LogHeight:
    """h(1, f): height of the vector (1, coefficients of f)."""
    return point_height([Fraction(1)] + list(f.terms.values()), prec=prec)


def theorem_H(config: ExperimentConfig, prec: int = DEFAULT_PREC) -> LogHeight:
    """H = log(2N) + h(X) + max h(1, f_i^(v))."""
    from .chow import variety_height

    hX = variety_height(config.X, prec)
    hf = log_max([h_one_f(f, prec) for fs in config.systems.values() for f in fs], prec)
    return log_integer(2 * config.X.R, prec) + hX + hf


def theorem_inputs(config: ExperimentConfig, red: Reduction) -> TheoremInputs:
    _, d = degree_dimension(config.X)
    return TheoremInputs(config.n, config.X.R, d, len(config.systems), red.C,
                         red.Delta, config.delta)


def check_reduction_estimates(config: ExperimentConfig, red: Reduction,
                              prec: int = DEFAULT_PREC) -> dict:
    """Slacks of  h1(g) <= 6 Delta^2 C n s H  and  h(Y) <= 25 n^2 d Delta^(n+2) C s H."""
    from .chow import UnsupportedVariety, variety_height

    n, d = degree_dimension(config.X)
    s = len(config.systems)
    H = theorem_H(config, prec)
    h1 = poly_heights(red.g, prec)[1]
    out = {"H": H, "h1_g": h1, "slack_h1": H * (6 * red.Delta ** 2 * red.C * n * s) - h1}
    if red.Y is not None:
        try:
            hY = variety_height(red.Y, prec)
            out["h_Y"] = hY
            out["slack_hY"] = H * (25 * n * n * d * red.Delta ** (n + 2) * red.C * s) - hY
        except (UnsupportedVariety, NotImplementedError, ValueError):
            pass
    return out


# -- enumeration --------------------------------------------------------------------

def canonical(point: Sequence) -> tuple:
    """Primitive integer representative with first nonzero coordinate positive."""
    qs = [Fraction(x) for x in point]
    if not any(qs):
        raise ValueError("zero point")
    den = math.lcm(*(q.denominator for q in qs))
    ints = [int(q * den) for q in qs]
    g = math.gcd(*ints)
    ints = [i // g for i in ints]
    if next(i for i in ints if i) < 0:
        ints = [-i for i in ints]
    return tuple(ints)


def projective_chunks(n: int, B: int) -> Iterator[np.ndarray]:
    """Canonical primitive points of P^n with max |x_i| <= B, as int64 arrays (rows)."""
    if n == 0:
        yield np.array([[1]], dtype=np.int64)
        return
    rng = np.arange(-B, B + 1, dtype=np.int64)
    for x0 in range(1, B + 1):
        grids = np.meshgrid(*([rng] * n), indexing="ij")
        rest = np.stack([g.ravel() for g in grids], axis=1)
        g = np.full(rest.shape[0], x0, dtype=np.int64)
        for k in range(n):
            g = np.gcd(g, rest[:, k])
        rest = rest[g == 1]
        yield np.concatenate([np.full((rest.shape[0], 1), x0, dtype=np.int64), rest], axis=1)
    for chunk in projective_chunks(n - 1, B):
        yield np.concatenate([np.zeros((chunk.shape[0], 1), dtype=np.int64), chunk], axis=1)


def primitive_count_oracle(n: int, B: int) -> int:
    """Number of points of P^n(Q) with primitive coordinates bounded by B (Moebius count)."""
    total = 0
    for d in range(1, B + 1):
        mu = sympy.mobius(d)
        if mu:
            total += mu * ((2 * (B // d) + 1) ** (n + 1) - 1)
    return total // 2


def _eval_int_rows(f: Poly, rows: np.ndarray) -> np.ndarray:
    """Exact values of an integer-coefficient form on integer rows (object dtype if needed)."""
    B = int(np.abs(rows).max()) if rows.size else 0
    bound = sum(abs(int(c)) for c in f.terms.values()) * max(B, 1) ** f.total_degree()
    arr = rows if bound < (1 << 62) else rows.astype(object)
    out = np.zeros(rows.shape[0], dtype=arr.dtype)
    for mon, c in f.terms.items():
        term = np.full(rows.shape[0], int(c), dtype=arr.dtype)
        for k, e in enumerate(mon):
            if e:
                term = term * arr[:, k] ** e
        out = out + term
    return out


def _integral(f: Poly) -> tuple[Poly, int] | None:
    """(den * f with integer coefficients, den) for rational f, else None."""
    from .fields import FieldElement

    qs = {}
    for mon, c in f.terms.items():
        if isinstance(c, FieldElement):
            if c.b:
                return None
            c = c.a
        qs[mon] = Fraction(c)
    den = math.lcm(*(q.denominator for q in qs.values()))
    return Poly(f.nvars, {m: int(q * den) for m, q in qs.items()}), den


def enumerate_points(X: VarietySpec, B: int, param_bound: int | None = None,
                     guard: int = MAX_CANDIDATES) -> Iterator[tuple]:
    """Canonical rational points of X with max |coordinate| <= B (h <= log B)."""
    if isinstance(X, (FullSpace, Hypersurface)):
        if X.R > 3:
            raise GuardExceeded("enumeration supports ambient dimension at most 3")
        cand = (2 * B + 1) ** (X.R + 1) // 2
        if cand > guard:
            raise GuardExceeded(f"{cand} candidates exceed the guard {guard}")
        filt = _integral(X.f) if isinstance(X, Hypersurface) else None
        for chunk in projective_chunks(X.R, B):
            if filt is not None:
                chunk = chunk[_eval_int_rows(filt[0], chunk) == 0]
            for row in chunk:
                yield tuple(int(v) for v in row)
        return
    if isinstance(X, ParametrizedImage):
        if X.source_dim != 1:
            raise GuardExceeded("parametrized enumeration needs a P^1 source")
        T = param_bound or B
        if (2 * T + 1) ** 2 // 2 > guard:
            raise GuardExceeded("parameter range exceeds the guard")
        seen = set()
        out = []
        for chunk in projective_chunks(1, T):
            for t in chunk:
                y = canonical(X.image([Fraction(int(v)) for v in t]))
                if max(abs(v) for v in y) <= B and y not in seen:
                    seen.add(y)
                    out.append(y)
        yield from sorted(out)
        return
    raise GuardExceeded(f"enumeration not supported for {X!r}")


# -- evaluating the inequality ------------------------------------------------------------

@dataclass
class SolutionRecord:
    point: tuple
    h: LogHeight
    lhs_log: LogHeight | None
    threshold_log: LogHeight
    margin: LogHeight | None
    is_solution: bool | None  # None: undecidable
    flagged: bool = False
    flag_reason: str = ""
    passes_17: bool = False
    precision: int = DEFAULT_PREC

    def to_json(self) -> dict:
        return {
            "point": list(self.point), "h": self.h.to_json(),
            "lhs_log": self.lhs_log.to_json() if self.lhs_log is not None else "-inf",
            "threshold_log": self.threshold_log.to_json(),
            "margin": self.margin.to_json() if self.margin is not None else "-inf",
            "solution": self.is_solution, "flagged": self.flagged,
            "flag_reason": self.flag_reason, "passes_17": self.passes_17,
        }


def _place_value(v: Place, value, prec: int) -> LogHeight:
    """max over the conjugates of value of log|.|_v, each extension unnormalized to |.|_v."""
    from .fields import FieldElement

    if isinstance(value, FieldElement) and value.b:
        return log_max([log_abs(w, value, prec) / w.weight
                        for w in places_above(value.field, v)], prec)
    q = value.a if isinstance(value, FieldElement) else Fraction(value)
    return log_abs(v, q, prec)


def _norm_log(v: Place, x: Sequence[int], prec: int) -> LogHeight:
    if v.p is not None:
        return LogHeight()  # primitive integer points have p-adic norm 1
    return log_integer(max(abs(c) for c in x), prec)


def _terms(config: ExperimentConfig, x: tuple, prec: int):
    """Per place list of (1/deg f) log|f(x)|_v, or None where some f vanishes."""
    xs = [Fraction(c) for c in x]
    out = {}
    for v, fs in config.systems.items():
        vals = []
        for f in fs:
            val = f.evaluate(xs)
            if not val:
                return None, f"{f.to_text()} vanishes at {v.label()}"
            vals.append(_place_value(v, val, prec) / f.total_degree())
        out[v] = vals
    return out, ""


def lhs_streaming(config: ExperimentConfig, x: tuple, prec: int = DEFAULT_PREC) -> LogHeight | None:
    """Place by place: sum_v (sum_i log|f_i|_v / deg f_i - (n+1) log ||x||_v)."""
    terms, _ = _terms(config, x, prec)
    if terms is None:
        return None
    total = LogHeight()
    for v, vals in terms.items():
        part = LogHeight()
        for t in vals:
            part = part + t
        total = total + part - _norm_log(v, x, prec) * (config.n + 1)
    return total


def lhs_grouped(config: ExperimentConfig, x: tuple, prec: int = DEFAULT_PREC) -> LogHeight | None:
    """The same quantity accumulated index by index across places."""
    terms, _ = _terms(config, x, prec)
    if terms is None:
        return None
    total = LogHeight()
    for i in range(config.n + 1):
        for v in terms:
            total = total + terms[v][i] - _norm_log(v, x, prec)
    return total


def _above_height_floor(h: LogHeight, logA3: LogHeight, H: LogHeight) -> bool:
    """h(x) >= A3 * H, compared through logarithms of enclosures."""
    hv = float(h)
    Hv = float(H)
    if hv <= 0 or Hv <= 0:
        return False
    return math.log(hv) >= float(logA3) + math.log(Hv) + 1e-9


def evaluate_inequality(x: Sequence, config: ExperimentConfig, prec: int | None = None,
                        logA3: LogHeight | None = None, H: LogHeight | None = None) -> SolutionRecord:
    """Evaluate the product inequality at x with precision escalation on near ties."""
    prec = prec or config.precision
    x = canonical(x)
    h = log_integer(max(abs(c) for c in x), prec)
    thr = h * -(config.n + 1 + config.delta)
    lhs = lhs_streaming(config, x, prec)
    if lhs is None:
        _, reason = _terms(config, x, prec)
        return SolutionRecord(x, h, None, thr, None, True, True, reason, False, prec)
    cache = {prec: lhs}

    def build(p):
        if p not in cache:
            cache[p] = lhs_streaming(config, x, p)
        return cache[p] - thr

    try:
        sgn, used = decide_sign(build, prec)
        sol = sgn <= 0
    except UndecidableError:
        sol, used = None, 4096
    lhs = cache.get(used, lhs)
    p17 = _above_height_floor(h, logA3, H) if logA3 is not None and H is not None else False
    return SolutionRecord(x, h, lhs, thr, lhs - thr, sol, False, "", p17, used)


class _FastScreen:
    """Float screening of the margin for rational systems on P^n.

    Returns for each row +1 (certainly not a solution), -1 (some form vanishes,
    decided exactly in integers) or 0 (needs the exact evaluation).  The float error of a sum of k
    logarithms is far below 1e-12 * (1 + sum |term|), which is the margin used.
    """

    def __init__(self, config: ExperimentConfig):
        self.ok = isinstance(config.X, FullSpace)
        self.forms = []
        if not self.ok:
            return
        for v, fs in config.systems.items():
            for f in fs:
                pair = _integral(f)
                if pair is None:
                    self.ok = False
                    return
                self.forms.append((v, pair[0], pair[1], f.total_degree()))
        self.n = config.n
        self.places = list(config.systems)
        self.delta = float(config.delta)

    def screen(self, rows: np.ndarray) -> np.ndarray:
        N = rows.shape[0]
        total = np.zeros(N)
        mag = np.zeros(N)
        zero = np.zeros(N, dtype=bool)
        for v, F, den, deg in self.forms:
            val = _eval_int_rows(F, rows)
            zero |= val == 0
            safe = np.where(val == 0, 1, val)
            if v.p is None:
                lg = np.log(np.abs(safe.astype(float))) - math.log(den)
            else:
                vp = np.zeros(N)
                work = safe.copy()
                while True:
                    hit = work % v.p == 0
                    if not hit.any():
                        break
                    vp += hit
                    work = np.where(hit, work // v.p, work)
                k = 0
                dd = den
                while dd % v.p == 0:
                    dd //= v.p
                    k += 1
                lg = -(vp - k) * math.log(v.p)
            total += lg / deg
            mag += np.abs(lg) / deg
        M = np.abs(rows).max(axis=1).astype(float)
        logM = np.log(M)
        if any(v.p is None for v in self.places):
            total -= (self.n + 1) * logM
            mag += (self.n + 1) * logM
        total += (self.n + 1 + self.delta) * logM
        mag += (self.n + 1 + self.delta) * logM
        tol = 1e-12 * (1 + mag)
        out = np.where(total > tol, 1, 0)
        out[zero] = -1
        return out


# -- fitting -----------------------------------------------------------------------

@dataclass
class FitResult:
    degree: int
    forms: list  # HomogeneousPoly
    points_used: int
    nullity: int
    ideal_rank: int
    verified: bool

    def to_json(self) -> dict:
        return {"degree": self.degree, "forms": [format_poly(f) for f in self.forms],
                "points_used": self.points_used, "nullity": self.nullity,
                "ideal_rank": self.ideal_rank, "verified": self.verified}


def _primitive_form(vec: Sequence[Fraction], mons, nv: int) -> HomogeneousPoly:
    den = math.lcm(*(Fraction(c).denominator for c in vec))
    ints = [int(Fraction(c) * den) for c in vec]
    g = math.gcd(*ints)
    ints = [i // g for i in ints]
    lead = next(i for i in ints if i)
    if lead < 0:
        ints = [-i for i in ints]
    return HomogeneousPoly(nv, {m: Fraction(c) for m, c in zip(mons, ints) if c})


def fit_hypersurfaces(points: Sequence[Sequence], X: VarietySpec, m: int,
                      seed: int = 0) -> FitResult:
    """Degree-m forms through all points, modulo those vanishing on X."""
    from .chow import UnsupportedVariety, sample_point

    mons = veronese_monomials(m, X.R)
    nv = X.R + 1
    rows = [[monomial_value(mon, [Fraction(c) for c in p]) for mon in mons] for p in points]
    kernel = nullspace(rows, len(mons)) if rows else nullspace([], len(mons))
    ideal = ideal_piece(X, m).basis
    base = [list(r) for r in ideal]
    r0 = rank(base) if base else 0
    chosen = []
    current = r0
    for vec in kernel:
        r = rank(base + [vec])
        if r > current:
            base.append(vec)
            chosen.append(vec)
            current = r
    forms = [_primitive_form(v, mons, nv) for v in chosen]
    verified = True
    rng = random.Random(seed)
    for f in forms:
        if any(f.evaluate([Fraction(c) for c in p]) for p in points):
            verified = False
        cls = {}
        for mon, c in f.terms.items():
            for k, val in X.class_vector(mon).items():
                cls[k] = cls.get(k, 0) + c * val
        if not any(cls.values()):
            verified = False
        try:
            probes = [sample_point(X, rng) for _ in range(8)]
            if not any(f.evaluate(q) for q in probes):
                verified = False
        except UnsupportedVariety:
            pass
    return FitResult(m, forms, len(points), len(kernel), r0, verified)


# -- splitting into systems and the twisted-height check ---------------------------------------

def _system_terms(config: ExperimentConfig, red: Reduction, x: tuple, prec: int) -> dict:
    """(v, j) -> log(|g_i(x)|_v / (G_v ||x||_v^Delta)) for the rational case."""
    xs = [Fraction(c) for c in x]
    out = {}
    for v, fs in config.systems.items():
        one = Poly.constant(1, red.g[0].nvars)
        G = poly_norms([one] + red.g, v, prec)[1]
        nx = _norm_log(v, x, prec)
        for j in range(len(fs)):
            i = red.index[(v, j)]
            out[(v, j)] = log_abs(v, red.g[i].evaluate(xs), prec) - G - nx * red.Delta
    return out


def _choose_tuple(W: CoveringSet, A: dict, keys: list):
    vals = [float(A[k]) for k in keys]
    total = sum(vals)
    b = [Fraction(a / total) if total else Fraction(0) for a in vals]
    b[-1] = 1 - sum(b[:-1])
    if b[-1] < 0:
        b[-1] = Fraction(0)
        s = sum(b)
        b = [x / s for x in b]
    return W.cover(b)


def transfer_check(config: ExperimentConfig, red: Reduction, rec: SolutionRecord, W: CoveringSet,
                    keys: list, H: LogHeight, h1g: LogHeight, prec: int) -> dict:
    """Select the covering tuple, verify the per-place system, then compare H_{Q,c}(y) with the two bounds."""
    from .twisted import E_Y, WeightFamily, twisted_height

    n, delta, Dl = config.n, config.delta, red.Delta
    A = _system_terms(config, red, rec.point, prec)
    c = _choose_tuple(W, A, keys)
    scale = rec.h * ((n + 1 + delta / 2) * Dl)
    system_ok = all(decide_sign(lambda p, k=k, cj=cj: _system_terms(config, red, rec.point, p)[k]
                             + rec.h * (cj * (n + 1 + delta / 2) * Dl), prec)[0] <= 0
                 for k, cj in zip(keys, c))
    out = {"tuple": tuple(c), "system_ok": system_ok}
    if red.Y is None:
        out["transfer"] = "unsupported Y"
        return out
    support = {}
    for (v, j), cj in zip(keys, c):
        vec = support.setdefault(v, [Fraction(0)] * (red.R + 1))
        vec[red.index[(v, j)]] += cj
    cf = WeightFamily(support, red.R)
    E = E_Y(red.Y, cf)
    y = [gi.evaluate([Fraction(t) for t in rec.point]) for gi in red.g]
    logQ = scale
    tH = twisted_height(logQ, cf, y, prec=prec) if logQ.sign(prec) > 0 else None
    out["E_Y"] = E
    out["E_Y_lower_bound"] = E >= Fraction(1, n + 1)
    if tH is None:
        out["transfer"] = "Q = 1"
        return out
    chain = h1g + logQ / (n + 1 + delta / 2) - tH
    out["chain_bound"] = chain.sign(prec) != -1
    target = logQ * (E - delta / (2 * (n + 2) ** 2)) - tH
    out["bound_314"] = target.sign(prec) != -1
    out["hypotheses_met"] = rec.passes_17
    out["transfer"] = "checked" if rec.passes_17 else "vacuous"
    return out


# -- the driver ------------------------------------------------------------------------

@dataclass
class CensusReport:
    config: ExperimentConfig
    condition_13: dict
    enumerated: int = 0
    screened: int = 0
    records: list = dc_field(default_factory=list)  # solutions and sampled flagged points
    flagged_total: int = 0
    _flag_listed: int = 0
    undecidable: list = dc_field(default_factory=list)
    classes: dict = dc_field(default_factory=dict)
    transfers: list = dc_field(default_factory=list)
    fits: list = dc_field(default_factory=list)
    estimates: dict = dc_field(default_factory=dict)
    extra: dict = dc_field(default_factory=dict)

    @property
    def solutions(self) -> list:
        return [r for r in self.records if r.is_solution and not r.flagged]

    @property
    def flagged(self) -> list:
        return [r for r in self.records if r.flagged]

    def nontrivial(self) -> list:
        lim = log_integer(self.config.fit_min_height) if self.config.fit_min_height > 1 else LogHeight()
        return [r for r in self.solutions if (r.h - lim).sign() == 1]

    def summary(self) -> dict:
        return {
            "header": HEADER,
            "name": self.config.name,
            "enumerated": self.enumerated,
            "screened_by_float": self.screened,
            "solutions": len(self.solutions),
            "nontrivial_solutions": len(self.nontrivial()),
            "flagged": self.flagged_total,
            "flagged_listed": len(self.flagged),
            "undecidable": len(self.undecidable),
            "condition_13": {v.label(): ok for v, ok in self.condition_13.items()},
            "classes": len(self.classes),
            **{k: v for k, v in self.extra.items()},
        }

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, LogHeight):
                return v.to_json()
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, tuple):
                return [conv(t) for t in v]
            if isinstance(v, dict):
                return {str(k): conv(t) for k, t in v.items()}
            return v

        return {
            "summary": self.summary(),
            "config": self.config.to_json(),
            "solutions": [r.to_json() for r in self.records],
            "undecidable": [list(r.point) for r in self.undecidable],
            "classes": [{"tuple": [str(c) for c in k], "count": n} for k, n in self.classes.items()],
            "transfer": [conv(d) for d in self.transfers],
            "fits": [f.to_json() for f in self.fits],
            "estimates": conv(self.estimates),
        }

    def solutions_tsv(self) -> str:
        lines = ["point\th\tlhs_log\tthreshold_log\tmargin\tmargin_err\tflagged"]
        for r in self.records:
            m = r.margin.to_json() if r.margin is not None else {"value": "-inf", "error": "0"}
            lhs = r.lhs_log.to_json()["value"] if r.lhs_log is not None else "-inf"
            lines.append("\t".join([",".join(map(str, r.point)), r.h.to_json()["value"], lhs,
                                    r.threshold_log.to_json()["value"], m["value"], m["error"],
                                    r.flag_reason or "-"]))
        return "\n".join(lines) + "\n"

    @property
    def exit_code(self) -> int:
        return 2 if self.undecidable else 0


def _candidate_points(config: ExperimentConfig, report: CensusReport) -> Iterator[tuple]:
    """Points needing exact evaluation; the rest are certified non-solutions by the float screen."""
    X = config.X
    screen = _FastScreen(config)
    if screen.ok:
        cand = (2 * config.height_bound + 1) ** (X.R + 1) // 2
        if cand > MAX_STREAMED:
            raise GuardExceeded(f"{cand} candidates exceed the streaming guard")
        for chunk in projective_chunks(X.R, config.height_bound):
            report.enumerated += chunk.shape[0]
            code = screen.screen(chunk)
            keep = code == 0
            zero = code == -1
            report.screened += int((code == 1).sum())
            room = max(FLAG_SAMPLE - report._flag_listed, 0)
            report.flagged_total += max(int(zero.sum()) - room, 0)
            for row in chunk[zero][:room]:
                report._flag_listed += 1
                yield tuple(int(v) for v in row)
            for row in chunk[keep]:
                yield tuple(int(v) for v in row)
        return
    for x in enumerate_points(X, config.height_bound, config.param_bound):
        report.enumerated += 1
        yield x


def run_census(config: ExperimentConfig, jobs: int = 1, precision: int | None = None) -> CensusReport:
    prec = precision or config.precision
    cond = check_condition_13(config)
    report = CensusReport(config, cond)
    if not all(cond.values()):
        report.extra["note"] = "the forms at some place have a common zero on X; no finiteness claim applies"
    red = reduce_system(config)
    inputs = theorem_inputs(config, red)
    H = theorem_H(config, prec)
    logA3 = bounds_A(inputs, prec=prec)["logA3"]
    report.estimates = check_reduction_estimates(config, red, prec)

    points = list(_candidate_points(config, report))

    def work(x):
        return evaluate_inequality(x, config, prec, logA3, H)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            recs = list(ex.map(work, points))
    else:
        recs = [work(x) for x in points]
    listed = 0
    for rec in sorted(recs, key=lambda r: r.point):
        if rec.is_solution is None:
            report.undecidable.append(rec)
        elif rec.flagged:
            report.flagged_total += 1
            if listed < FLAG_SAMPLE:
                report.records.append(rec)
                listed += 1
        elif rec.is_solution:
            report.records.append(rec)
    report.screened += sum(1 for r in recs if r.is_solution is False)

    # splitting into systems and the conditional twisted-height check
    keys = [(v, j) for v in config.systems for j in range(config.n + 1)]
    q = len(keys)
    W = CoveringSet(q, theta_for(config.n, config.delta))
    report.extra["class_bound"] = str(systems_bound(config.n, len(config.systems), config.delta))
    report.extra["covering_size"] = W.size()
    report.extra["covering_reference_bound"] = W.reference_bound()
    if red.rational:
        h1g = poly_heights([Poly.constant(1, red.g[0].nvars)] + red.g, prec)[1]
        for rec in report.solutions:
            if rec.h.sign(prec) <= 0:
                continue
            info = transfer_check(config, red, rec, W, keys, H, h1g, prec)
            info["point"] = rec.point
            report.transfers.append(info)
            report.classes[info["tuple"]] = report.classes.get(info["tuple"], 0) + 1
    else:
        report.extra["transfer"] = "skipped: coefficients generate a quadratic extension"

    # fitting through the nontrivial solutions
    pts = [r.point for r in report.nontrivial()]
    if pts:
        for m in range(1, config.fit_degree_cap + 1):
            fit = fit_hypersurfaces(pts, config.X, m, config.seed)
            if fit.forms:
                report.fits.append(fit)
                break
    report.extra["A2"] = str(bounds_A(inputs, prec=prec)["A2"])
    return report


def write_report(report: CensusReport, out_dir) -> list:
    import os

    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, report.config.name)
    with open(base + ".json", "w") as fh:
        json.dump(report.to_json(), fh, indent=2)
    with open(base + "_solutions.tsv", "w") as fh:
        fh.write(report.solutions_tsv())
    return [base + ".json", base + "_solutions.tsv"]


# -- built-in experiments ---------------------------------------------------------------

def pell_config(height_bound: int = 10_000) -> ExperimentConfig:
    return ExperimentConfig.from_json({
        "name": "pell",
        "variety": {"type": "projective_space", "n": 1},
        "systems": {"inf": ["x0^2 - 2 x1^2", "x1"]},
        "delta": "1/2",
        "height_bound": height_bound,
    })


def planted_plane_config(height_bound: int = 128) -> ExperimentConfig:
    """On x0 + x1 = 0 the points (2^k, -2^k, 1) make the 2-adic forms x0, x1 small
    while the archimedean forms stay bounded, so they are solutions for k >= 2."""
    return ExperimentConfig.from_json({
        "name": "planted_plane",
        "variety": {"type": "projective_space", "n": 2},
        "systems": {"inf": ["x0 + x1 + x2", "x0 + x1 - x2", "x0 - x1 + x2"],
                    "2": ["x0", "x1", "x0 - x1 + x2"]},
        "delta": "1/2",
        "height_bound": height_bound,
        "fit_degree_cap": 1,
        "fit_min_height": 1,
    })
