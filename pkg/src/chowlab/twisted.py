"""Twisted heights, their dual version on P^{n_m}, and the Veronese comparison.

Weights are attached to places of a base field K (in practice Q).  A point
over an extension L is handled by spreading the weight of v over the places
w above it in proportion to d(w|v), so results do not depend on L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .chow import normalized_chow_weight
from .fields import (QQ, NumberField, Place, all_places, field_of, log_abs, relevant_primes)
from .linalg import det, rref
from .logheight import (DEFAULT_PREC, LogHeight, decide_sign, log_max, log_rational)
from .poly import monomial_value, veronese_monomials
from .variety import (VarietySpec, degree_dimension, hilbert_function, hilbert_weight,
                      optimal_support)

MAX_MINORS = 20_000


def as_log_q(Q, prec: int = DEFAULT_PREC) -> LogHeight:
    """log Q for Q given as a LogHeight (already a log), an exact rational, or a float."""
    if isinstance(Q, LogHeight):
        out = Q
    elif isinstance(Q, (int, Fraction)):
        if Q < 1:
            raise ValueError("Q must be >= 1")
        return log_rational(Q, prec)
    else:
        import mpmath
        with mpmath.workprec(prec + 16):
            x = mpmath.mpf(Q)
            if x < 1:
                raise ValueError("Q must be >= 1")
            out = LogHeight(arch=mpmath.log(x), err=mpmath.ldexp(1, -(prec - 4)))
    if out.sign(prec) == -1:
        raise ValueError("Q must be >= 1")
    return out


# -- weight families ------------------------------------------------------------

class WeightFamily:
    """Tuples c_v in Q^(R+1) for finitely many places v of ``field``."""

    def __init__(self, support: Mapping[Place, Sequence], R: int, field: NumberField = QQ):
        self.field = field
        self.R = R
        self.support = {}
        for v, c in support.items():
            if v.field != field:
                raise ValueError(f"place {v} is not a place of {field}")
            c = tuple(Fraction(x) for x in c)
            if len(c) != R + 1:
                raise ValueError(f"weight tuple at {v.label()} needs {R + 1} entries")
            if any(x < 0 for x in c):
                raise ValueError("weights must be nonnegative")
            if any(c):
                self.support[v] = c
        if self.total() > 1:
            raise ValueError(f"sum over places of max weight is {self.total()} > 1")

    def total(self) -> Fraction:
        return sum((max(c) for c in self.support.values()), Fraction(0))

    def at(self, v: Place) -> tuple:
        return self.support.get(v, (Fraction(0),) * (self.R + 1))

    @classmethod
    def from_labels(cls, data: Mapping[str, Sequence], R: int) -> "WeightFamily":
        """Weights over Q keyed by ``"inf"`` or a prime written as a string."""
        from .fields import finite_place, infinite_place

        support = {}
        for key, c in data.items():
            v = infinite_place(QQ) if str(key) in ("inf", "oo", "infinity") else finite_place(int(key))
            support[v] = [Fraction(x) for x in c]
        return cls(support, R)

    def to_json(self) -> dict:
        return {v.label(): [str(x) for x in c] for v, c in self.support.items()}

    def __repr__(self):
        return f"WeightFamily({self.to_json()})"


def _base_place(w: Place, K: NumberField):
    """(v, d(w|v)) for a place w of L over K, where K is Q or L itself."""
    if w.field == K:
        return w, Fraction(1)
    if K.d is not None:
        raise ValueError("extensions are only supported over Q")
    return w.below(), w.weight


def _target_field(values, K: NumberField, field: NumberField | None) -> NumberField:
    L = field or field_of(list(values))
    if K.d is not None and L != K:
        raise ValueError(f"values do not live in {K}")
    return L


def _support_primes(places) -> set:
    return {v.p for v in places if v.p is not None}


def twisted_height(Q, cf: WeightFamily, y: Sequence, field: NumberField | None = None,
                   prec: int = DEFAULT_PREC) -> LogHeight:
    """log H_{Q,c}(y)."""
    if len(y) != cf.R + 1:
        raise ValueError(f"point needs {cf.R + 1} coordinates")
    if not any(y):
        raise ValueError("zero point")
    logQ = as_log_q(Q, prec)
    L = _target_field(y, cf.field, field)
    idx = [i for i, x in enumerate(y) if x]
    primes = relevant_primes([y[i] for i in idx]) | _support_primes(cf.support)
    total = LogHeight()
    for w in all_places(L, primes):
        v, dwv = _base_place(w, cf.field)
        c = cf.at(v)
        terms = [log_abs(w, y[i], prec) + logQ * (c[i] * dwv) if c[i] else log_abs(w, y[i], prec)
                 for i in idx]
        total = total + log_max(terms, prec)
    return total


def E_Y(Y: VarietySpec, cf: WeightFamily) -> Fraction:
    """E_Y(c) = sum_v e_Y(c_v) / ((n+1) D)."""
    if cf.R != Y.R:
        raise ValueError("weights and variety live in different spaces")
    return sum((normalized_chow_weight(Y, c) for c in cf.support.values()), Fraction(0))


# -- the Veronese linear span --------------------------------------------------------

@dataclass
class SpanData:
    """Linear forms L_0..L_{R_m} with L_j(x) = y^{a_j} on Y, x the basis monomials."""

    m: int
    monomials: list
    basis: list  # indices of the coordinate monomials on P^{n_m}
    forms: list  # forms[j] = coefficients of L_j in x_0..x_{n_m}
    log_H: LogHeight | None = None

    @property
    def n_m(self) -> int:
        return len(self.basis) - 1

    @property
    def R_m(self) -> int:
        return len(self.monomials) - 1

    def coordinates(self, y: Sequence) -> list:
        """x = psi_m^{-1} phi_m(y) for a point y of Y."""
        return [monomial_value(self.monomials[i], y) for i in self.basis]


def _forms_in_basis(Y: VarietySpec, m: int, basis: list) -> list:
    classes = Y._classes(m)
    keys = sorted({k for c in classes for k in c}, reverse=True)
    H = len(basis)
    rows = []
    for k in keys:
        row = [classes[b].get(k, Fraction(0)) for b in basis]
        row += [c.get(k, Fraction(0)) for c in classes]
        rows.append(row)
    red, pivots = rref(rows)
    if pivots[:H] != list(range(H)) or any(p >= H for p in pivots[H:]) or len(pivots) != H:
        raise AssertionError("chosen monomials are not a basis of the quotient")
    return [[red[r][H + j] for r in range(H)] for j in range(len(classes))]


def span_isomorphism(Y: VarietySpec, m: int, with_height: bool = True,
                     prec: int = DEFAULT_PREC) -> SpanData:
    """Coordinates on Y_m and the forms psi_m; log H is computed when the
    number of maximal minors is at most MAX_MINORS."""
    mons = veronese_monomials(m, Y.R)
    basis = optimal_support(Y, m, [0] * (Y.R + 1))
    forms = _forms_in_basis(Y, m, basis)
    data = SpanData(m, mons, basis, forms)
    if with_height and math.comb(len(forms), len(basis)) <= MAX_MINORS:
        data.log_H = calH(forms, prec)
    return data


def linear_span_height(span: SpanData, prec: int = DEFAULT_PREC) -> LogHeight:
    """h(Y_m) as the height of the Chow form of the linear space (independent route)."""
    from .chow import variety_height
    from .variety import LinearSubvariety

    return variety_height(LinearSubvariety(span.forms), prec)


# -- determinant quantities ---------------------------------------------------------

def _minor(forms: Sequence[Sequence], I: Sequence[int]):
    return det([list(forms[i]) for i in I])


def calH(forms: Sequence[Sequence], prec: int = DEFAULT_PREC) -> LogHeight:
    """log of prod_v max_I |det(L_i : i in I)|_v, i.e. the height of the Pluecker vector."""
    from .fields import point_height

    k = len(forms[0])
    if math.comb(len(forms), k) > MAX_MINORS:
        raise ValueError("too many maximal minors")
    minors = [_minor(forms, I) for I in combinations(range(len(forms)), k)]
    if not any(minors):
        raise ValueError("forms do not have full rank")
    return point_height(minors, prec=prec)


def calD(forms: Sequence[Sequence], I_v: Mapping[Place, Sequence[int]],
         default_I: Sequence[int], K: NumberField = QQ, prec: int = DEFAULT_PREC) -> LogHeight:
    """log of prod_v |det(L_i : i in I_v)|_v, where unlisted places use ``default_I``.

    By the product formula this is sum over listed v of
    log|det_{I_v}|_v - log|det_{default}|_v.
    """
    d0 = _minor(forms, default_I)
    if not d0:
        raise ValueError("rank condition fails for the default index set")
    total = LogHeight()
    for v, I in I_v.items():
        dv = _minor(forms, I)
        if not dv:
            raise ValueError(f"rank condition fails at {v.label()}")
        total = total + log_abs(v, dv, prec) - log_abs(v, d0, prec)
    return total


def calH_calD(forms, I_v, default_I, K: NumberField = QQ, prec: int = DEFAULT_PREC) -> dict:
    """Both quantities and the slack of  log D >= (1 - C(R+1, n+1)) log H."""
    logH = calH(forms, prec)
    logD = calD(forms, I_v, default_I, K, prec)
    N = math.comb(len(forms), len(forms[0]))
    slack = logD - logH * (1 - N)
    return {"log_H": logH, "log_D": logD, "slack": slack, "ok": slack.sign(prec) != -1}


# -- dual weights -----------------------------------------------------------------

@dataclass
class DualWeightData:
    m: int
    I: dict  # place -> list of indices into the degree-m monomials
    d: dict  # place -> {index: Fraction}
    default_I: list
    s: dict = dc_field(default_factory=dict)  # place -> s_Y(m, c_v) / (m H_Y(m))
    field: NumberField = QQ

    def check(self):
        total = sum((sum(dv.values(), Fraction(0)) for dv in self.d.values()), Fraction(0))
        if total != 0:
            raise AssertionError(f"dual weights do not sum to zero: {total}")
        top = sum((max(dv.values()) for dv in self.d.values() if dv), Fraction(0))
        if top > 1:
            raise AssertionError(f"sum of maximal dual weights is {top} > 1")

    def at(self, v: Place):
        if v in self.I:
            return self.I[v], self.d[v]
        return self.default_I, {}

    def to_json(self) -> dict:
        return {"m": self.m,
                "places": {v.label(): {"I": list(self.I[v]),
                                       "d": {str(i): str(x) for i, x in self.d[v].items()}}
                           for v in self.I}}


def dual_weights(Y: VarietySpec, m: int, cf: WeightFamily) -> DualWeightData:
    """d_iv = -(a_i . c_v)/m + s_Y(m, c_v)/(m H_Y(m)) on an optimal basis I_v."""
    _, D = degree_dimension(Y)
    if m <= D:
        raise ValueError(f"need m > D = {D}")
    mons = veronese_monomials(m, Y.R)
    H = hilbert_function(Y, m)
    default_I = optimal_support(Y, m, [0] * (Y.R + 1))
    I, d, s = {}, {}, {}
    for v, c in cf.support.items():
        sv, _ = hilbert_weight(Y, m, c)
        Iv = optimal_support(Y, m, c)
        sv = sv / (m * H)
        I[v] = Iv
        s[v] = sv
        d[v] = {i: -sum((a * x for a, x in zip(mons[i], c)), Fraction(0)) / m + sv for i in Iv}
    data = DualWeightData(m, I, d, default_I, s, cf.field)
    data.check()
    return data


def dual_twisted_height(Q, data: DualWeightData, forms: Sequence[Sequence], x: Sequence,
                        field: NumberField | None = None, prec: int = DEFAULT_PREC) -> LogHeight:
    """log H*_{Q,d}(x) = sum_w log max_{i in I_w} |L_i(x)|_w Q^{-d_iw}."""
    if any(len(f) != len(x) for f in forms):
        raise ValueError("forms and point have different dimensions")
    logQ = as_log_q(Q, prec)
    needed = set(data.default_I)
    for Iv in data.I.values():
        needed.update(Iv)
    vals = {}
    for i in needed:
        acc = Fraction(0)
        for a, xi in zip(forms[i], x):
            if a and xi:
                acc = acc + a * xi
        vals[i] = acc
    L = _target_field(list(vals.values()) + list(x), data.field, field)
    primes = relevant_primes([v for v in vals.values() if v]) | _support_primes(data.I)
    total = LogHeight()
    for w in all_places(L, primes):
        v, dwv = _base_place(w, data.field)
        Iw, dw = data.at(v)
        terms = []
        for i in Iw:
            if vals[i]:
                t = log_abs(w, vals[i], prec)
                if dw.get(i):
                    t = t - logQ * (dw[i] * dwv)
                terms.append(t)
        if not terms:
            raise ValueError(f"all selected forms vanish at {w.label()}")
        total = total + log_max(terms, prec)
    return total


# -- the comparison lemma ---------------------------------------------------------

def _lemma_values(Y, cf, delta, y, Q, m, span, data, prec):
    logQ = as_log_q(Q, prec)
    x = span.coordinates(y)
    lhs = dual_twisted_height(logQ * m, data, span.forms, x, prec=prec)
    Hc = twisted_height(logQ, cf, y, prec=prec)
    s = sum(data.s.values(), Fraction(0))
    rhs = Hc * m - logQ * (m * s)
    logD = calD(span.forms, data.I, data.default_I, cf.field, prec)
    return logQ, x, lhs, rhs, Hc, s, logD


def verify_lemma_5_4(Y: VarietySpec, cf: WeightFamily, delta, y: Sequence, Q,
                     m: int | None = None, prec: int = DEFAULT_PREC) -> dict:
    """Check H*_{Q^m,d}(x) <= Q^{-ms} H_{Q,c}(y)^m, and the conclusion of the lemma
    when its two hypotheses hold."""
    from .bounds import m_from_delta

    delta = Fraction(delta)
    n, D = degree_dimension(Y)
    m = m or m_from_delta(n, D, delta)
    if not Y.contains(list(y)):
        raise ValueError("point is not on Y")
    span = span_isomorphism(Y, m, with_height=False)
    data = dual_weights(Y, m, cf)
    E = E_Y(Y, cf)
    nm1 = span.n_m + 1

    cache = {}

    def values(p):
        if p not in cache:
            cache[p] = _lemma_values(Y, cf, delta, y, Q, m, span, data, p)
        return cache[p]

    sgn, used = decide_sign(lambda p: values(p)[2] - values(p)[3], prec)
    logQ, x, lhs, rhs, Hc, s, logD = values(used)
    # sanity: L_j(x) = y^{a_j} on every coordinate
    for j in (0, len(span.monomials) // 2, len(span.monomials) - 1):
        lj = sum((a * xi for a, xi in zip(span.forms[j], x)), Fraction(0))
        if lj != monomial_value(span.monomials[j], y):
            raise AssertionError("psi_m does not invert the Veronese map at y")
    report = {
        "m": m, "n_m": span.n_m, "R_m": span.R_m, "E": E, "s": s,
        "lhs": lhs, "rhs": rhs, "slack": rhs - lhs,
        "status": "pass" if sgn <= 0 else "fail", "precision": used,
        "log_D": logD,
    }
    hb = decide_sign(lambda p: values(p)[4] - values(p)[0] * (E - delta), prec)[0]
    hc = decide_sign(lambda p: values(p)[0] - values(p)[6] * (6 / (delta * m * nm1)), prec)[0]
    report["hypothesis_b"] = hb <= 0
    report["hypothesis_c"] = hc >= 0
    if hb <= 0 and hc >= 0:
        concl = logD / nm1 - logQ * (m * delta / 3) - lhs
        sx, _ = decide_sign(lambda p: values(p)[6] / nm1 - values(p)[0] * (m * delta / 3)
                            - values(p)[2], prec)
        report["conclusion"] = "pass" if sx >= 0 else "fail"
        report["conclusion_slack"] = concl
    else:
        report["conclusion"] = "hypothesis not met"
    return report


def report_to_json(report: dict) -> dict:
    out = {}
    for k, v in report.items():
        if isinstance(v, LogHeight):
            out[k] = v.to_json()
        elif isinstance(v, Fraction):
            out[k] = str(v)
        else:
            out[k] = v
    return out
