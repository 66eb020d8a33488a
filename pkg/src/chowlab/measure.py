"""Monte Carlo evaluation of the sphere measure m(f) and the height h*(f).

Each block of variables is sampled uniformly on its complex unit sphere by
normalizing a standard complex Gaussian vector.  Samples are drawn in chunks
whose generators depend only on (seed, chunk index), so the estimate does not
depend on how the chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fields import FieldElement, archimedean_places
from .logheight import DEFAULT_PREC
from .poly import (Poly, QuadraticSurd, block_structure, poly_finite_part,
                   poly_heights)

CHUNK = 20_000


class UnstableIntegrand(ArithmeticError):
    """A sample hit the zero set of the integrand."""


NORMALIZATIONS = ("half", "full")


@dataclass(frozen=True)
class SampleConfig:
    """``normalization`` selects the constant added to the integral:
    ``half`` uses (1/2) sum_h deg_h f sum_j 1/(2j), ``full`` twice that."""

    samples: int = 200_000
    seed: int = 0
    jobs: int = 1
    normalization: str = "half"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    def with_seed(self, seed: int) -> "SampleConfig":
        return SampleConfig(self.samples, seed, self.jobs, self.normalization)


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    stderr: float
    samples: int

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "samples": self.samples}


def correction_term(blocks: Sequence[int], degrees: Sequence[int],
                    normalization: str = "half") -> Fraction:
    """``(1/2) sum_h deg_h f * sum_{j=1}^{l_h} 1/(2j)`` with l_h = blocks[h] - 1.

    The ``full`` normalization drops the leading 1/2.
    """
    total = Fraction(0)
    for size, deg in zip(blocks, degrees):
        total += deg * sum((Fraction(1, 2 * j) for j in range(1, size)), Fraction(0))
    return total / 2 if normalization == "half" else total


def _complex_coeff(c, embedding: int) -> complex:
    if isinstance(c, QuadraticSurd):
        return complex(float(c))
    if isinstance(c, FieldElement):
        return c.to_complex(embedding)
    return complex(float(c))


class _Compiled:
    """A polynomial prepared for vectorized evaluation."""

    def __init__(self, f: Poly, embedding: int):
        self.blocks, self.degrees = block_structure(f)
        mons = list(f.terms)
        self.coeffs = np.array([_complex_coeff(f.terms[m], embedding) for m in mons])
        self.exps = np.array(mons, dtype=np.int64)
        self.maxdeg = int(self.exps.max()) if len(mons) else 0

    def log_abs(self, Z: np.ndarray) -> np.ndarray:
        # powers[k][:, i] = Z[:, i] ** k
        powers = [np.ones_like(Z)]
        for _ in range(self.maxdeg):
            powers.append(powers[-1] * Z)
        total = np.zeros(Z.shape[0], dtype=complex)
        cols = np.arange(Z.shape[1])
        for c, e in zip(self.coeffs, self.exps):
            term = np.full(Z.shape[0], c, dtype=complex)
            for i in cols[e > 0]:
                term = term * powers[e[i]][:, i]
            total += term
        return np.log(np.abs(total))


def sample_spheres(rng: np.random.Generator, blocks: Sequence[int], count: int) -> np.ndarray:
    parts = []
    for size in blocks:
        g = rng.standard_normal((count, size)) + 1j * rng.standard_normal((count, size))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        parts.append(g)
    return np.concatenate(parts, axis=1)


def _chunk_sums(compiled: _Compiled, seed: int, chunk: int, count: int):
    rng = np.random.default_rng([seed, chunk])
    Z = sample_spheres(rng, compiled.blocks, count)
    vals = compiled.log_abs(Z)
    if not np.all(np.isfinite(vals)):
        raise UnstableIntegrand("unstable integrand: a sample hit the zero set")
    return math.fsum(vals), math.fsum(vals * vals)


def sphere_integral(f: Poly, cfg: SampleConfig = SampleConfig(), embedding: int = 0) -> MeasureEstimate:
    """Estimate m(f) for one complex embedding of the coefficients."""
    if not f.terms:
        raise ValueError("zero polynomial")
    compiled = _Compiled(f, embedding)
    counts = [min(CHUNK, cfg.samples - k) for k in range(0, cfg.samples, CHUNK)]
    tasks = [(compiled, cfg.seed, i, n) for i, n in enumerate(counts)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as ex:
            sums = list(ex.map(lambda t: _chunk_sums(*t), tasks))
    else:
        sums = [_chunk_sums(*t) for t in tasks]
    N = cfg.samples
    s1 = math.fsum(s for s, _ in sums)
    s2 = math.fsum(q for _, q in sums)
    mean = s1 / N
    var = max(s2 / N - mean * mean, 0.0) * N / (N - 1) if N > 1 else 0.0
    stderr = math.sqrt(var / N)
    corr = float(correction_term(compiled.blocks, compiled.degrees, cfg.normalization))
    return MeasureEstimate(mean + corr, stderr, N)


def h_star(f: Poly, cfg: SampleConfig = SampleConfig(), prec: int = DEFAULT_PREC) -> MeasureEstimate:
    """Estimate h*(f): weighted sphere measures at the archimedean places plus the exact finite part."""
    if not f.terms:
        raise ValueError("zero polynomial")
    finite = float(poly_finite_part([f], prec))
    irrational = any(isinstance(c, FieldElement) and c.b for c in f.terms.values())
    if not irrational:
        est = sphere_integral(f, cfg)
        return MeasureEstimate(est.value + finite, est.stderr, est.samples)
    value, var = 0.0, 0.0
    for k, w in enumerate(archimedean_places(f.field)):
        sub = cfg.with_seed(cfg.seed + 7919 * k)
        est = sphere_integral(f, sub, embedding=w.index)
        value += float(w.weight) * est.value
        var += (float(w.weight) * est.stderr) ** 2
    return MeasureEstimate(value + finite, math.sqrt(var), cfg.samples)


def measure_bound(f: Poly) -> float:
    """``sum_h deg_h f * log(l_h + 1)``."""
    blocks, degs = block_structure(f)
    return math.fsum(d * math.log(size) for size, d in zip(blocks, degs))


def verify_measure_bound(f: Poly, cfg: SampleConfig = SampleConfig()) -> dict:
    est = h_star(f, cfg)
    h1 = float(poly_heights([f])[1])
    bound = measure_bound(f)
    tol = 3 * est.stderr + 1e-6
    gap = abs(est.value - h1)
    return {"h_star": est.value, "stderr": est.stderr, "h1": h1, "bound": bound,
            "slack": bound - gap, "ok": gap <= bound + tol}


def verify_multiplicativity(fs: Sequence[Poly], cfg: SampleConfig = SampleConfig()) -> dict:
    """Compare h*(f_1 ... f_r) with sum h*(f_i), using independent sample streams."""
    prod = fs[0]
    for g in fs[1:]:
        prod = prod * g
    parts = [h_star(g, cfg.with_seed(cfg.seed + 1 + i)) for i, g in enumerate(fs)]
    whole = h_star(prod, cfg)
    total = math.fsum(p.value for p in parts)
    tol = 3 * (whole.stderr + sum(p.stderr for p in parts)) + 1e-6
    return {"product": whole.value, "sum": total, "difference": whole.value - total,
            "tolerance": tol, "ok": abs(whole.value - total) <= tol}


def verify_lemma_2_2(fs: Sequence[Poly], prec: int = DEFAULT_PREC) -> dict:
    """Exact slacks of  h1(f) <= sum h1(f_i) <= h1(f) + 2 sum_h deg_h f log(l_h+1)."""
    from .logheight import log_integer

    if not fs or any(not g.terms for g in fs):
        raise ValueError("factors must be nonzero")
    prod = fs[0]
    for g in fs[1:]:
        prod = prod * g
    h1f = poly_heights([prod], prec)[1]
    total = None
    for g in fs:
        h = poly_heights([g], prec)[1]
        total = h if total is None else total + h
    blocks, degs = block_structure(prod)
    extra = None
    for size, d in zip(blocks, degs):
        term = log_integer(size, prec) * (2 * d) if size > 1 else None
        if term is not None:
            extra = term if extra is None else extra + term
    left = total - h1f
    right = (h1f + extra if extra is not None else h1f) - total
    return {"left_slack": left, "right_slack": right,
            "ok": left.sign(prec) in (0, 1) and right.sign(prec) in (0, 1)}


def verify_remond_identity(X, delta: int, cfg: SampleConfig = SampleConfig()) -> dict:
    """Compare h*(G_{X,Delta}) with Delta^(n+1) h*(F_X) by Monte Carlo."""
    from .chow import chow_form, modified_chow_form
    from .variety import degree_dimension

    n, _ = degree_dimension(X)
    G = modified_chow_form(X, delta)
    if G.body.num_terms() > 1_000_000:
        raise ValueError("size guard: modified Chow form has too many terms")
    F = chow_form(X)
    lhs = h_star(G.body, cfg)
    rhs = h_star(F.body, cfg)
    scale = delta ** (n + 1)
    diff = lhs.value - scale * rhs.value
    tol = 4 * (lhs.stderr + scale * rhs.stderr) + 1e-6
    return {"lhs": lhs.value, "lhs_stderr": lhs.stderr, "rhs": scale * rhs.value,
            "rhs_stderr": scale * rhs.stderr, "difference": diff, "tolerance": tol,
            "ok": abs(diff) <= tol}
