"""Exact linear algebra over Q and Q(sqrt d).

Matrices are lists of rows.  Entries are Fractions or FieldElements; nothing
here rounds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Poly


def _to_scalar(x):
    if isinstance(x, int):
        return Fraction(x)
    return x


def rref(rows: Sequence[Sequence]):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    A = [[_to_scalar(x) for x in row] for row in rows]
    if not A:
        return [], []
    ncols = len(A[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][col]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][col]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][col]:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of ``{v : A v = 0}``."""
    if not rows:
        if ncols is None:
            raise ValueError("empty matrix needs ncols")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence], b: Sequence):
    """One solution of ``A x = b`` or None when inconsistent."""
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    ncols = len(A[0])
    R, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[-1]
    return x


def det(M: Sequence[Sequence]):
    """Determinant by fraction-exact elimination."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    A = [[_to_scalar(x) for x in row] for row in M]
    result = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            result = -result
        result = result * A[col][col]
        inv = 1 / A[col][col]
        for i in range(col + 1, n):
            if A[i][col]:
                f = A[i][col] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[col])]
    return result


def mat_vec(M: Sequence[Sequence], v: Sequence) -> list:
    out = []
    for row in M:
        acc = Fraction(0)
        for a, x in zip(row, v):
            if a and x:
                acc = acc + a * x
        out.append(acc)
    return out


def poly_det(M: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square matrix of polynomials (Laplace, memoised minors)."""
    n = len(M)
    if n == 0:
        raise ValueError("empty matrix")
    nv = next(p.nvars for row in M for p in row)
    memo: dict[tuple[int, frozenset], Poly] = {}

    def minor(r: int, cols: tuple) -> Poly:
        # rows r..n-1 against the given column tuple
        key = (r, cols)
        if key in memo:
            return memo[key]
        if r == n - 1:
            res = M[r][cols[0]]
        else:
            res = Poly(nv)
            for j, c in enumerate(cols):
                entry = M[r][c]
                if not entry:
                    continue
                sub = minor(r + 1, cols[:j] + cols[j + 1:])
                if not sub:
                    continue
                term = entry * sub
                res = res - term if j % 2 else res + term
        memo[key] = res
        return res

    return minor(0, tuple(range(n)))


class SparseEchelon:
    """Incrementally maintained echelon basis of sparse vectors (dict col -> value).

    ``insert`` reduces a vector against the stored basis and keeps it when it
    is independent.  Used by the Hilbert-weight greedy.
    """

    def __init__(self):
        self.rows: dict = {}  # pivot column -> row with leading entry 1
        self.order: list = []

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: x for k, x in vec.items() if x}
        while v:
            hit = [k for k in v if k in self.rows]
            if not hit:
                break
            k = min(hit)
            f = v[k]
            for c, x in self.rows[k].items():
                nv = v.get(c, 0) - f * x
                if nv:
                    v[c] = nv
                else:
                    v.pop(c, None)
        return v

    def insert(self, vec: dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        k = min(v)
        inv = 1 / v[k]
        row = {c: x * inv for c, x in v.items()}
        # keep stored rows fully reduced so later reductions terminate quickly
        for p, r in self.rows.items():
            if k in r:
                f = r[k]
                for c, x in row.items():
                    nv = r.get(c, 0) - f * x
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
        self.rows[k] = row
        self.order.append(k)
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)
