"""Exact dense linear algebra over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`. Nothing here
touches floating point; every verdict built on these routines is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = list[Fraction]
Matrix = list[list[Fraction]]


def frac_vector(values: Iterable) -> Vector:
    return [Fraction(v) for v in values]


def frac_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [frac_vector(r) for r in rows]


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def transpose(a: Sequence[Sequence[Fraction]], ncols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    if any(len(row) != inner for row in a):
        raise ValueError("matrix dimensions do not match")
    out = zeros(len(a), cols)
    for i, row in enumerate(a):
        out_row = out[i]
        for k, aik in enumerate(row):
            if aik:
                brow = b[k]
                for j in range(cols):
                    if brow[j]:
                        out_row[j] += aik * brow[j]
    return out


def matvec(a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def kron(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    rb = len(b)
    cb = len(b[0]) if b else 0
    ca = len(a[0]) if a else 0
    out = zeros(len(a) * rb, ca * cb)
    for i, arow in enumerate(a):
        for j, aij in enumerate(arow):
            if not aij:
                continue
            for k, brow in enumerate(b):
                for l, bkl in enumerate(brow):
                    out[i * rb + k][j * cb + l] = aij * bkl
    return out


def block_diag(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]],
               a_cols: int | None = None, b_cols: int | None = None) -> Matrix:
    ca = a_cols if a_cols is not None else (len(a[0]) if a else 0)
    cb = b_cols if b_cols is not None else (len(b[0]) if b else 0)
    out = zeros(len(a) + len(b), ca + cb)
    for i, row in enumerate(a):
        out[i][:ca] = list(row)
    for i, row in enumerate(b):
        out[len(a) + i][ca:] = list(row)
    return out


def is_zero_matrix(a: Sequence[Sequence[Fraction]]) -> bool:
    return all(not x for row in a for x in row)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form; returns the nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Basis of {v : A v = 0}, returned in reduced row-echelon order."""
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    if not basis:
        return []
    return rref(basis, ncols)[0]


def row_space_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    return rref(rows, ncols)[0]


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction], ncols: int) -> Vector | None:
    """One solution of A x = b, or None when the system is inconsistent."""
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    reduced, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row[ncols]
    return x


def in_span(v: Sequence[Fraction], basis: Sequence[Sequence[Fraction]]) -> bool:
    if not any(v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(v)]) == rank(basis)


def ldl_decompose(a: Sequence[Sequence[Fraction]]) -> tuple[Matrix, Vector, list[int]] | None:
    """Symmetric pivoted LDL^T with diagonal pivoting.

    Returns ``(L, d, perm)`` with ``P A P^T = L diag(d) L^T`` or ``None``
    when a zero diagonal pivot meets a nonzero off-diagonal entry, which
    certifies that ``a`` is indefinite.
    """
    n = len(a)
    work = [list(r) for r in a]
    perm = list(range(n))
    lower = identity(n)
    d: Vector = []
    for k in range(n):
        # largest remaining diagonal entry in absolute value
        best = max(range(k, n), key=lambda i: (abs(work[i][i]), -i))
        if best != k:
            work[k], work[best] = work[best], work[k]
            for row in work:
                row[k], row[best] = row[best], row[k]
            perm[k], perm[best] = perm[best], perm[k]
            for j in range(k):
                lower[k][j], lower[best][j] = lower[best][j], lower[k][j]
        pivot = work[k][k]
        if not pivot:
            if any(work[i][j] for i in range(k, n) for j in range(k, n)):
                return None
            d.extend([Fraction(0)] * (n - k))
            break
        d.append(pivot)
        for i in range(k + 1, n):
            lower[i][k] = work[i][k] / pivot
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                work[i][j] -= lower[i][k] * work[k][j]
        for i in range(k + 1, n):
            work[i][k] = work[k][i] = Fraction(0)
    return lower, d, perm


def is_symmetric(a: Sequence[Sequence[Fraction]]) -> bool:
    n = len(a)
    return all(a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n))


def psd_rank(a: Sequence[Sequence[Fraction]]) -> tuple[bool, int]:
    """``(is_positive_semidefinite, rank)`` for a symmetric rational matrix."""
    if not is_symmetric(a):
        raise ValueError("matrix is not symmetric")
    fact = ldl_decompose(a)
    if fact is None:
        return False, rank(a)
    _, d, _ = fact
    return all(x >= 0 for x in d), sum(1 for x in d if x)


def zero_eigen_multiplicity(a: Sequence[Sequence[Fraction]]) -> int:
    """Multiplicity of eigenvalue 0 (symmetric matrices are diagonalizable)."""
    return len(a) - rank(a)


def complement_coordinates(basis: Sequence[Sequence[Fraction]], n: int) -> list[int]:
    """Standard coordinates spanning a complement of ``span(basis)``."""
    _, pivots = rref(basis, n)
    return [c for c in range(n) if c not in pivots]


def unit(n: int, i: int) -> Vector:
    v = [Fraction(0)] * n
    v[i] = Fraction(1)
    return v
