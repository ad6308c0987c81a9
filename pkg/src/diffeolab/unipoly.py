"""Univariate rational polynomials as coefficient lists, lowest degree first.

Only what the breakpoint search needs: arithmetic, determinants of small
polynomial matrices, rational roots and Sturm root counting.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

Poly = tuple[Fraction, ...]


def trim(p: Sequence) -> Poly:
    p = [Fraction(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def degree(p: Poly) -> int:
    return len(p) - 1


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def neg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_poly(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    while len(r) >= len(q) and r:
        c = r[-1] / q[-1]
        s = len(r) - len(q)
        quo[s] = c
        for i, b in enumerate(q):
            r[s + i] -= c * b
        r = list(trim(r))
    return trim(quo), trim(r)


def monic(p: Poly) -> Poly:
    return tuple(c / p[-1] for c in p) if p else ()


def gcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, divmod_poly(p, q)[1]
    return monic(p)


def derivative(p: Poly) -> Poly:
    return trim([i * c for i, c in enumerate(p)][1:])


def evaluate(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def determinant(m: Sequence[Sequence[Poly]]) -> Poly:
    n = len(m)
    if n == 0:
        return (Fraction(1),)
    if n == 1:
        return trim(m[0][0])
    total: Poly = ()
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = mul(m[0][j], determinant(minor))
        total = add(total, term if j % 2 == 0 else neg(term))
    return total


def minors(m: Sequence[Sequence[Poly]], size: int):
    rows, cols = len(m), len(m[0]) if m else 0
    for rs in itertools.combinations(range(rows), size):
        for cs in itertools.combinations(range(cols), size):
            yield determinant([[m[r][c] for c in cs] for r in rs])


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            out.append(n // d)
    return sorted(set(out))


def rational_roots(p: Poly) -> list[Fraction]:
    """Distinct rational roots, ascending."""
    p = trim(p)
    if len(p) <= 1:
        return []
    roots = set()
    k = next(i for i, c in enumerate(p) if c)
    if k:
        roots.add(Fraction(0))
        p = p[k:]
    if len(p) > 1:
        den = math.lcm(*(c.denominator for c in p))
        ints = [int(c * den) for c in p]
        g = math.gcd(*ints)
        ints = [c // g for c in ints]
        for a in _divisors(ints[0]):
            for b in _divisors(ints[-1]):
                for s in (1, -1):
                    r = Fraction(s * a, b)
                    if not evaluate(p, r):
                        roots.add(r)
    return sorted(roots)


def strip_rational_roots(p: Poly) -> Poly:
    """Divide out every rational root with full multiplicity."""
    p = trim(p)
    for r in rational_roots(p):
        lin = (-r, Fraction(1))
        while True:
            q, rem = divmod_poly(p, lin)
            if rem:
                break
            p = q
    return p


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [trim(p), derivative(trim(p))]
    while seq[-1]:
        r = divmod_poly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(neg(r))
    return seq


def _sign_changes(values) -> int:
    signs = [v for v in values if v]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _at_infinity(p: Poly, positive: bool) -> int:
    if not p:
        return 0
    lead = p[-1]
    if positive or degree(p) % 2 == 0:
        return 1 if lead > 0 else -1
    return -1 if lead > 0 else 1


def count_real_roots(p: Poly, lo: Fraction | None = None, hi: Fraction | None = None) -> int:
    """Distinct real roots in the open interval (lo, hi); None means infinite."""
    p = trim(p)
    if len(p) <= 1:
        return 0
    p = divmod_poly(p, gcd(p, derivative(p)))[0]  # square-free part
    seq = sturm_sequence(p)

    def changes(x, positive):
        if x is None:
            return _sign_changes([_at_infinity(s, positive) for s in seq])
        return _sign_changes([evaluate(s, x) for s in seq])

    count = changes(lo, False) - changes(hi, True)
    if hi is not None and not evaluate(p, hi):
        count -= 1
    return count
