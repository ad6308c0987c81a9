"""Exact linear algebra and univariate helpers, checked against sympy."""

from __future__ import annotations

import itertools
from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_rats
from diffeolab import linalg, unipoly


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 4)):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(small_rats, min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0]))


def symmetric_matrices(n=st.integers(1, 4)):
    def build(size):
        return st.lists(small_rats, min_size=size * (size + 1) // 2, max_size=size * (size + 1) // 2).map(
            lambda vals: _fill_symmetric(size, vals))
    return n.flatmap(build)


def _fill_symmetric(n, vals):
    m = [[Fraction(0)] * n for _ in range(n)]
    it = iter(vals)
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = next(it)
    return m


def to_sympy(m):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m])


@settings(max_examples=120)
@given(matrices())
def test_rref_and_rank_match_sympy(m):
    reduced, pivots = linalg.rref(m)
    ref, ref_pivots = to_sympy(m).rref()
    assert list(pivots) == list(ref_pivots)
    assert to_sympy(reduced) == ref[: len(pivots), :] if pivots else not reduced
    assert linalg.rank(m) == to_sympy(m).rank()


@settings(max_examples=120)
@given(matrices())
def test_nullspace_is_a_kernel_basis(m):
    ncols = len(m[0])
    basis = linalg.nullspace(m, ncols)
    assert len(basis) == ncols - to_sympy(m).rank()
    for v in basis:
        assert all(not x for x in linalg.matvec(m, v))
    if basis:
        assert linalg.rank(basis) == len(basis)


@settings(max_examples=120)
@given(symmetric_matrices())
def test_psd_and_rank_match_principal_minors(m):
    psd, r = linalg.psd_rank(m)
    sm = to_sympy(m)
    assert r == sm.rank()
    # semidefinite iff every principal minor is nonnegative
    n = len(m)
    minors = (sm.extract(list(idx), list(idx)).det()
              for k in range(1, n + 1) for idx in itertools.combinations(range(n), k))
    assert psd == all(d >= 0 for d in minors)


def test_ldl_certifies_an_indefinite_zero_diagonal():
    assert linalg.psd_rank([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]) == (False, 2)


def test_kron_and_block_diag():
    a = [[Fraction(1), Fraction(2)]]
    b = [[Fraction(3)], [Fraction(4)]]
    assert linalg.kron(a, b) == [[3, 6], [4, 8]]
    assert linalg.block_diag(a, b) == [[1, 2, 0], [0, 0, 3], [0, 0, 4]]


@settings(max_examples=100)
@given(st.lists(small_rats, min_size=1, max_size=5), st.lists(small_rats, min_size=1, max_size=4))
def test_polynomial_division_matches_sympy(a, b):
    x = sympy.Symbol("x")
    b = unipoly.trim(tuple(b))
    if not b:
        return
    q, r = unipoly.divmod_poly(tuple(a), b)
    pa = sympy.Poly(list(reversed(a)), x, domain="QQ")
    pb = sympy.Poly(list(reversed(b)), x, domain="QQ")
    sq, sr = sympy.div(pa, pb)
    assert unipoly.trim(q) == unipoly.trim(tuple(Fraction(str(c)) for c in reversed(sq.all_coeffs())))
    assert unipoly.trim(r) == unipoly.trim(tuple(Fraction(str(c)) for c in reversed(sr.all_coeffs())))


@settings(max_examples=100)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=4))
def test_rational_roots_and_sturm_counts(roots):
    p = (1,)
    for r in roots:
        p = unipoly.mul(p, (Fraction(-r), Fraction(1)))
    assert sorted(unipoly.rational_roots(p)) == sorted(set(Fraction(r) for r in roots))
    assert unipoly.count_real_roots(p, None, None) == len(set(roots))
    assert unipoly.count_real_roots(p, 0, None) == len({r for r in roots if r > 0})
    assert unipoly.count_real_roots(p, None, 0) == len({r for r in roots if r < 0})


def test_irrational_roots_are_counted_not_listed():
    p = (Fraction(-2), Fraction(0), Fraction(1))  # x^2 - 2
    assert unipoly.rational_roots(p) == []
    assert unipoly.count_real_roots(p, 0, None) == 1
    assert unipoly.count_real_roots(p, None, 0) == 1


def test_determinant_matches_sympy():
    x = sympy.Symbol("x")
    m = [[(Fraction(1), Fraction(1)), (Fraction(2),)], [(Fraction(0), Fraction(0), Fraction(1)), (Fraction(-1),)]]
    det = unipoly.determinant(m)
    ref = sympy.Matrix([[1 + x, 2], [x ** 2, -1]]).det()
    assert sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * x ** i for i, c in enumerate(det)) - ref) == 0
