from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import F, nonzero_rats, orthant_polys, poly, small_rats
from diffeolab import bundle as bd
from diffeolab import dvs, linalg
from diffeolab import metric as mt
from diffeolab.errors import Incompatible, NotAPseudometric, StrataMismatch
from diffeolab.pwpoly import OrthantPoly
from test_bundle import XY, B3, bundle, gen

C = bundle(4, 2, gen(2, "0", "x2*abs(y1)"))
STANDARD = bd.trivial_bundle(3, 1)


def uniform(k: int, *rows) -> mt.StratifiedSection:
    return mt.StratifiedSection.uniform(k, [[poly(k, e) if isinstance(e, str) else e for e in r] for r in rows])


def test_quadratic_section_on_the_abs_fibre_bundle_is_valid():
    g = uniform(1, ["x1^2 + 1", 0], [0, 0])
    assert mt.is_smooth_section(g, B3).is_smooth
    assert mt.is_pseudometric(g, B3).is_valid


def test_delta_section_is_valid_for_any_positive_constant():
    for c in (1, 3, Fraction(1, 2)):
        g = mt.StratifiedSection.delta(1, [[1]], constant=c)
        assert g.value_at([0]) == [[Fraction(c)]]
        assert g.value_at([2]) == [[0]]
        assert mt.is_pseudometric(g, XY).is_valid


def test_constant_section_is_not_smooth_where_the_fibre_jumps():
    v = mt.is_smooth_section(uniform(1, [1]), XY)
    assert v.is_not_smooth
    assert v.witness == {"pair": ("p1", "p1"), "stratum": (-1,)}
    assert "x1<0" in v.reason


def test_invalid_sections_report_the_first_failing_point():
    v = mt.is_pseudometric(uniform(1, ["x1"]), bd.trivial_bundle(2, 1))
    assert v.status == "invalid"
    assert (v.point, v.reason) == (F(0), "rank deficit")
    assert (F(-1), "not PSD") in v.failures
    v = mt.is_pseudometric(uniform(1, [0]), bd.trivial_bundle(2, 1))
    assert {r for _, r in v.failures} == {"rank deficit"}


def test_section_shape_is_validated():
    with pytest.raises(StrataMismatch):
        mt.StratifiedSection.uniform(1, [[1, 2], [3, 4]])
    with pytest.raises(StrataMismatch):
        mt.StratifiedSection(1, 1, ((((3, 0),), [[1]]),), [[0]])


def test_section_rules_apply_in_order():
    g = mt.StratifiedSection(2, 1, ((((0, 0),), [[1]]), (((1, 0),), [[2]])), [[0]])
    assert g.value_at([0, 0]) == [[1]]
    assert g.value_at([1, 0]) == [[2]]
    assert g.value_at([1, 1]) == [[0]]


def test_find_on_the_abs_product_bundle_is_the_delta_section():
    r = mt.find_pseudometric(XY)
    assert r.status == "exists"
    assert r.section.value_at([0]) == [[1]] and r.section.value_at([-3]) == [[0]]


def test_find_reports_the_obstruction():
    r = mt.find_pseudometric(C)
    assert r.status == "not_exists"
    assert r.reason == "coefficients b,c forced to 0; rank 1 < required 2 on stratum x2=0"
    assert r.forced_zero == ("b", "c")
    assert r.deficient == ((-1, 0), (1, 0))


def test_find_on_simple_bundles():
    assert mt.find_pseudometric(STANDARD).status == "exists"
    assert mt.find_pseudometric(bd.PullbackCoarse(3, 1)).status == "exists"
    # the dual of the fibre over x is spanned by e1 - x e2, which a polynomial section follows
    r = mt.find_pseudometric(bundle(3, 1, gen(1, "x1*abs(y1)", "abs(y1)")))
    assert r.status == "exists"
    assert r.section.value_at([2]) == [list(F(1, -2)), list(F(-2, 4))]


def test_coefficient_names_follow_the_upper_triangle():
    assert mt.coefficient_names(2) == {(0, 0): "a", (0, 1): "b", (1, 1): "c"}


# gluing -----------------------------------------------------------------------

ORIGIN = bd.GluingSpec.at_points([[0]], [[0]], [linalg.identity(2)])
ID2 = [[1, 0], [0, 1]]


def test_compatible_sections_glue_to_a_valid_metric():
    g = mt.StratifiedSection.uniform(1, ID2)
    assert mt.check_compatible(g, STANDARD, g, STANDARD, ORIGIN) == (True, None)
    glued = mt.glue_metrics(g, STANDARD, g, STANDARD, ORIGIN)
    G = bd.glue(STANDARD, STANDARD, ORIGIN)
    assert mt.is_pseudometric(glued, G).is_valid


def test_incompatible_sections_name_the_disagreeing_vector():
    g1 = mt.StratifiedSection.uniform(1, ID2)
    g2 = mt.StratifiedSection.uniform(1, [[1, 0], [0, 0]])
    ok, witness = mt.check_compatible(g1, STANDARD, g2, STANDARD, ORIGIN)
    assert not ok
    assert witness["point"] == F(0) and witness["vector"] == "e3"
    with pytest.raises(Incompatible):
        mt.glue_metrics(g1, STANDARD, g2, STANDARD, ORIGIN)


def test_compatible_identity_with_invalid_sides_is_rejected():
    zero = mt.StratifiedSection.uniform(1, [[0, 0], [0, 0]])
    with pytest.raises(NotAPseudometric):
        mt.check_compatible(zero, STANDARD, zero, STANDARD, ORIGIN)


def test_glued_section_fails_where_the_sides_disagree():
    g1 = mt.StratifiedSection.uniform(1, ID2)
    g2 = mt.StratifiedSection.uniform(1, [[2, 0], [0, 1]])
    G = bd.glue(STANDARD, STANDARD, ORIGIN)
    v = mt.is_smooth_section(mt.GluedSection(g1, g2, ORIGIN), G)
    assert v.is_not_smooth and v.witness["side"] == "glued"


# properties -------------------------------------------------------------------

FIBRE_TERMS = ["0", "abs(y1)", "x1*abs(y1)", "abs(x1)*abs(y1)", "x1^2*abs(y1)", "x1*y1", "y1"]


@st.composite
def small_bundles(draw):
    m = draw(st.integers(1, 2))
    n_gens = draw(st.integers(1, 2))
    gens = [gen(1, *(draw(st.sampled_from(FIBRE_TERMS)) for _ in range(m))) for _ in range(n_gens)]
    return bundle(1 + m, 1, *gens)


@settings(max_examples=100)
@given(small_bundles())
def test_found_metrics_pass_the_checker(B):
    r = mt.find_pseudometric(B, degree=3)
    assert r.status in ("exists", "not_exists", "unknown")
    if r.status == "exists":
        assert mt.is_pseudometric(r.section, B).is_valid
    if r.status == "not_exists":
        assert r.deficient and "rank" in r.reason


@settings(max_examples=100)
@given(small_bundles(), st.data())
def test_smooth_sections_respect_the_rank_ceiling(B, data):
    unknowns, basis = mt.admissible_sections(B, 2)
    assume(basis)
    coeffs = data.draw(st.lists(small_rats, min_size=len(basis), max_size=len(basis)))
    vec = [sum((c * v[n] for c, v in zip(coeffs, basis)), Fraction(0)) for n in range(len(unknowns))]
    g = mt._section_from_vector(B, unknowns, vec)
    assert mt.is_smooth_section(g, B).is_smooth
    for x in mt.witness_points(B):
        dual = dvs.smooth_dual(B.fibre_space(x))
        assert linalg.rank(g.value_at(x)) <= dual.dim
        # every row of a smooth section is a smooth functional on the fibre
        assert all(dual.contains(row) for row in g.value_at(x))


@settings(max_examples=100)
@given(orthant_polys(dim=2, max_terms=2, max_var_degree=2), nonzero_rats, st.sampled_from([(0, 1), (1, 1)]),
       small_rats)
def test_obstruction_coefficients_cannot_be_nonzero(other, value, entry, a):
    # the named coefficients of the obstruction, set to anything nonzero, break smoothness
    r = mt.find_pseudometric(C)
    names = mt.coefficient_names(2)
    assert names[entry] in r.forced_zero
    assume(other.is_ordinarily_smooth())
    rows = [[OrthantPoly.const(2, a), OrthantPoly.zero(2)], [OrthantPoly.zero(2), other]]
    i, j = entry
    rows[i][j] = rows[j][i] = OrthantPoly.const(2, value) + (other if i != j else OrthantPoly.zero(2))
    assume(not rows[i][j].is_zero())
    assert mt.is_smooth_section(mt.StratifiedSection.uniform(2, rows), C).is_not_smooth


@st.composite
def invertible_2x2(draw):
    # lower times upper triangular with nonzero diagonals
    lo = [[draw(nonzero_rats), Fraction(0)], [draw(small_rats), draw(nonzero_rats)]]
    up = [[Fraction(1), draw(small_rats)], [Fraction(0), Fraction(1)]]
    return linalg.matmul(lo, up)


def _inverse(m):
    n = len(m)
    return linalg.transpose([linalg.solve(m, linalg.unit(n, i), n) for i in range(n)], n)


@settings(max_examples=100)
@given(invertible_2x2(), invertible_2x2(), invertible_2x2(), invertible_2x2(), st.booleans())
def test_compatibility_is_invariant_under_change_of_fibre_coordinates(M, lift, A, Cm, perturb):
    g2 = linalg.matmul(linalg.transpose(M), M)
    g1 = linalg.matmul(linalg.transpose(lift), linalg.matmul(g2, lift))
    if perturb:
        g1 = [[e + (1 if i == j == 0 else 0) for j, e in enumerate(r)] for i, r in enumerate(g1)]
    Ai, Ci = _inverse(A), _inverse(Cm)
    # new coordinates u' = A u on the right and v' = C v on the left
    g2c = linalg.matmul(linalg.transpose(Ai), linalg.matmul(g2, Ai))
    g1c = linalg.matmul(linalg.transpose(Ci), linalg.matmul(g1, Ci))
    liftc = linalg.matmul(A, linalg.matmul(lift, Ci))

    def verdict(a, b, F_):
        spec = bd.GluingSpec.at_points([[0]], [[0]], [F_])
        ga, gb = mt.StratifiedSection.uniform(1, a), mt.StratifiedSection.uniform(1, b)
        return mt._compatible_values(ga, gb, spec, STANDARD)[0]

    assert verdict(g1, g2, lift) == verdict(g1c, g2c, liftc) == (not perturb)
