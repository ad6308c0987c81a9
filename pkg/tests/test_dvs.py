from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import F, oracle_dual_dimension, plots, poly
from diffeolab import dvs, linalg
from diffeolab.errors import DimensionMismatch, InvalidSubspace
from diffeolab.pwpoly import OrthantPoly, PlotMap
from diffeolab.verdict import Status


def plot(*texts: str, dim: int = 1) -> PlotMap:
    return PlotMap(dim, tuple(poly(dim, t) for t in texts))


def abs_last(n: int) -> dvs.DVSpace:
    return dvs.DVSpace.generated(n, [plot(*(["0"] * (n - 1) + ["abs(x1)"]))])


ANGLED = dvs.DVSpace.generated(2, [plot("x1/2 + abs(x1)/2", "abs(x1)/2 - x1/2")])


def test_dual_of_abs_last_coordinate():
    d = dvs.smooth_dual(abs_last(3))
    assert d.dim == 2
    assert d.vectors() == [list(F(1, 0, 0)), list(F(0, 1, 0))]


def test_dual_of_angled_plane():
    assert dvs.smooth_dual(ANGLED).vectors() == [list(F(1, -1))]


def test_two_abs_generators_kill_the_dual():
    V = dvs.DVSpace.generated(2, [plot("abs(x1)", "0"), plot("0", "abs(x1)")])
    assert dvs.smooth_dual(V).dim == 0
    assert dvs.smooth_symmetric_forms(V) == []


def test_standard_and_coarse_duals():
    assert dvs.smooth_dual(dvs.DVSpace.standard(3)).dim == 3
    assert dvs.smooth_dual(dvs.DVSpace.coarse(3)).dim == 0


def test_forms_of_angled_plane():
    forms = dvs.smooth_symmetric_forms(ANGLED)
    assert [f.rows() for f in forms] == [[list(F(1, -1)), list(F(-1, 1))]]
    for f in forms:
        assert linalg.matvec(f.rows(), F(1, 1)) == list(F(0, 0))


def test_forms_of_abs_second_coordinate():
    forms = dvs.smooth_symmetric_forms(abs_last(2))
    assert [f.rows() for f in forms] == [[list(F(1, 0)), list(F(0, 0))]]


def test_pseudo_metric_examples():
    g = dvs.pseudo_metric(abs_last(3))
    assert g.rows() == [list(F(1, 0, 0)), list(F(0, 1, 0)), list(F(0, 0, 0))]
    assert g.rank() == 2 and g.zero_eigen_multiplicity() == 1
    assert dvs.pseudo_metric(dvs.DVSpace.standard(2)).rows() == linalg.identity(2)
    assert dvs.pseudo_metric(dvs.DVSpace.coarse(2)).rank() == 0


def test_smooth_linear_maps():
    S1 = dvs.DVSpace.standard(1)
    assert dvs.is_smooth_linear_map([[1, -1]], ANGLED, S1).status is Status.SMOOTH
    v = dvs.is_smooth_linear_map([[0, 1]], abs_last(2), S1)
    assert v.status is Status.NOT_SMOOTH and v.witness == {"generator": 0, "component": 0}
    assert dvs.is_smooth_linear_map(linalg.identity(2), ANGLED, ANGLED).is_smooth
    with pytest.raises(DimensionMismatch):
        dvs.is_smooth_linear_map([[1, 0, 0]], ANGLED, S1)


def test_membership_examples():
    assert dvs.is_plot_member(ANGLED.generators[0], dvs.DVSpace.standard(2)).is_not_smooth
    assert dvs.is_plot_member(plot("x1", "x1^2"), ANGLED).is_smooth
    V = dvs.DVSpace.generated(2, [plot("0", "abs(x1)")])
    q = plot("0", "2*abs(x1)")
    v = dvs.is_plot_member(q, V)
    assert v.is_smooth
    dec = v.detail
    assert [(gi, h) for gi, _, h in dec.terms] == [(0, OrthantPoly.const(1, 2))]
    _assert_decomposition_holds(q, V, dec)


def test_membership_refutation_and_unknown():
    # |x| e2 is not a plot of the angled plane: e1 - e2 sends it to -|x|
    assert dvs.is_plot_member(plot("0", "abs(x1)"), ANGLED).is_not_smooth
    # |x1||x2| e1 over a space generated by a one-parameter plot: beyond the catalog,
    # and no functional refutes it because the dual is already zero
    V = dvs.DVSpace.generated(1, [plot("abs(x1)")])
    v = dvs.is_plot_member(plot("abs(x1)*abs(x2)", dim=2), V)
    assert v.status is Status.UNKNOWN and v.reason


def _assert_decomposition_holds(q, V, dec):
    total = list(dec.smooth_part.components)
    for gi, phi, h in dec.terms:
        comp = V.generators[gi].compose_affine(phi)
        total = [t + h * c for t, c in zip(total, comp.components)]
    assert tuple(total) == q.components
    assert dec.smooth_part.is_ordinarily_smooth()


def test_combinations():
    S1 = dvs.DVSpace.standard(1)
    A1 = dvs.DVSpace.generated(1, [plot("abs(x1)")])
    total = dvs.combine_spaces("direct_sum", S1, A1)
    assert total.dim == 2 and dvs.smooth_dual(total).dim == 1
    T = dvs.DVSpace.generated(3, [plot("0", "abs(x1)", "abs(x1)")])
    Q = dvs.combine_spaces("quotient", T, [[0, 0, 1]])
    assert Q.generators == (plot("0", "abs(x1)"),)
    assert dvs.smooth_dual(Q).dim == 1
    assert dvs.smooth_dual(dvs.combine_spaces("tensor", S1, ANGLED)).dim == 1
    with pytest.raises(InvalidSubspace):
        dvs.quotient(T, [[1, 0, 0], [2, 0, 0]])


def test_generated_with_smooth_generators_is_standard():
    V = dvs.DVSpace.from_generators(2, [plot("x1", "x1^3")])
    assert V.is_standard


# properties -------------------------------------------------------------------

@st.composite
def generated_spaces(draw, n=None, max_gens=3):
    n = n or draw(st.integers(1, 3))
    gens = [draw(plots(draw(st.integers(1, 2)), n)) for _ in range(draw(st.integers(1, max_gens)))]
    return n, gens


@settings(max_examples=120)
@given(generated_spaces(), st.data())
def test_dual_agrees_with_jump_oracle_and_is_monotone(space, data):
    n, gens = space
    V = dvs.DVSpace.generated(n, gens)
    d = dvs.smooth_dual(V)
    assert d.dim == oracle_dual_dimension(gens, n)
    for f in d.basis:
        assert all(f.compose(p).is_ordinarily_smooth() for p in gens)
    extra = data.draw(plots(data.draw(st.integers(1, 2)), n))
    assert dvs.smooth_dual(dvs.DVSpace.generated(n, gens + [extra])).dim <= d.dim


@settings(max_examples=100)
@given(generated_spaces(max_gens=2))
def test_forms_factor_through_the_dual(space):
    n, gens = space
    V = dvs.DVSpace.generated(n, gens)
    dual = dvs.smooth_dual(V)
    for form in dvs.smooth_symmetric_forms(V):
        for row in form.rows():
            assert linalg.in_span(row, dual.vectors())
        assert form.zero_eigen_multiplicity() >= n - dual.dim
    g = dvs.pseudo_metric(V)
    assert g is not None
    psd, rank = g.psd_rank()
    assert psd and rank == dual.dim
    assert dvs.form_in_span(g, dvs.smooth_symmetric_forms(V))


@settings(max_examples=100)
@given(generated_spaces(max_gens=2), st.data())
def test_membership_is_invariant_under_generator_order(space, data):
    n, gens = space
    q = data.draw(plots(1, n))
    v1 = dvs.is_plot_member(q, dvs.DVSpace.generated(n, gens))
    v2 = dvs.is_plot_member(q, dvs.DVSpace.generated(n, list(reversed(gens))))
    assert {v1.status, v2.status} != {Status.SMOOTH, Status.NOT_SMOOTH}
    if v1.is_smooth and v1.detail is not None:
        _assert_decomposition_holds(q, dvs.DVSpace.generated(n, gens), v1.detail)
    if v1.is_not_smooth and "functional" in v1.witness:
        f = dvs.LinFunctional(tuple(v1.witness["functional"]))
        assert not f.compose(q).is_ordinarily_smooth()


@settings(max_examples=100)
@given(generated_spaces(n=3, max_gens=2), st.sampled_from([0, 1, 2]))
def test_quotient_dual_pulls_back_injectively(space, axis):
    n, gens = space
    V = dvs.DVSpace.generated(n, gens)
    sub = [linalg.unit(n, axis)]
    Q = dvs.quotient(V, sub)
    proj, _ = dvs.quotient_projection(sub, n)
    pulled = [linalg.matvec(linalg.transpose(proj), f) for f in dvs.smooth_dual(Q).vectors()]
    assert linalg.rank(pulled) == len(pulled)
    dual = dvs.smooth_dual(V).vectors()
    for f in pulled:
        assert linalg.in_span(f, dual)
