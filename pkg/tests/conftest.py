"""Shared strategies and helpers."""

from __future__ import annotations

import sys
from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

from diffeolab.pwpoly import OrthantPoly, PlotMap

# exact arithmetic makes run times uneven; correctness, not speed, is tested here
settings.register_profile("exact", deadline=None)
settings.load_profile("exact")

small_rats = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
nonzero_rats = small_rats.filter(bool)


@st.composite
def monomials(draw, dim: int, max_var_degree: int = 3) -> OrthantPoly:
    """A coefficient times prod x_i^e_i |x_i|^m_i with e_i + m_i <= max_var_degree."""
    out = OrthantPoly.const(dim, draw(nonzero_rats))
    for i in range(dim):
        total = draw(st.integers(0, max_var_degree))
        has_abs = total > 0 and draw(st.booleans())
        out = out * OrthantPoly.var(dim, i) ** (total - has_abs)
        if has_abs:
            out = out * OrthantPoly.absvar(dim, i)
    return out


@st.composite
def orthant_polys(draw, dim: int | None = None, max_terms: int = 4, max_var_degree: int = 3) -> OrthantPoly:
    if dim is None:
        dim = draw(st.integers(1, 3))
    out = OrthantPoly.zero(dim)
    for _ in range(draw(st.integers(0, max_terms))):
        out = out + draw(monomials(dim, max_var_degree))
    return out


@st.composite
def plots(draw, domain_dim: int, codomain_dim: int, max_terms: int = 2) -> PlotMap:
    comps = [draw(orthant_polys(domain_dim, max_terms, 2)) for _ in range(codomain_dim)]
    return PlotMap(domain_dim, tuple(comps))


def poly(dim: int, text: str) -> OrthantPoly:
    """Parse one DSL expression in x1..x<dim>."""
    from diffeolab.dsl.parser import parse_expression

    return parse_expression(text, {f"x{i + 1}": i for i in range(dim)}, dim)


def F(*values) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


# independent oracle for smoothness constraints ---------------------------------
# One-sided differences on the stencil 0, h, 2h, 3h are exact for cubics, so
# with rational h and exact evaluation the jump of the first three derivatives
# across x_i = 0 is an exact linear functional of the function.

_STENCILS = (
    (Fraction(-11, 6), Fraction(3), Fraction(-3, 2), Fraction(1, 3)),
    (Fraction(2), Fraction(-5), Fraction(4), Fraction(-1)),
    (Fraction(-1), Fraction(3), Fraction(-3), Fraction(1)),
)
_SAMPLES = (Fraction(1, 2), Fraction(4, 3))


def jump_functionals(dim: int, h: Fraction = Fraction(1, 2)):
    """Yield callables f -> exact derivative jump, covering every break hyperplane."""
    import itertools

    for i in range(dim):
        others = [j for j in range(dim) if j != i]
        for signs in itertools.product((-1, 1), repeat=len(others)):
            for sample in _SAMPLES:
                base = [Fraction(0)] * dim
                for j, s in zip(others, signs):
                    base[j] = s * sample

                def point(t, base=base, i=i):
                    p = list(base)
                    p[i] = t
                    return p

                for order, stencil in enumerate(_STENCILS, start=1):
                    def jump(f, stencil=stencil, order=order, point=point):
                        right = sum(w * f.evaluate(point(k * h)) for k, w in enumerate(stencil)) / h ** order
                        left = sum(w * f.evaluate(point(-k * h)) for k, w in enumerate(stencil)) / (-h) ** order
                        return right - left
                    yield jump


def oracle_dual_dimension(generators, n: int) -> int:
    """dim {c : sum c_j p_j is smooth for every generator p}, via exact jumps."""
    import sympy

    rows = []
    for p in generators:
        for jump in jump_functionals(p.domain_dim):
            rows.append([jump(c) for c in p.components])
    if not rows:
        return n
    return n - sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows]).rank()


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.line(n))
