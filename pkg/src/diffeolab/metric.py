"""Pseudo-metrics on pseudo-bundles.

A section assigns to every cell of the coordinate-hyperplane arrangement
of the base (sign vectors in {-1, 0, 1}^k) a symmetric matrix whose
entries are OrthantPoly in the base variables, in fibre coordinates.

Smoothness is tested on pairs of sections of the bundle: generators and
the constant unit sections.  For a pair (q, q') the evaluation
e(x, y, y') = q(x, y)^T g(x) q'(x, y') must agree with a single ordinarily
smooth function.  The top cells fix that function; lower cells must match
its restriction.  On zero-dimensional cells pairs of two constant
sections are not tested, which is what lets a metric jump at an isolated
point of the base.
"""

from __future__ import annotations

import itertools
import random
import string
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import dvs, linalg
from .bundle import (GeneratedBundle, GluedBundle, GluingSpec, PseudoBundle, PullbackCoarse,
                     arrangement_witnesses, dual_profile, as_point, _fmt_point)
from .errors import Incompatible, NotAPseudometric, StrataMismatch
from .pwpoly import OrthantPoly, PlotMap
from .verdict import Verdict

DEFAULT_DEGREE = 4

Signs = tuple[int, ...]
PolyMatrix = tuple[tuple[OrthantPoly, ...], ...]


def _poly_matrix(k: int, rows) -> PolyMatrix:
    out = []
    for row in rows:
        out.append(tuple(e if isinstance(e, OrthantPoly) else OrthantPoly.const(k, e) for e in row))
    m = len(out)
    if any(len(r) != m for r in out):
        raise StrataMismatch("section matrices must be square")
    for i in range(m):
        for j in range(i + 1, m):
            if out[i][j] != out[j][i]:
                raise StrataMismatch("section matrices must be symmetric")
    for r in out:
        for e in r:
            if e.dim != k:
                raise StrataMismatch("section entries must be functions of the base coordinates")
    return tuple(out)


def _matches(cond: tuple[tuple[int, int], ...], signs: Signs) -> bool:
    return all(signs[i] == s for i, s in cond)


@dataclass(frozen=True)
class StratifiedSection:
    """Fibrewise symmetric form given by ordered rules on arrangement cells.

    ``rules`` is a sequence of ``(condition, matrix)`` where a condition is a
    tuple of ``(coordinate index, sign)``; the first matching rule applies
    and ``default`` covers the remaining cells.
    """

    base_dim: int
    fibre_dim: int
    rules: tuple[tuple[tuple[tuple[int, int], ...], PolyMatrix], ...]
    default: PolyMatrix

    def __post_init__(self):
        k, m = self.base_dim, self.fibre_dim
        default = _poly_matrix(k, self.default)
        if len(default) != m:
            raise StrataMismatch(f"section matrices must be {m}x{m}")
        rules = []
        for cond, mat in self.rules:
            cond = tuple(sorted((int(i), int(s)) for i, s in cond))
            if any(not 0 <= i < k or s not in (-1, 0, 1) for i, s in cond):
                raise StrataMismatch("stratum condition on a coordinate outside the base")
            mat = _poly_matrix(k, mat)
            if len(mat) != m:
                raise StrataMismatch(f"section matrices must be {m}x{m}")
            rules.append((cond, mat))
        object.__setattr__(self, "rules", tuple(rules))
        object.__setattr__(self, "default", default)

    @classmethod
    def uniform(cls, base_dim: int, matrix) -> "StratifiedSection":
        return cls(base_dim, len(matrix), (), matrix)

    @classmethod
    def delta(cls, base_dim: int, matrix, constant=1) -> "StratifiedSection":
        """``constant * matrix`` at the origin of the base and zero elsewhere."""
        m = len(matrix)
        cond = tuple((i, 0) for i in range(base_dim))
        scaled = [[Fraction(constant) * Fraction(e) for e in row] for row in matrix]
        return cls(base_dim, m, ((cond, scaled),), [[0] * m for _ in range(m)])

    @classmethod
    def from_cells(cls, base_dim: int, fibre_dim: int, cells: dict) -> "StratifiedSection":
        """Compact section from an explicit matrix per arrangement cell."""
        groups: dict[PolyMatrix, list[Signs]] = {}
        for signs in itertools.product((-1, 0, 1), repeat=base_dim):
            mat = _poly_matrix(base_dim, cells[signs])
            groups.setdefault(mat, []).append(signs)
        default = min(groups, key=lambda mat: (-len(groups[mat]), min(groups[mat])))
        rules = []
        for mat, members in groups.items():
            if mat != default:
                for signs in members:
                    rules.append((tuple(enumerate(signs)), mat))
        rules.sort(key=lambda r: r[0])
        return cls(base_dim, fibre_dim, tuple(rules), default)

    def matrix_for(self, signs: Signs) -> PolyMatrix:
        for cond, mat in self.rules:
            if _matches(cond, signs):
                return mat
        return self.default

    def value_at(self, x0) -> linalg.Matrix:
        x0 = as_point(x0)
        if len(x0) != self.base_dim:
            raise StrataMismatch("point dimension differs from the section base")
        signs = tuple((c > 0) - (c < 0) for c in x0)
        return [[e.evaluate(x0) for e in row] for row in self.matrix_for(signs)]

    def cells(self) -> dict[Signs, PolyMatrix]:
        return {s: self.matrix_for(s) for s in itertools.product((-1, 0, 1), repeat=self.base_dim)}


@dataclass(frozen=True)
class GluedSection:
    left: StratifiedSection
    right: StratifiedSection
    spec: GluingSpec

    @property
    def fibre_dim(self) -> int:
        return self.right.fibre_dim

    def value_at(self, point) -> linalg.Matrix:
        side, x = point[0], as_point(point[1])
        if side == "L" and self.spec.contains(x):
            return self.right.value_at(self.spec.image(x))
        return (self.left if side == "L" else self.right).value_at(x)


# smoothness -----------------------------------------------------------------

@dataclass(frozen=True)
class _Section:
    name: str
    plot: PlotMap  # fibre components, domain (x, params)


def _test_sections(B: GeneratedBundle) -> tuple[list[_Section], list[_Section]]:
    k, m = B.base_dim, B.fibre_dim
    gens = [_Section(f"p{i + 1}", g) for i, g in enumerate(B.fibre_generators)]
    consts = [_Section(f"e{k + j + 1}", PlotMap(k, tuple(OrthantPoly.const(k, int(i == j)) for i in range(m))))
              for j in range(m)]
    return gens, consts


def _pairs(B: GeneratedBundle):
    """Unordered pairs, generator pairs first; flag marks two constant sections."""
    gens, consts = _test_sections(B)
    out = [(a, b, False) for a, b in itertools.combinations_with_replacement(gens, 2)]
    out += [(a, c, False) for a in gens for c in consts]
    out += [(a, b, True) for a, b in itertools.combinations_with_replacement(consts, 2)]
    return out


def _restrict(poly: OrthantPoly, signs: Signs) -> OrthantPoly:
    """Value on the cell: zero coordinates substituted, the others sign-specialized."""
    zero = {i: 0 for i, s in enumerate(signs) if s == 0}
    nonzero = [i for i, s in enumerate(signs) if s != 0]
    p = poly.partial_specialize({i: signs[i] for i in nonzero})
    return p.substitute_point(zero)


def _joint(q: PlotMap, q2: PlotMap, k: int) -> tuple[list[OrthantPoly], list[OrthantPoly], int]:
    """Components of q(x, y) and q'(x, y') on the joint domain (x, y, y')."""
    d1, d2 = q.domain_dim, q2.domain_dim
    d = d1 + d2 - k
    a = [c.embed(d, list(range(d1))) for c in q.components]
    b = [c.embed(d, list(range(k)) + list(range(d1, d))) for c in q2.components]
    return a, b, d


def _pair_products(q: PlotMap, q2: PlotMap, k: int, m: int):
    """Polynomials multiplying g_ij (i <= j) in q^T g q'."""
    a, b, d = _joint(q, q2, k)
    out = {}
    for i in range(m):
        for j in range(i, m):
            p = a[i] * b[j]
            if i != j:
                p = p + a[j] * b[i]
            out[(i, j)] = p
    return out, d


def _evaluate_pair(mat: PolyMatrix, products: dict, d: int, k: int) -> OrthantPoly:
    total = OrthantPoly(d)
    for (i, j), p in products.items():
        e = mat[i][j]
        if not e.is_zero():
            total = total + e.embed(d, list(range(k))) * p
    return total


def _cell_is_point(signs: Signs) -> bool:
    return all(s == 0 for s in signs)


def _check_bundle(g: StratifiedSection, B: PseudoBundle):
    if g.base_dim != B.base_dim or g.fibre_dim != B.fibre_dim:
        raise StrataMismatch(
            f"section over R^{g.base_dim} with {g.fibre_dim}x{g.fibre_dim} matrices does not fit this bundle")


def is_smooth_section(g, B: PseudoBundle) -> Verdict:
    """Three-valued smoothness of a fibrewise bilinear section."""
    if isinstance(B, GluedBundle):
        return _glued_smooth(g, B)
    _check_bundle(g, B)
    if isinstance(B, PullbackCoarse):
        if all(e.is_zero() for mat in g.cells().values() for row in mat for e in row):
            return Verdict.smooth("zero section")
        return Verdict.not_smooth({"pair": ("any", "any")},
                                  "coarse fibres admit discontinuous plots; only the zero section is smooth")
    if not isinstance(B, GeneratedBundle):
        return Verdict.unknown("plots of this bundle are not given by a finite generator family")
    k, m = B.base_dim, B.fibre_dim
    cells = g.cells()
    top = [s for s in cells if all(s)]
    lower = [s for s in cells if not all(s)]
    if k == 0:
        top, lower = [()], []
    for q, q2, both_const in _pairs(B):
        products, d = _pair_products(q.plot, q2.plot, k, m)
        if k == 0:
            e = _evaluate_pair(cells[()], products, d, k)
            if not e.is_ordinarily_smooth():
                return _fail(q, q2, (), "the evaluation is not ordinarily smooth")
            continue
        evals = {}
        for s in top:
            e = _restrict(_evaluate_pair(cells[s], products, d, k), s)
            if not e.is_ordinarily_smooth():
                return _fail(q, q2, s, "the evaluation is not ordinarily smooth on an open cell")
            evals[s] = e
        reference = evals[top[0]]
        for s in top[1:]:
            if evals[s] != reference:
                return _fail(q, q2, s, "open cells disagree, so the evaluation jumps across a hyperplane")
        for s in lower:
            if both_const and _cell_is_point(s):
                continue
            value = _restrict(_evaluate_pair(cells[s], products, d, k), s)
            expected = reference.substitute_point({i: 0 for i, c in enumerate(s) if c == 0})
            if value != expected:
                return _fail(q, q2, s, "the value on a lower cell differs from the limit of the open cells")
    return Verdict.smooth("every test pair evaluates to an ordinarily smooth function")


def _fail(q: _Section, q2: _Section, signs: Signs, reason: str) -> Verdict:
    return Verdict.not_smooth({"pair": (q.name, q2.name), "stratum": tuple(signs)},
                              f"pair ({q.name}, {q2.name}) on {cell_label(signs)}: {reason}")


def cell_label(signs: Signs) -> str:
    if not signs:
        return "the base"
    return ", ".join(f"x{i + 1}{'<0' if s < 0 else '=0' if s == 0 else '>0'}" for i, s in enumerate(signs))


def _glued_smooth(g, B: GluedBundle) -> Verdict:
    if not isinstance(g, GluedSection):
        return Verdict.unknown("sections of a glued bundle are given as a pair of compatible sections")
    for side, sec, bun in (("left", g.left, B.left), ("right", g.right, B.right)):
        v = is_smooth_section(sec, bun)
        if not v.is_smooth:
            if v.is_not_smooth:
                return Verdict.not_smooth({"side": side, **(v.witness or {})}, v.reason)
            return v
    ok, witness = _compatible_values(g.left, g.right, g.spec, B.left)
    if not ok:
        return Verdict.not_smooth({"side": "glued", **witness}, "the two sides disagree over the glued set")
    return Verdict.smooth("both sides are smooth and agree over the glued set")


# pseudo-metric check --------------------------------------------------------

@dataclass(frozen=True)
class MetricVerdict:
    status: str  # "valid" | "invalid" | "unknown"
    point: object = None
    reason: str = ""
    failures: tuple = field(default=(), compare=False)

    @property
    def is_valid(self) -> bool:
        return self.status == "valid"

    @classmethod
    def valid(cls) -> "MetricVerdict":
        return cls("valid")


def witness_points(B: PseudoBundle) -> list:
    """Zero-dimensional cells first, then one point per remaining stratum."""
    if isinstance(B, GluedBundle):
        return B.base_points()
    k = B.base_dim
    pts = [as_point([0] * k)]
    if isinstance(B, GeneratedBundle) and k == 1:
        for s in dual_profile(B).strata:
            pts.append(s.witness)
    pts += arrangement_witnesses(k)
    seen, out = set(), []
    for p in pts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def check_at_point(G: linalg.Matrix, dual: dvs.DualBasis) -> str | None:
    """Reason the form fails to be a pseudo-metric on the fibre, or None."""
    psd, r = linalg.psd_rank(G)
    if not psd:
        return "not PSD"
    if r != dual.dim:
        return "rank deficit" if r < dual.dim else "rank excess"
    if any(not dual.contains(row) for row in G):
        return "not smooth"
    return None


def is_pseudometric(g, B: PseudoBundle) -> MetricVerdict:
    v = is_smooth_section(g, B)
    if v.is_unknown:
        return MetricVerdict("unknown", reason=v.reason)
    failures = []
    if v.is_not_smooth:
        signs = v.witness.get("stratum") if isinstance(v.witness, dict) else None
        point = as_point(signs) if signs is not None else None
        failures.append((point, "not smooth"))
    for x in witness_points(B):
        reason = check_at_point(g.value_at(x), dvs.smooth_dual(B.fibre_space(x)))
        if reason is not None:
            failures.append((x, reason))
    if not failures:
        return MetricVerdict.valid()
    point, reason = failures[0]
    return MetricVerdict("invalid", point, reason, tuple(failures))


# construction ---------------------------------------------------------------

@dataclass(frozen=True)
class MetricSearch:
    status: str  # "exists" | "not_exists" | "unknown"
    section: StratifiedSection | None = None
    reason: str = ""
    forced_zero: tuple[str, ...] = ()
    deficient: tuple = ()


def coefficient_names(m: int) -> dict[tuple[int, int], str]:
    letters = string.ascii_lowercase
    names = {}
    for idx, (i, j) in enumerate((i, j) for i in range(m) for j in range(i, m)):
        names[(i, j)] = letters[idx] if idx < 26 else f"c{idx}"
    return names


def _monomials(k: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(k), deg):
            e = [0] * k
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _mono(k: int, exps: tuple[int, ...]) -> OrthantPoly:
    return OrthantPoly(k, {(exps, (0,) * k): Fraction(1)})


def admissible_sections(B: GeneratedBundle, degree: int):
    """Linear space of smooth sections in the degree-bounded ansatz.

    Away from the origin every section equals one polynomial matrix P
    (constant pairs force this); at the origin it is a free constant
    matrix G0.  Returns ``(unknowns, basis)`` where unknowns are tuples
    ``("P", (i, j), exps)`` or ``("G0", (i, j))`` and each basis element is a
    vector over them.
    """
    k, m = B.base_dim, B.fibre_dim
    entries = [(i, j) for i in range(m) for j in range(i, m)]
    monos = _monomials(k, degree)
    unknowns = [("P", e, mu) for e in entries for mu in monos]
    if k > 0:
        unknowns += [("G0", e) for e in entries]
    col = {u: n for n, u in enumerate(unknowns)}
    rows: dict[tuple, dict[int, Fraction]] = {}
    origin = {i: 0 for i in range(k)}
    mono_polys = {mu: _mono(k, mu) for mu in monos}
    for pi, (q, q2, both_const) in enumerate(_pairs(B)):
        products, d = _pair_products(q.plot, q2.plot, k, m)
        if both_const:
            continue  # constant pairs are built into the ansatz
        for e in entries:
            prod = products[e]
            if prod.is_zero():
                continue
            for mu in monos:
                term = (mono_polys[mu].embed(d, list(range(k))) * prod).abs_part()
                for key, c in term.items():
                    rows.setdefault(("top", pi, key), {})
                    r = rows[("top", pi, key)]
                    r[col[("P", e, mu)]] = r.get(col[("P", e, mu)], Fraction(0)) + c
            if k > 0:
                at0 = prod.substitute_point(origin)
                const_mu = (0,) * k
                for key, c in at0.items():
                    r = rows.setdefault(("origin", pi, key), {})
                    r[col[("G0", e)]] = r.get(col[("G0", e)], Fraction(0)) + c
                    r[col[("P", e, const_mu)]] = r.get(col[("P", e, const_mu)], Fraction(0)) - c
    dense = []
    for r in rows.values():
        row = [Fraction(0)] * len(unknowns)
        for j, c in r.items():
            row[j] = c
        if any(row):
            dense.append(row)
    basis = linalg.nullspace(dense, len(unknowns))
    return unknowns, basis


def _section_from_vector(B: GeneratedBundle, unknowns, vec) -> StratifiedSection:
    k, m = B.base_dim, B.fibre_dim
    P = [[OrthantPoly(k) for _ in range(m)] for _ in range(m)]
    G0 = [[Fraction(0)] * m for _ in range(m)]
    for u, c in zip(unknowns, vec):
        if not c:
            continue
        if u[0] == "P":
            (i, j), mu = u[1], u[2]
            P[i][j] = P[i][j] + _mono(k, mu).scale(c)
            if i != j:
                P[j][i] = P[i][j]
        else:
            i, j = u[1]
            G0[i][j] += c
            if i != j:
                G0[j][i] = G0[i][j]
    cells = {}
    for signs in itertools.product((-1, 0, 1), repeat=k):
        if k > 0 and _cell_is_point(signs):
            cells[signs] = G0
        else:
            cells[signs] = P
    return StratifiedSection.from_cells(k, m, cells)


def _canonical_candidate(B: PseudoBundle) -> StratifiedSection:
    k, m = B.base_dim, B.fibre_dim
    cells = {}
    for signs in itertools.product((-1, 0, 1), repeat=k):
        dual = dvs.smooth_dual(B.fibre_space(signs))
        cells[signs] = dvs.SymForm.from_functionals(dual.basis, m).rows() if m else []
    return StratifiedSection.from_cells(k, m, cells)


def _interpolated_candidate(B: GeneratedBundle, sections: list[StratifiedSection]) -> StratifiedSection | None:
    """Admissible section equal to the sum of squares of the dual basis at each witness.

    The conditions are linear in the combination coefficients, and meeting
    them makes the value PSD with the right rank at every witness point.
    """
    if not sections:
        return None
    m = B.fibre_dim
    rows, rhs = [], []
    for x in witness_points(B):
        dual = dvs.smooth_dual(B.fibre_space(x))
        target = dvs.SymForm.from_functionals(dual.basis, m).rows()
        values = [s.value_at(x) for s in sections]
        for i in range(m):
            for j in range(i, m):
                rows.append([v[i][j] for v in values])
                rhs.append(Fraction(target[i][j]))
    coeffs = linalg.solve(rows, rhs, len(sections))
    if coeffs is None:
        return None
    k = B.base_dim
    cells = {}
    for signs in itertools.product((-1, 0, 1), repeat=k):
        mats = [s.matrix_for(signs) for s in sections]
        cells[signs] = [[sum((mat[i][j].scale(c) for c, mat in zip(coeffs, mats) if c), OrthantPoly(k))
                         for j in range(m)] for i in range(m)]
    return StratifiedSection.from_cells(k, m, cells)


def _group_label(cells: Sequence[Signs]) -> str:
    """Shortest description of a set of cells sharing a zero pattern."""
    k = len(cells[0])
    parts = []
    for i in range(k):
        values = {c[i] for c in cells}
        if values == {0}:
            parts.append(f"x{i + 1}=0")
        elif len(values) == 1:
            parts.append(f"x{i + 1}{'<0' if values.pop() < 0 else '>0'}")
    return ", ".join(parts) if parts else "the base"


def find_pseudometric(B: PseudoBundle, degree: int = DEFAULT_DEGREE, seed: int = 0,
                      attempts: int = 8) -> MetricSearch:
    if isinstance(B, PullbackCoarse):
        m = B.fibre_dim
        zero = StratifiedSection.uniform(B.base_dim, [[0] * m for _ in range(m)])
        return MetricSearch("exists", zero, "coarse fibres have zero duals")
    if not isinstance(B, GeneratedBundle):
        return MetricSearch("unknown", reason="searching needs a generated bundle")
    candidate = _canonical_candidate(B)
    if is_pseudometric(candidate, B).is_valid:
        return MetricSearch("exists", candidate, "sum of squares of the fibre dual bases")
    unknowns, basis = admissible_sections(B, degree)
    k, m = B.base_dim, B.fibre_dim
    names = coefficient_names(m)
    forced = []
    for (i, j), name in names.items():
        cols = [n for n, u in enumerate(unknowns) if u[0] == "P" and u[1] == (i, j)]
        if all(not v[c] for v in basis for c in cols):
            forced.append(name)
    sections = [_section_from_vector(B, unknowns, v) for v in basis]
    deficient = []
    for x in witness_points(B):
        need = dvs.smooth_dual(B.fibre_space(x)).dim
        columns = [list(col) for s in sections for col in linalg.transpose(s.value_at(x), m)]
        ceiling = linalg.rank(columns) if columns else 0
        if ceiling < need:
            deficient.append((tuple(int(c) for c in x), ceiling, need))
    if deficient:
        groups: dict[tuple, list] = {}
        for signs, ceiling, need in deficient:
            groups.setdefault((tuple(s == 0 for s in signs), ceiling, need), []).append(signs)
        where = []
        for (_, ceiling, need), cells in groups.items():
            where.append(f"rank {ceiling} < required {need} on stratum {_group_label(cells)}")
        head = f"coefficients {','.join(forced)} forced to 0; " if forced else ""
        return MetricSearch("not_exists", None, head + "; ".join(where), tuple(forced),
                            tuple(d[0] for d in deficient))
    cand = _interpolated_candidate(B, sections)
    if cand is not None and is_pseudometric(cand, B).is_valid:
        return MetricSearch("exists", cand, "admissible section matching the fibre dual forms at every witness")
    rng = random.Random(seed)
    for _ in range(attempts):
        coeffs = [Fraction(rng.randint(-2, 2)) for _ in basis]
        vec = [sum((c * v[n] for c, v in zip(coeffs, basis)), Fraction(0)) for n in range(len(unknowns))]
        cand = _section_from_vector(B, unknowns, vec)
        if is_pseudometric(cand, B).is_valid:
            return MetricSearch("exists", cand, "verified combination of admissible sections")
    return MetricSearch("unknown", reason=f"no verified candidate and no obstruction within degree {degree}")


# gluing ---------------------------------------------------------------------

def _compatible_values(g1: StratifiedSection, g2: StratifiedSection, spec: GluingSpec,
                       B1: PseudoBundle) -> tuple[bool, dict | None]:
    for y in spec.sample_points(B1.base_dim):
        F = spec.lift_at(y)
        G1 = g1.value_at(y)
        G2 = g2.value_at(spec.image(y))
        pulled = linalg.matmul(linalg.transpose(F, len(G1)), linalg.matmul(G2, F)) if F else \
            linalg.zeros(len(G1), len(G1))
        diff = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(G1, pulled)]
        if not linalg.is_zero_matrix(diff):
            col = next(j for j in range(len(diff)) if any(diff[i][j] for i in range(len(diff))))
            return False, {"point": y, "vector": f"e{B1.base_dim + col + 1}", "difference": diff}
    return True, None


def check_compatible(g1: StratifiedSection, B1: PseudoBundle, g2: StratifiedSection, B2: PseudoBundle,
                     spec: GluingSpec) -> tuple[bool, dict | None]:
    """Is g1(y) = F(y)^T g2(f(y)) F(y) over the glued set?

    A violated identity is reported first; when the identity holds both
    sections must also be pseudo-metrics.
    """
    ok, witness = _compatible_values(g1, g2, spec, B1)
    if not ok:
        return ok, witness
    for side, g, B in (("left", g1, B1), ("right", g2, B2)):
        v = is_pseudometric(g, B)
        if not v.is_valid:
            raise NotAPseudometric(f"the {side} section is not a pseudo-metric: {v.reason}", side)
    return True, None


def glue_metrics(g1: StratifiedSection, B1: PseudoBundle, g2: StratifiedSection, B2: PseudoBundle,
                 spec: GluingSpec) -> GluedSection:
    ok, witness = check_compatible(g1, B1, g2, B2, spec)
    if not ok:
        raise Incompatible(f"sections disagree over {_fmt_point(witness['point'])} along {witness['vector']}")
    return GluedSection(g1, g2, spec)
