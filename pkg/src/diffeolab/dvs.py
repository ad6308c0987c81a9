"""Finitely generated diffeological vector spaces.

A :class:`DVSpace` carries the finest vector space diffeology on R^n that
contains a finite list of generating plots.  Every plot of that diffeology
is locally ``F + sum_j h_j * (p_j o phi_j)`` with ``F``, ``h_j``, ``phi_j``
ordinarily smooth, so a linear map out of the space is smooth as soon as
it sends each generator to an ordinarily smooth map.  That reduction is
what makes the dual and the bilinear-form solvers exact.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import DimensionMismatch, InvalidSubspace, UnsupportedOperation
from .pwpoly import OrthantPoly, PlotMap
from .verdict import Verdict

# enumeration bound for the substitution catalog used by membership checks
MAX_CATALOG = 4096


class Kind(enum.Enum):
    STANDARD = "standard"
    COARSE = "coarse"
    GENERATED = "generated"


@dataclass(frozen=True)
class DVSpace:
    dim: int
    kind: Kind
    generators: tuple[PlotMap, ...] = ()
    # False when the generators only give a sub-diffeology of the intended one
    complete: bool = True

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.kind is Kind.GENERATED:
            if not self.generators:
                raise ValueError("a generated space needs at least one generator")
            for g in self.generators:
                if g.codomain_dim != self.dim:
                    raise DimensionMismatch(
                        f"generator with codomain dimension {g.codomain_dim} in a space of dimension {self.dim}")
        elif self.generators:
            raise ValueError(f"{self.kind.value} spaces take no generators")

    @classmethod
    def standard(cls, n: int) -> "DVSpace":
        return cls(n, Kind.STANDARD)

    @classmethod
    def coarse(cls, n: int) -> "DVSpace":
        return cls(n, Kind.COARSE)

    @classmethod
    def generated(cls, n: int, generators: Sequence[PlotMap], complete: bool = True) -> "DVSpace":
        return cls(n, Kind.GENERATED, tuple(generators), complete)

    @classmethod
    def from_generators(cls, n: int, generators: Sequence[PlotMap], complete: bool = True) -> "DVSpace":
        """Generated space, collapsed to Standard when every generator is ordinarily smooth."""
        gens = tuple(g for g in generators if not g.is_ordinarily_smooth())
        if not gens:
            return cls.standard(n) if complete else cls(n, Kind.STANDARD, (), complete)
        return cls.generated(n, gens, complete)

    @property
    def is_standard(self) -> bool:
        return self.kind is Kind.STANDARD

    @property
    def is_coarse(self) -> bool:
        return self.kind is Kind.COARSE

    @property
    def is_generated(self) -> bool:
        return self.kind is Kind.GENERATED

    def nonsmooth_directions(self) -> list[list[Fraction]]:
        """Coefficient vectors of the |.|-carrying monomials of all generators."""
        return nonsmooth_directions(self.generators, self.dim)


@dataclass(frozen=True)
class LinFunctional:
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))

    def __len__(self):
        return len(self.coefficients)

    def __call__(self, v: Sequence[Fraction]) -> Fraction:
        return linalg.dot(self.coefficients, v)

    def compose(self, plot: PlotMap) -> OrthantPoly:
        return plot.functional(self.coefficients)


@dataclass(frozen=True)
class SymForm:
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        m = tuple(tuple(Fraction(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        if any(len(row) != len(m) for row in m):
            raise DimensionMismatch("a symmetric form needs a square matrix")
        if not linalg.is_symmetric(m):
            raise ValueError("matrix is not symmetric")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.matrix]

    def rank(self) -> int:
        return linalg.rank(self.matrix)

    def psd_rank(self) -> tuple[bool, int]:
        return linalg.psd_rank(self.matrix)

    def zero_eigen_multiplicity(self) -> int:
        return linalg.zero_eigen_multiplicity(self.matrix)

    @classmethod
    def from_functionals(cls, functionals: Sequence[LinFunctional], n: int) -> "SymForm":
        m = linalg.zeros(n, n)
        for f in functionals:
            c = f.coefficients
            for i in range(n):
                if c[i]:
                    for j in range(n):
                        m[i][j] += c[i] * c[j]
        return cls(m)


@dataclass(frozen=True)
class DualBasis:
    basis: tuple[LinFunctional, ...]
    ambient_dim: int
    # False when only an upper bound is known (incomplete generator family)
    exact: bool = True

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[list[Fraction]]:
        return [list(f.coefficients) for f in self.basis]

    def contains(self, coefficients: Sequence[Fraction]) -> bool:
        return linalg.in_span(list(coefficients), self.vectors())


def nonsmooth_directions(generators: Sequence[PlotMap], n: int) -> list[list[Fraction]]:
    vecs: list[list[Fraction]] = []
    seen = set()
    for g in generators:
        keys = sorted({k for comp in g.components for k, _ in comp.items() if any(k[1])})
        for key in keys:
            v = [comp.terms.get(key, Fraction(0)) for comp in g.components]
            t = tuple(v)
            if t not in seen:
                seen.add(t)
                vecs.append(v)
    return vecs


def _dual_vectors(V: DVSpace) -> list[list[Fraction]]:
    if V.is_coarse:
        return []
    if V.is_standard:
        return linalg.identity(V.dim)
    return linalg.nullspace(V.nonsmooth_directions(), V.dim)


def smooth_dual(V: DVSpace) -> DualBasis:
    """Basis of the smooth linear functionals, in reduced row-echelon order.

    f is smooth iff f o p is ordinarily smooth for each generator p, i.e.
    iff f kills the coefficient vector of every |.|-monomial.
    """
    vecs = _dual_vectors(V)
    return DualBasis(tuple(LinFunctional(v) for v in vecs), V.dim, exact=V.complete)


def _sym_index(n: int) -> dict[tuple[int, int], int]:
    idx = {}
    for i in range(n):
        for j in range(i, n):
            idx[(i, j)] = len(idx)
    return idx


def _sym_from_vector(vec: Sequence[Fraction], n: int) -> SymForm:
    idx = _sym_index(n)
    m = linalg.zeros(n, n)
    for (i, j), k in idx.items():
        m[i][j] = m[j][i] = vec[k]
    return SymForm(m)


def _bilinear_row(u: Sequence[Fraction], v: Sequence[Fraction], idx: dict) -> list[Fraction]:
    """Coefficients of u^T A v in the upper-triangle unknowns of A."""
    row = [Fraction(0)] * len(idx)
    n = len(u)
    for j in range(n):
        if not u[j]:
            continue
        for l in range(n):
            if v[l]:
                a, b = (j, l) if j <= l else (l, j)
                row[idx[(a, b)]] += u[j] * v[l]
    return row


def smooth_symmetric_forms(V: DVSpace) -> list[SymForm]:
    """Basis of the smooth symmetric bilinear forms on V."""
    n = V.dim
    idx = _sym_index(n)
    if V.is_coarse:
        return []
    if V.is_standard:
        vecs = linalg.identity(len(idx))
        return [_sym_from_vector(v, n) for v in vecs]
    rows = []
    directions = V.nonsmooth_directions()
    # (constant, generator) pairs: every column of A is a smooth functional
    for c in directions:
        for w in range(n):
            rows.append(_bilinear_row(c, linalg.unit(n, w), idx))
    # (generator, generator) pairs on the joint domain
    per_gen = []
    for g in V.generators:
        keys = sorted({k for comp in g.components for k, _ in comp.items()})
        per_gen.append([(any(k[1]), [comp.terms.get(k, Fraction(0)) for comp in g.components]) for k in keys])
    for a, b in itertools.combinations_with_replacement(range(len(per_gen)), 2):
        for abs_p, vp in per_gen[a]:
            for abs_q, vq in per_gen[b]:
                if abs_p or abs_q:
                    rows.append(_bilinear_row(vp, vq, idx))
    basis = linalg.nullspace(rows, len(idx))
    return [_sym_from_vector(v, n) for v in basis]


def form_in_span(form: SymForm, forms: Sequence[SymForm]) -> bool:
    n = form.dim
    idx = _sym_index(n)

    def flat(f: SymForm):
        return [f.matrix[i][j] for (i, j) in idx]

    return linalg.in_span(flat(form), [flat(f) for f in forms])


def pseudo_metric(V: DVSpace) -> SymForm | None:
    """Sum of squares of a dual basis, after exact verification.

    Returns None if the candidate fails any check (smoothness, PSD, or
    rank equal to the dual dimension).
    """
    dual = smooth_dual(V)
    g = SymForm.from_functionals(dual.basis, V.dim)
    forms = smooth_symmetric_forms(V)
    if not form_in_span(g, forms):
        return None
    psd, r = g.psd_rank()
    if not psd or r != dual.dim:
        return None
    return g


# combinations ---------------------------------------------------------------

def _embed_plot(p: PlotMap, total: int, offset: int) -> PlotMap:
    zero = OrthantPoly(p.domain_dim)
    comps = [zero] * total
    for i, c in enumerate(p.components):
        comps[offset + i] = c
    return PlotMap(p.domain_dim, tuple(comps))


def direct_sum(V: DVSpace, W: DVSpace) -> DVSpace:
    n, m = V.dim, W.dim
    if V.is_coarse and W.is_coarse:
        return DVSpace.coarse(n + m)
    if V.is_coarse or W.is_coarse:
        raise UnsupportedOperation("direct sum mixing a coarse and a non-coarse space is not representable")
    gens = [_embed_plot(p, n + m, 0) for p in V.generators]
    gens += [_embed_plot(q, n + m, n) for q in W.generators]
    return DVSpace.from_generators(n + m, gens, V.complete and W.complete)


def _tensor_components(left: Sequence[OrthantPoly], right: Sequence[OrthantPoly]) -> tuple[OrthantPoly, ...]:
    return tuple(a * b for a in left for b in right)


def tensor_generators(V_gens: Sequence[PlotMap], n: int, W_gens: Sequence[PlotMap], m: int) -> list[PlotMap]:
    """Generator family of V (x) W in the basis e_v (x) e_w (index v*m + w)."""
    gens: list[PlotMap] = []
    for p in V_gens:
        d = p.domain_dim
        for w in range(m):
            e_w = [OrthantPoly.const(d, 1 if i == w else 0) for i in range(m)]
            gens.append(PlotMap(d, _tensor_components(p.components, e_w)))
    for q in W_gens:
        d = q.domain_dim
        for v in range(n):
            e_v = [OrthantPoly.const(d, 1 if i == v else 0) for i in range(n)]
            gens.append(PlotMap(d, _tensor_components(e_v, q.components)))
    for p in V_gens:
        for q in W_gens:
            dp, dq = p.domain_dim, q.domain_dim
            pl = p.embed(dp + dq, list(range(dp)))
            ql = q.embed(dp + dq, list(range(dp, dp + dq)))
            gens.append(PlotMap(dp + dq, _tensor_components(pl.components, ql.components)))
    return gens


def tensor(V: DVSpace, W: DVSpace) -> DVSpace:
    if V.is_coarse or W.is_coarse:
        if V.dim == 0 or W.dim == 0:
            return DVSpace.standard(V.dim * W.dim)
        raise UnsupportedOperation("tensor products need generated or standard factors")
    gens = tensor_generators(V.generators, V.dim, W.generators, W.dim)
    return DVSpace.from_generators(V.dim * W.dim, gens, V.complete and W.complete)


def quotient_projection(subspace: Sequence[Sequence], n: int) -> tuple[linalg.Matrix, list[int]]:
    """Projection R^n -> R^(n-r) along span(subspace) onto chosen standard coordinates."""
    basis = linalg.frac_matrix(subspace)
    if any(len(b) != n for b in basis):
        raise InvalidSubspace(f"subspace vectors must have length {n}")
    if linalg.rank(basis) != len(basis):
        raise InvalidSubspace("subspace basis is linearly dependent")
    comp = linalg.complement_coordinates(basis, n)
    # columns: subspace basis then complement units; invert to read coordinates
    cols = [list(b) for b in basis] + [linalg.unit(n, c) for c in comp]
    change = linalg.transpose(cols)  # n x n, columns are the new basis
    inv_rows = []
    for i in range(n):
        sol = linalg.solve(change, linalg.unit(n, i), n)
        inv_rows.append(sol)
    inv = linalg.transpose(inv_rows)  # inverse of change
    r = len(basis)
    projection = [inv[r + k] for k in range(len(comp))]
    return projection, comp


def quotient(V: DVSpace, subspace: Sequence[Sequence]) -> DVSpace:
    projection, comp = quotient_projection(subspace, V.dim)
    k = len(comp)
    if V.is_coarse:
        return DVSpace.coarse(k)
    gens = [p.apply_linear(projection) for p in V.generators]
    return DVSpace.from_generators(k, gens, V.complete)


def combine_spaces(kind: str, *args) -> DVSpace:
    if kind == "direct_sum":
        return direct_sum(*args)
    if kind == "tensor":
        return tensor(*args)
    if kind == "quotient":
        return quotient(*args)
    raise ValueError(f"unknown combination {kind!r}")


# smoothness of maps and membership -----------------------------------------

def _catalog(dq: int, dp: int):
    """Coordinate projections, injections and sign flips R^dq -> R^dp."""
    options = [None] + [(i, s) for i in range(dq) for s in (1, -1)]
    total = len(options) ** dp
    if total > MAX_CATALOG:
        return None
    out = []
    for choice in itertools.product(options, repeat=dp):
        m = linalg.zeros(dp, dq)
        for r, opt in enumerate(choice):
            if opt is not None:
                m[r][opt[0]] = Fraction(opt[1])
        out.append(m)
    return out


def _monomials(d: int, degree: int) -> list[OrthantPoly]:
    out = []
    for deg in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            e = [0] * d
            for i in combo:
                e[i] += 1
            out.append(OrthantPoly(d, {(tuple(e), (0,) * d): Fraction(1)}))
    return out


@dataclass(frozen=True)
class Decomposition:
    """q = smooth_part + sum_j coefficient_j * (generator_j o substitution_j)."""

    terms: tuple[tuple[int, tuple[tuple[Fraction, ...], ...], OrthantPoly], ...]
    smooth_part: PlotMap


def decompose(q: PlotMap, V: DVSpace, max_degree: int = 2) -> Decomposition | None:
    d = q.domain_dim
    target = [c.abs_part() for c in q.components]
    candidates = []  # (gen index, phi, abs parts of p o phi)
    seen = set()
    for gi, p in enumerate(V.generators):
        cat = _catalog(d, p.domain_dim)
        if cat is None:
            continue
        for phi in cat:
            comp = p.compose_affine(phi)
            parts = tuple(c.abs_part() for c in comp.components)
            if all(x.is_zero() for x in parts) or parts in seen:
                continue
            seen.add(parts)
            candidates.append((gi, phi, comp))
    if not candidates:
        return None
    for degree in range(max_degree + 1):
        monos = _monomials(d, degree)
        columns = []  # per unknown: list of abs-part polys per component
        meta = []
        for gi, phi, comp in candidates:
            for mono in monos:
                columns.append([(mono * c).abs_part() for c in comp.components])
                meta.append((gi, phi, comp, mono))
        keys = sorted({(i, k) for col in columns for i, poly in enumerate(col) for k, _ in poly.items()}
                      | {(i, k) for i, poly in enumerate(target) for k, _ in poly.items()})
        row_of = {key: r for r, key in enumerate(keys)}
        a = linalg.zeros(len(keys), len(columns))
        for j, col in enumerate(columns):
            for i, poly in enumerate(col):
                for k, c in poly.items():
                    a[row_of[(i, k)]][j] = c
        b = [Fraction(0)] * len(keys)
        for i, poly in enumerate(target):
            for k, c in poly.items():
                b[row_of[(i, k)]] = c
        sol = linalg.solve(a, b, len(columns))
        if sol is None:
            continue
        coeffs: dict[tuple[int, tuple], tuple[OrthantPoly, PlotMap]] = {}
        for val, (gi, phi, comp, mono) in zip(sol, meta):
            if not val:
                continue
            key = (gi, tuple(tuple(r) for r in phi))
            prev = coeffs.get(key, (OrthantPoly(d), comp))[0]
            coeffs[key] = (prev + mono.scale(val), comp)
        smooth = list(q.components)
        terms = []
        for (gi, phi), (h, comp) in sorted(coeffs.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            terms.append((gi, phi, h))
            smooth = [s - h * c for s, c in zip(smooth, comp.components)]
        F = PlotMap(d, tuple(smooth))
        assert F.is_ordinarily_smooth()
        return Decomposition(tuple(terms), F)
    return None


def is_plot_member(q: PlotMap, V: DVSpace, max_degree: int = 2) -> Verdict:
    """Is ``q`` a plot of V?  Three-valued."""
    if q.codomain_dim != V.dim:
        raise DimensionMismatch(f"plot into R^{q.codomain_dim} tested against a space of dimension {V.dim}")
    if V.is_coarse:
        return Verdict.smooth("every map is a plot of a coarse space")
    if q.is_ordinarily_smooth():
        return Verdict.smooth("ordinarily smooth maps are plots of every vector space diffeology")
    if V.is_standard and V.complete:
        comp = q.first_nonsmooth_component()
        return Verdict.not_smooth({"component": comp}, f"component {comp + 1} is not ordinarily smooth")
    if V.is_generated:
        dec = decompose(q, V, max_degree)
        if dec is not None:
            return Verdict.smooth("decomposes over the generators", dec)
    if V.complete:
        for f in smooth_dual(V).basis:
            if not f.compose(q).is_ordinarily_smooth():
                return Verdict.not_smooth(
                    {"functional": f.coefficients},
                    "a smooth functional of the space sends the map to a non-smooth function")
    return Verdict.unknown("no decomposition over the substitution catalog and no refuting functional")


def is_smooth_linear_map(M: Sequence[Sequence], V: DVSpace, W: DVSpace) -> Verdict:
    """Is the linear map with matrix M (dim W x dim V) smooth from V to W?"""
    M = linalg.frac_matrix(M)
    if len(M) != W.dim or any(len(row) != V.dim for row in M):
        raise DimensionMismatch(f"matrix must be {W.dim}x{V.dim}")
    if W.is_coarse and W.complete:
        return Verdict.smooth("target is coarse")
    if V.is_coarse:
        if linalg.is_zero_matrix(M):
            return Verdict.smooth("zero map")
        if V.complete:
            return Verdict.not_smooth({"source": "coarse"},
                                      "a coarse source has non-continuous plots that a nonzero map keeps")
        return Verdict.unknown("source diffeology only partially known")
    if V.is_standard:
        if V.complete:
            return Verdict.smooth("source is standard")
        return Verdict.unknown("source diffeology only partially known")
    verdicts = []
    for gi, p in enumerate(V.generators):
        image = p.apply_linear(M)
        if image.is_ordinarily_smooth():
            continue
        if W.is_standard and W.complete:
            comp = image.first_nonsmooth_component()
            return Verdict.not_smooth({"generator": gi, "component": comp},
                                      f"image of generator {gi + 1} has a non-smooth component {comp + 1}")
        v = is_plot_member(image, W)
        if v.is_not_smooth:
            return Verdict.not_smooth({"generator": gi, **(v.witness or {})}, v.reason)
        verdicts.append(v)
    if not V.complete:
        return Verdict.unknown("source diffeology only partially known")
    if any(v.is_unknown for v in verdicts):
        return next(v for v in verdicts if v.is_unknown)
    return Verdict.smooth("every generator is sent to a plot of the target")
