"""Diffeological vector pseudo-bundles over standard R^k.

The total space is R^n with the projection onto the first k coordinates.
Generated bundles carry base-identity generators p(x, y) = (x, g(x, y)),
so the fibre over x0 is generated by y -> g(x0, y).  Glued bundles live
on a tagged union of two bases: points are ``("L", x)`` or ``("R", x)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import dvs, linalg, unipoly
from .dvs import DVSpace
from .errors import (BaseMismatch, DimensionMismatch, FNotInjective, HypothesisFailed,
                     IrrationalBreakpoint, LiftNotLinear, LiftNotSmooth, NonCoordinateSubspace,
                     NotBaseIdentity, PointDimMismatch, ProjectionMismatch, UnsupportedBaseDim,
                     UnsupportedOperation, WitnessMismatch)
from .pwpoly import OrthantPoly, PlotMap

Point = tuple[Fraction, ...]


def as_point(values) -> Point:
    return tuple(Fraction(v) for v in values)


def arrangement_witnesses(k: int) -> list[Point]:
    """One point per cell of the coordinate-hyperplane arrangement of R^k."""
    return [as_point(s) for s in itertools.product((-1, 0, 1), repeat=k)]


class PseudoBundle:
    """Common interface: a fibre space over every base point."""

    total_dim: int
    base_dim: int

    @property
    def fibre_dim(self) -> int:
        return self.total_dim - self.base_dim

    def fibre_space(self, x0) -> DVSpace:
        raise NotImplementedError

    def base_points(self) -> list:
        """Witness points covering every stratum of the base."""
        return arrangement_witnesses(self.base_dim)

    def _check_point(self, x0) -> Point:
        x0 = as_point(x0)
        if len(x0) != self.base_dim:
            raise PointDimMismatch(f"base point has {len(x0)} coordinates, base dimension is {self.base_dim}")
        return x0


@dataclass(frozen=True)
class GeneratedBundle(PseudoBundle):
    total_dim: int
    base_dim: int
    generators: tuple[PlotMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        n, k = self.total_dim, self.base_dim
        if not 0 <= k < n:
            raise DimensionMismatch("base dimension must be smaller than total dimension")
        for gi, g in enumerate(self.generators):
            if g.codomain_dim != n:
                raise DimensionMismatch(f"generator {gi + 1} has {g.codomain_dim} components, expected {n}")
            if g.domain_dim < k:
                raise NotBaseIdentity(f"generator {gi + 1} has fewer parameters than base coordinates")
            for i in range(k):
                if g.components[i] != OrthantPoly.var(g.domain_dim, i):
                    raise NotBaseIdentity(
                        f"component {i + 1} of generator {gi + 1} is not the base coordinate x{i + 1}")

    def __eq__(self, other):
        return (isinstance(other, GeneratedBundle) and self.total_dim == other.total_dim
                and self.base_dim == other.base_dim and self.generators == other.generators)

    def __hash__(self):
        return hash((self.total_dim, self.base_dim, self.generators))

    @property
    def fibre_generators(self) -> tuple[PlotMap, ...]:
        k = self.base_dim
        return tuple(PlotMap(g.domain_dim, g.components[k:]) for g in self.generators)

    def fibre_space(self, x0) -> DVSpace:
        x0 = self._check_point(x0)
        values = dict(enumerate(x0))
        gens = [g.substitute_point(values) for g in self.fibre_generators]
        return DVSpace.from_generators(self.fibre_dim, gens)


def make_generated_bundle(n: int, k: int, generators: Sequence[PlotMap]) -> GeneratedBundle:
    return GeneratedBundle(n, k, tuple(generators))


def trivial_bundle(n: int, k: int) -> GeneratedBundle:
    """Standard trivial bundle R^n -> R^k."""
    return GeneratedBundle(n, k, ())


@dataclass(frozen=True)
class PullbackCoarse(PseudoBundle):
    """Every fibre carries the coarse diffeology."""

    total_dim: int
    base_dim: int

    def __post_init__(self):
        if not 0 <= self.base_dim < self.total_dim:
            raise DimensionMismatch("base dimension must be smaller than total dimension")

    def fibre_space(self, x0) -> DVSpace:
        self._check_point(x0)
        return DVSpace.coarse(self.fibre_dim)


# combinations ---------------------------------------------------------------

def _coordinate_indices(B: PseudoBundle, vectors: Sequence[Sequence]) -> list[int]:
    """Fibre-coordinate indices of unit vectors e_j given in total coordinates."""
    out = []
    for v in vectors:
        v = linalg.frac_vector(v)
        if len(v) != B.total_dim:
            raise NonCoordinateSubspace(f"vector of length {len(v)} in a bundle of total dimension {B.total_dim}")
        nz = [i for i, c in enumerate(v) if c]
        if len(nz) != 1 or nz[0] < B.base_dim:
            raise NonCoordinateSubspace("fibre subspaces must be spanned by fibre coordinate vectors")
        out.append(nz[0] - B.base_dim)
    if len(set(out)) != len(out):
        raise NonCoordinateSubspace("repeated coordinate vector")
    return sorted(out)


@dataclass(frozen=True)
class FibrewiseBundle(PseudoBundle):
    """Bundle whose fibres are combinations of the fibres of its parts."""

    op: str
    parts: tuple[PseudoBundle, ...]
    subspace: tuple[tuple[Fraction, ...], ...] = ()

    @property
    def base_dim(self) -> int:
        return self.parts[0].base_dim

    @property
    def total_dim(self) -> int:
        dims = [p.fibre_dim for p in self.parts]
        if self.op == "direct_sum":
            m = sum(dims)
        elif self.op == "tensor":
            m = dims[0] * dims[1]
        else:
            m = dims[0] - len(self.subspace)
        return self.base_dim + m

    def fibre_space(self, x0) -> DVSpace:
        spaces = [p.fibre_space(x0) for p in self.parts]
        if self.op == "quotient":
            return dvs.quotient(spaces[0], self.subspace)
        return dvs.combine_spaces(self.op, *spaces)

    def base_points(self) -> list:
        return self.parts[0].base_points()


@dataclass(frozen=True)
class SubBundle(PseudoBundle):
    """Sub-bundle on a constant coordinate subspace of the fibres.

    The subset diffeology of a fibre is exact in two cases: when no
    non-smooth direction meets the subspace (then every coordinate
    functional extends smoothly and the fibre is standard), and when all
    non-smooth directions lie inside it (then projecting the generators
    gives the subset diffeology).  Otherwise only the generators that
    already take values in the subspace are kept, which gives a
    sub-diffeology and an upper bound for the dual.
    """

    parent: PseudoBundle
    coords: tuple[int, ...]

    @property
    def base_dim(self) -> int:
        return self.parent.base_dim

    @property
    def total_dim(self) -> int:
        return self.base_dim + len(self.coords)

    def fibre_space(self, x0) -> DVSpace:
        V = self.parent.fibre_space(x0)
        return restrict_to_coordinates(V, self.coords)

    def base_points(self) -> list:
        return self.parent.base_points()


def restrict_to_coordinates(V: DVSpace, coords: Sequence[int]) -> DVSpace:
    coords = list(coords)
    r = len(coords)
    if V.is_coarse:
        return DVSpace(r, dvs.Kind.COARSE, (), V.complete)
    if V.is_standard:
        return DVSpace(r, dvs.Kind.STANDARD, (), V.complete)
    directions = V.nonsmooth_directions()
    outside = [i for i in range(V.dim) if i not in coords]
    n_basis = linalg.row_space_basis(directions, V.dim)
    # N meets Z trivially iff rank(N) equals the rank of N projected off Z
    off_rank = linalg.rank([[v[i] for i in outside] for v in n_basis]) if outside else 0
    if off_rank == len(n_basis):
        return DVSpace(r, dvs.Kind.STANDARD, (), V.complete)
    if off_rank == 0:
        gens = [PlotMap(g.domain_dim, tuple(g.components[i] for i in coords)) for g in V.generators]
        return DVSpace.from_generators(r, gens, V.complete)
    kept = [PlotMap(g.domain_dim, tuple(g.components[i] for i in coords)) for g in V.generators
            if all(g.components[i].is_zero() for i in outside)]
    return DVSpace.from_generators(r, kept, complete=False)


def direct_sum_bundles(B1: PseudoBundle, B2: PseudoBundle) -> PseudoBundle:
    _same_base(B1, B2)
    if isinstance(B1, GeneratedBundle) and isinstance(B2, GeneratedBundle):
        k, m1, m2 = B1.base_dim, B1.fibre_dim, B2.fibre_dim
        gens = []
        for g in B1.fibre_generators:
            base = [OrthantPoly.var(g.domain_dim, i) for i in range(k)]
            zeros = [OrthantPoly(g.domain_dim)] * m2
            gens.append(PlotMap(g.domain_dim, tuple(base) + g.components + tuple(zeros)))
        for g in B2.fibre_generators:
            base = [OrthantPoly.var(g.domain_dim, i) for i in range(k)]
            zeros = [OrthantPoly(g.domain_dim)] * m1
            gens.append(PlotMap(g.domain_dim, tuple(base) + tuple(zeros) + g.components))
        return GeneratedBundle(k + m1 + m2, k, tuple(gens))
    return FibrewiseBundle("direct_sum", (B1, B2))


def _shared_base_product(g: PlotMap, h: PlotMap, k: int) -> tuple[PlotMap, PlotMap, int]:
    """Embed g(x, y) and h(x, y') on the joint domain (x, y, y')."""
    dg, dh = g.domain_dim, h.domain_dim
    d = dg + dh - k
    ge = g.embed(d, list(range(dg)))
    he = h.embed(d, list(range(k)) + list(range(dg, d)))
    return ge, he, d


def tensor_bundles(B1: PseudoBundle, B2: PseudoBundle) -> PseudoBundle:
    _same_base(B1, B2)
    if not (isinstance(B1, GeneratedBundle) and isinstance(B2, GeneratedBundle)):
        return FibrewiseBundle("tensor", (B1, B2))
    k, m1, m2 = B1.base_dim, B1.fibre_dim, B2.fibre_dim
    gens = []

    def with_base(d, comps):
        return PlotMap(d, tuple(OrthantPoly.var(d, i) for i in range(k)) + tuple(comps))

    for g in B1.fibre_generators:
        d = g.domain_dim
        for w in range(m2):
            e_w = [OrthantPoly.const(d, int(i == w)) for i in range(m2)]
            gens.append(with_base(d, [a * b for a in g.components for b in e_w]))
    for h in B2.fibre_generators:
        d = h.domain_dim
        for v in range(m1):
            e_v = [OrthantPoly.const(d, int(i == v)) for i in range(m1)]
            gens.append(with_base(d, [a * b for a in e_v for b in h.components]))
    for g in B1.fibre_generators:
        for h in B2.fibre_generators:
            ge, he, d = _shared_base_product(g, h, k)
            gens.append(with_base(d, [a * b for a in ge.components for b in he.components]))
    return GeneratedBundle(k + m1 * m2, k, tuple(gens))


def quotient_bundle(B: PseudoBundle, vectors: Sequence[Sequence]) -> PseudoBundle:
    coords = _coordinate_indices(B, vectors)
    m = B.fibre_dim
    keep = [i for i in range(m) if i not in coords]
    if isinstance(B, GeneratedBundle):
        k = B.base_dim
        gens = [PlotMap(g.domain_dim, g.components[:k] + tuple(g.components[k + i] for i in keep))
                for g in B.generators]
        return GeneratedBundle(k + len(keep), k, tuple(gens))
    sub = tuple(tuple(linalg.unit(m, c)) for c in coords)
    return FibrewiseBundle("quotient", (B,), sub)


def sub_bundle(B: PseudoBundle, vectors: Sequence[Sequence]) -> SubBundle:
    return SubBundle(B, tuple(_coordinate_indices(B, vectors)))


def combine_bundles(kind: str, *args) -> PseudoBundle:
    if kind == "direct_sum":
        return direct_sum_bundles(*args)
    if kind == "tensor":
        return tensor_bundles(*args)
    if kind == "quotient":
        return quotient_bundle(*args)
    if kind == "sub":
        return sub_bundle(*args)
    raise ValueError(f"unknown bundle combination {kind!r}")


def _same_base(B1: PseudoBundle, B2: PseudoBundle):
    if B1.base_dim != B2.base_dim:
        raise BaseMismatch(f"bases of dimension {B1.base_dim} and {B2.base_dim}")
    if isinstance(B1, GluedBundle) != isinstance(B2, GluedBundle):
        raise BaseMismatch("a glued bundle can only be combined with another glued bundle")


# dual profiles --------------------------------------------------------------

@dataclass(frozen=True)
class Stratum:
    """A piece of the base with a constant fibre dual.

    For one-dimensional bases ``lo``/``hi`` bound an open interval (None is
    infinite) or ``lo == hi`` marks a single point; for higher bases
    ``signs`` names the arrangement cell and ``witness`` is its sample point.
    """

    lo: Fraction | None
    hi: Fraction | None
    dim: int
    basis: tuple[tuple[Fraction, ...], ...] | None
    witness: tuple
    signs: tuple[int, ...] | None = None

    @property
    def is_point(self) -> bool:
        return self.signs is None and self.lo is not None and self.lo == self.hi

    def label(self, var: str = "x1") -> str:
        if self.signs is not None:
            parts = [f"x{i + 1}{'<0' if s < 0 else '=0' if s == 0 else '>0'}" for i, s in enumerate(self.signs)]
            return ", ".join(parts)
        if self.is_point:
            return f"{{{_fmt(self.lo)}}}"
        lo = "-inf" if self.lo is None else _fmt(self.lo)
        hi = "+inf" if self.hi is None else _fmt(self.hi)
        return f"({lo},{hi})"


def _fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DualProfile:
    base_dim: int
    strata: tuple[Stratum, ...]
    stratified: bool
    query: Callable = field(compare=False, repr=False, default=None)

    def at(self, x0) -> dvs.DualBasis:
        return self.query(x0)

    def dims(self) -> list[int]:
        return [s.dim for s in self.strata]


def _fibre_dual(B: PseudoBundle, x0) -> dvs.DualBasis:
    return dvs.smooth_dual(B.fibre_space(x0))


def _basis_key(d: dvs.DualBasis) -> tuple:
    return tuple(tuple(f.coefficients) for f in d.basis)


def _parametric_rows(B: GeneratedBundle, side: int) -> list[tuple[unipoly.Poly, ...]]:
    """Coefficient vectors of the fibre |.|-monomials as polynomials in x1 > 0 or x1 < 0."""
    rows: dict[tuple, list[dict[int, Fraction]]] = {}
    m = B.fibre_dim
    for g in B.fibre_generators:
        for ci, comp in enumerate(g.components):
            spec = comp.partial_specialize({0: side})
            for (exps, mask), c in spec.items():
                if not any(mask[1:]):
                    continue
                key = (id(g), exps[1:], mask[1:])
                row = rows.setdefault(key, [dict() for _ in range(m)])
                row[ci][exps[0]] = row[ci].get(exps[0], Fraction(0)) + c
    out = set()
    for row in rows.values():
        vec = tuple(unipoly.trim([entry.get(i, 0) for i in range(max(entry, default=-1) + 1)]) for entry in row)
        if any(vec):
            out.add(vec)
    return sorted(out)


def _breakpoints(B: GeneratedBundle) -> tuple[list[Fraction], int]:
    points = {Fraction(0)}
    max_deg = 0
    for side in (1, -1):
        rows = _parametric_rows(B, side)
        if not rows:
            continue
        max_deg = max(max_deg, max(unipoly.degree(p) for row in rows for p in row if p))
        for size in range(1, min(len(rows), B.fibre_dim) + 1):
            for minor in unipoly.minors(rows, size):
                if len(minor) <= 1:
                    continue
                for r in unipoly.rational_roots(minor):
                    if r * side > 0:
                        points.add(r)
                rest = unipoly.strip_rational_roots(minor)
                lo, hi = (Fraction(0), None) if side > 0 else (None, Fraction(0))
                if unipoly.count_real_roots(rest, lo, hi):
                    raise IrrationalBreakpoint(
                        "the fibre dual changes at an irrational base point (a coefficient minor has no rational root there)")
    return sorted(points), max_deg


def _interval_samples(lo, hi, count: int) -> list[Fraction]:
    if lo is None and hi is None:
        return [Fraction(j) for j in range(count)]
    if lo is None:
        return [hi - 1 - j for j in range(count)]
    if hi is None:
        return [lo + 1 + j for j in range(count)]
    return [lo + (hi - lo) * Fraction(j + 1, count + 1) for j in range(count)]


def dual_profile(B: PseudoBundle) -> DualProfile:
    """Strata of the base on which the fibre dual is constant.

    For generated bundles over R the base variable is treated as a
    parameter of the dual constraints; the fibre dual can only change at
    roots of minors of the parametric constraint matrix.  Each stratum is
    confirmed at sample points (enough of them to certify that the
    reduced basis, a ratio of minors, is constant).  Other bundles are
    reported on the cells of the coordinate arrangement.
    """
    query = lambda x0: _fibre_dual(B, x0)  # noqa: E731
    if isinstance(B, GeneratedBundle) and B.base_dim == 1:
        points, max_deg = _breakpoints(B)
        samples_needed = 2 * B.fibre_dim * max_deg + 2
        raw: list[Stratum] = []
        bounds = [None] + points + [None]
        for i in range(len(bounds) - 1):
            lo, hi = bounds[i], bounds[i + 1]
            samples = _interval_samples(lo, hi, samples_needed)
            duals = [query((s,)) for s in samples]
            keys = {_basis_key(d) for d in duals}
            basis = _basis_key(duals[0]) if len(keys) == 1 else None
            raw.append(Stratum(lo, hi, duals[0].dim, basis, (samples[0],)))
            if hi is not None:
                d = query((hi,))
                raw.append(Stratum(hi, hi, d.dim, _basis_key(d), (hi,)))
        merged: list[Stratum] = []
        for s in raw:
            prev = merged[-1] if merged else None
            if prev is not None and prev.basis is not None and s.basis is not None \
                    and (prev.dim, prev.basis) == (s.dim, s.basis):
                witness = prev.witness if not prev.is_point else s.witness
                merged[-1] = Stratum(prev.lo, s.hi, s.dim, s.basis, witness)
            else:
                merged.append(s)
        return DualProfile(1, tuple(merged), True, query)
    strata = []
    if isinstance(B, GluedBundle):
        for pt in B.base_points():
            d = query(pt)
            strata.append(Stratum(None, None, d.dim, _basis_key(d), pt))
        return DualProfile(B.base_dim, tuple(strata), False, query)
    for pt in arrangement_witnesses(B.base_dim):
        d = query(pt)
        signs = tuple(int(c) for c in pt)
        strata.append(Stratum(None, None, d.dim, _basis_key(d), pt, signs))
    return DualProfile(B.base_dim, tuple(strata), False, query)


def stratified_dual_profile(B: PseudoBundle) -> DualProfile:
    if B.base_dim != 1 or not isinstance(B, GeneratedBundle):
        raise UnsupportedBaseDim("stratified dual profiles need a generated bundle over R")
    return dual_profile(B)


# gluing ---------------------------------------------------------------------

@dataclass(frozen=True)
class GluingSpec:
    """Base map f on Y and its fibrewise linear lift.

    Finite Y: ``points`` with ``images`` (f as a table) and one rational
    matrix per point in ``lifts``.  Subspace Y: ``coords`` lists the base
    coordinates spanning Y, ``f_matrix``/``f_offset`` give f(y) = A y + b in
    those coordinates, and ``lift_poly`` is a matrix of OrthantPoly in them.
    """

    points: tuple[Point, ...] | None = None
    images: tuple[Point, ...] | None = None
    lifts: tuple[tuple[tuple[Fraction, ...], ...], ...] | None = None
    coords: tuple[int, ...] | None = None
    f_matrix: tuple[tuple[Fraction, ...], ...] | None = None
    f_offset: tuple[Fraction, ...] | None = None
    lift_poly: tuple[tuple[OrthantPoly, ...], ...] | None = None

    @classmethod
    def at_points(cls, points, images, lifts) -> "GluingSpec":
        points = tuple(as_point(p) for p in points)
        images = tuple(as_point(p) for p in images)
        lifts = tuple(tuple(tuple(Fraction(c) for c in row) for row in m) for m in lifts)
        if not (len(points) == len(images) == len(lifts)):
            raise DimensionMismatch("one image and one lift matrix per glued point")
        return cls(points=points, images=images, lifts=lifts)

    @classmethod
    def on_subspace(cls, coords, f_matrix, f_offset, lift_poly) -> "GluingSpec":
        return cls(coords=tuple(coords),
                   f_matrix=tuple(tuple(Fraction(c) for c in row) for row in f_matrix),
                   f_offset=as_point(f_offset),
                   lift_poly=tuple(tuple(lift_poly_row) for lift_poly_row in lift_poly))

    @property
    def is_finite(self) -> bool:
        return self.points is not None

    def contains(self, x: Point) -> bool:
        if self.is_finite:
            return x in self.points
        return all(not c for i, c in enumerate(x) if i not in self.coords)

    def image(self, x: Point) -> Point:
        if self.is_finite:
            return self.images[self.points.index(x)]
        y = [x[i] for i in self.coords]
        return as_point(linalg.dot(row, y) + b for row, b in zip(self.f_matrix, self.f_offset))

    def lift_at(self, x: Point) -> linalg.Matrix:
        if self.is_finite:
            return [list(r) for r in self.lifts[self.points.index(x)]]
        values = {j: x[i] for j, i in enumerate(self.coords)}
        return [[e.substitute_point(values).constant_value() for e in row] for row in self.lift_poly]

    def sample_points(self, base_dim: int) -> list[Point]:
        if self.is_finite:
            return list(self.points)
        out = []
        for vals in itertools.product((-1, 0, 1), repeat=len(self.coords)):
            x = [Fraction(0)] * base_dim
            for i, v in zip(self.coords, vals):
                x[i] = Fraction(v)
            out.append(tuple(x))
        return out

    def inverse_points(self) -> "GluingSpec":
        if not self.is_finite:
            raise UnsupportedOperation("reversing a gluing needs a finite Y")
        return GluingSpec.at_points(self.images, self.points, self.lifts)


def lift_from_components(components: Sequence[OrthantPoly], n_params: int, fibre_dim: int) -> tuple:
    """Matrix of a lift written as expressions in (y_1..y_r, v_1..v_m).

    Each component must be a combination of the fibre variables v_j with
    coefficients in the Y-parameters; anything else is not linear.
    """
    rows = []
    for ci, comp in enumerate(components):
        if comp.dim != n_params + fibre_dim:
            raise DimensionMismatch("lift component has the wrong number of variables")
        row = [dict() for _ in range(fibre_dim)]
        for (exps, mask), c in comp.items():
            fib_e, fib_m = exps[n_params:], mask[n_params:]
            if any(fib_m) or sum(fib_e) != 1:
                raise LiftNotLinear(f"component {ci + 1} of the lift is not linear in the fibre variables")
            j = fib_e.index(1)
            row[j][(exps[:n_params], mask[:n_params])] = c
        rows.append(tuple(OrthantPoly(n_params, entry) for entry in row))
    return tuple(rows)


@dataclass(frozen=True)
class GluedBundle(PseudoBundle):
    left: PseudoBundle
    right: PseudoBundle
    spec: GluingSpec

    @property
    def base_dim(self) -> int:
        return self.right.base_dim

    @property
    def total_dim(self) -> int:
        return self.right.total_dim

    def _split(self, point) -> tuple[str, Point]:
        if not (isinstance(point, tuple) and len(point) == 2 and point[0] in ("L", "R")):
            raise PointDimMismatch("points of a glued base are tagged ('L', x) or ('R', x)")
        return point[0], as_point(point[1])

    def canonical(self, point) -> tuple[str, Point]:
        side, x = self._split(point)
        if side == "L" and self.spec.contains(x):
            return "R", self.spec.image(x)
        return side, x

    def fibre_space(self, point) -> DVSpace:
        side, x = self.canonical(point)
        if side == "L":
            return self.left.fibre_space(x)
        return self.right.fibre_space(x)

    def base_points(self) -> list:
        pts = []
        for x in self.left.base_points():
            if not self.spec.contains(x):
                pts.append(("L", x))
        for y in self.spec.sample_points(self.left.base_dim):
            pts.append(("L", y))
        for x in self.right.base_points():
            pts.append(("R", x))
        seen, out = set(), []
        for p in pts:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out


def validate_gluing(B1: PseudoBundle, B2: PseudoBundle, spec: GluingSpec) -> None:
    k1, k2 = B1.base_dim, B2.base_dim
    m1, m2 = B1.fibre_dim, B2.fibre_dim
    if spec.is_finite:
        for p, q in zip(spec.points, spec.images):
            if len(p) != k1 or len(q) != k2:
                raise PointDimMismatch("glued point or image has the wrong number of coordinates")
        if len(set(spec.points)) != len(spec.points):
            raise DimensionMismatch("glued points must be distinct")
        if len(set(spec.images)) != len(spec.images):
            raise FNotInjective("the base map sends two points of Y to the same point")
        for m in spec.lifts:
            if len(m) != m2 or any(len(r) != m1 for r in m):
                raise DimensionMismatch(f"lift matrices must be {m2}x{m1}")
    else:
        if any(not 0 <= i < k1 for i in spec.coords):
            raise DimensionMismatch("Y coordinates outside the base")
        if len(spec.f_matrix) != k2 or any(len(r) != len(spec.coords) for r in spec.f_matrix):
            raise DimensionMismatch(f"base map matrix must be {k2}x{len(spec.coords)}")
        if linalg.rank(spec.f_matrix) != len(spec.coords):
            raise FNotInjective("the affine base map is not injective")
        if len(spec.lift_poly) != m2 or any(len(r) != m1 for r in spec.lift_poly):
            raise DimensionMismatch(f"lift matrix must be {m2}x{m1}")
        for row in spec.lift_poly:
            for e in row:
                if not e.is_ordinarily_smooth():
                    raise LiftNotSmooth("lift coefficients must be ordinarily smooth in the Y-parameters",
                                        witness={"entry": e.to_expr()})
    for y in spec.sample_points(k1):
        F = spec.lift_at(y)
        v = dvs.is_smooth_linear_map(F, B1.fibre_space(y), B2.fibre_space(spec.image(y)))
        if v.is_not_smooth:
            raise LiftNotSmooth(f"the lift over {_fmt_point(y)} is not smooth: {v.reason}",
                                witness={"point": y, **(v.witness or {})})
        if v.is_unknown:
            raise LiftNotSmooth(f"smoothness of the lift over {_fmt_point(y)} could not be decided: {v.reason}",
                                witness={"point": y})


def glue(B1: PseudoBundle, B2: PseudoBundle, spec: GluingSpec) -> GluedBundle:
    validate_gluing(B1, B2, spec)
    return GluedBundle(B1, B2, spec)


def _fmt_point(x) -> str:
    return "(" + ", ".join(_fmt(c) for c in x) + ")"


# operations versus gluing ---------------------------------------------------

@dataclass(frozen=True)
class CommuteReport:
    kind: str
    witnesses: tuple[tuple, ...]
    dims: tuple[tuple[int, int], ...]
    dual_lifts: tuple = ()


def _combined_spec(kind: str, s1: GluingSpec, s2: GluingSpec) -> GluingSpec:
    if not (s1.is_finite and s2.is_finite):
        raise UnsupportedOperation("commutation checks need finite glued sets")
    if s1.points != s2.points or s1.images != s2.images:
        raise BaseMismatch("both gluings must use the same Y and base map")
    join = linalg.block_diag if kind == "product" else linalg.kron
    lifts = [join(a, b) for a, b in zip(s1.lifts, s2.lifts)]
    return GluingSpec.at_points(s1.points, s1.images, lifts)


@dataclass(frozen=True)
class DualBundle(PseudoBundle):
    """Fibrewise diffeological dual; coordinates are the computed dual basis."""

    parent: PseudoBundle

    @property
    def base_dim(self) -> int:
        return self.parent.base_dim

    @property
    def total_dim(self) -> int:
        # fibre dimension varies; report the ambient bound
        return self.parent.total_dim

    def fibre_space(self, x0) -> DVSpace:
        return DVSpace.standard(dvs.smooth_dual(self.parent.fibre_space(x0)).dim)

    def base_points(self) -> list:
        return self.parent.base_points()


def dual_lift(F: Sequence[Sequence[Fraction]], dual1: dvs.DualBasis, dual2: dvs.DualBasis) -> linalg.Matrix:
    """Matrix of w -> w o F from dual2 to dual1 in the computed dual bases."""
    F = linalg.frac_matrix(F)
    basis1 = dual1.vectors()
    cols = []
    for w in dual2.vectors():
        pulled = linalg.matvec(linalg.transpose(F), w) if F else [Fraction(0)] * len(basis1[0] if basis1 else [])
        sol = linalg.solve(linalg.transpose(basis1), pulled, len(basis1)) if basis1 else []
        if sol is None:
            raise HypothesisFailed("the pulled-back functional is not smooth on the source fibre")
        cols.append(sol)
    return linalg.transpose(cols, len(basis1)) if cols else [[] for _ in basis1]


def check_gluing_commutes(kind: str, B1: PseudoBundle, B2: PseudoBundle, spec: GluingSpec,
                          B1p: PseudoBundle | None = None, B2p: PseudoBundle | None = None,
                          spec_p: GluingSpec | None = None) -> CommuteReport:
    """Witness check that gluing commutes with product, tensor or dual."""
    if kind in ("product", "tensor"):
        if B1p is None or B2p is None or spec_p is None:
            raise ValueError(f"the {kind} case needs a second gluing")
        op = "direct_sum" if kind == "product" else "tensor"
        combine = direct_sum_bundles if kind == "product" else tensor_bundles
        first = FibrewiseBundle(op, (glue(B1, B2, spec), glue(B1p, B2p, spec_p)))
        second = glue(combine(B1, B1p), combine(B2, B2p), _combined_spec(kind, spec, spec_p))
        witnesses, dims = [], []
        for pt in second.base_points():
            a, b = first.fibre_space(pt), second.fibre_space(pt)
            da, db = dvs.smooth_dual(a).dim, dvs.smooth_dual(b).dim
            ident = linalg.identity(a.dim)
            if a.dim != b.dim or da != db or not dvs.is_smooth_linear_map(ident, a, b).is_smooth \
                    or not dvs.is_smooth_linear_map(ident, b, a).is_smooth:
                raise WitnessMismatch(f"fibres differ over {pt}", point=pt)
            witnesses.append(pt)
            dims.append((da, db))
        return CommuteReport(kind, tuple(witnesses), tuple(dims))
    if kind != "dual":
        raise ValueError(f"unknown commutation kind {kind!r}")
    if not spec.is_finite:
        raise UnsupportedOperation("the dual case needs a finite glued set")
    validate_gluing(B1, B2, spec)
    lifts = []
    for y, fy, F in zip(spec.points, spec.images, spec.lifts):
        d1 = dvs.smooth_dual(B1.fibre_space(y))
        d2 = dvs.smooth_dual(B2.fibre_space(fy))
        if d1.dim != d2.dim:
            raise HypothesisFailed(
                f"dual fibres over {_fmt_point(y)} and {_fmt_point(fy)} have dimensions {d1.dim} and {d2.dim}",
                point=y)
        G = dual_lift(F, d1, d2)
        if G and linalg.rank(G) != d1.dim:
            raise HypothesisFailed(f"the dual lift over {_fmt_point(y)} is not invertible", point=y)
        lifts.append(G)
    glued = GluedBundle(B1, B2, spec)
    reverse = GluedBundle(DualBundle(B2), DualBundle(B1), GluingSpec.at_points(spec.images, spec.points, lifts))
    witnesses, dims = [], []
    for pt in glued.base_points():
        side, x = glued.canonical(pt)
        # the same point seen from the reversed gluing
        if side == "R" and x in spec.images:
            rpt = ("R", spec.points[spec.images.index(x)])
        else:
            rpt = ("R" if side == "L" else "L", x)
        da = dvs.smooth_dual(glued.fibre_space(pt)).dim
        db = reverse.fibre_space(rpt).dim
        if da != db:
            raise WitnessMismatch(f"dual fibres differ over {pt}", point=pt)
        witnesses.append(pt)
        dims.append((da, db))
    return CommuteReport("dual", tuple(witnesses), tuple(dims), tuple(tuple(map(tuple, G)) for G in lifts))


def check_subbundle_gluing(B1: PseudoBundle, B2: PseudoBundle, spec: GluingSpec,
                           Z1: Sequence[Sequence], Z2: Sequence[Sequence]) -> tuple[bool, str | None]:
    """Does the lift send the fibres of Z1 into the fibres of Z2?

    Returns ``(True, None)`` or ``(False, name)`` with ``name`` the first
    basis vector of Z1 (total-coordinate numbering) that leaves Z2.
    """
    c1 = _coordinate_indices(B1, Z1)
    c2 = set(_coordinate_indices(B2, Z2))
    for y in spec.sample_points(B1.base_dim):
        F = spec.lift_at(y)
        for i in c1:
            image = [row[i] for row in F]
            if any(c for j, c in enumerate(image) if j not in c2):
                return False, f"e{B1.base_dim + i + 1}"
    return True, None


def induced_gluing(B1p: PseudoBundle, B2p: PseudoBundle, F1, F2, spec: GluingSpec,
                   B1: PseudoBundle, B2: PseudoBundle) -> GluingSpec:
    """Lift f~' = F2 o f~ o F1 for bundle maps F1: B1' -> B1 and F2: B2 -> B2'."""
    if B1p.base_dim != B1.base_dim or B2p.base_dim != B2.base_dim:
        raise ProjectionMismatch("bundle maps must cover the identity of the base")
    F1 = linalg.frac_matrix(F1)
    F2 = linalg.frac_matrix(F2)
    if len(F1) != B1.fibre_dim or any(len(r) != B1p.fibre_dim for r in F1):
        raise ProjectionMismatch(f"F1 must be {B1.fibre_dim}x{B1p.fibre_dim}")
    if len(F2) != B2p.fibre_dim or any(len(r) != B2.fibre_dim for r in F2):
        raise ProjectionMismatch(f"F2 must be {B2p.fibre_dim}x{B2.fibre_dim}")
    if not spec.is_finite:
        raise UnsupportedOperation("induced gluings need a finite glued set")
    lifts = []
    for y, fy, F in zip(spec.points, spec.images, spec.lifts):
        v1 = dvs.is_smooth_linear_map(F1, B1p.fibre_space(y), B1.fibre_space(y))
        v2 = dvs.is_smooth_linear_map(F2, B2.fibre_space(fy), B2p.fibre_space(fy))
        for name, v in (("F1", v1), ("F2", v2)):
            if not v.is_smooth:
                raise LiftNotSmooth(f"{name} is not verified smooth over {_fmt_point(y)}: {v.reason}",
                                    witness={"point": y, "map": name})
        lifts.append(linalg.matmul(F2, linalg.matmul([list(r) for r in F], F1)))
    out = GluingSpec.at_points(spec.points, spec.images, lifts)
    validate_gluing(B1p, B2p, out)
    return out
