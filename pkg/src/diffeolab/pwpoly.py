"""Piecewise polynomials with break loci on coordinate hyperplanes.

An :class:`OrthantPoly` of dimension ``d`` is a polynomial over the
rationals in ``x_1..x_d`` and ``a_1..a_d`` where ``a_i`` stands for
``|x_i|``.  The normal form keeps every ``a_i`` at degree <= 1 (using
``a_i**2 == x_i**2``); distinct normal forms are distinct functions, so
equality of normal forms is pointwise equality.

On each open orthant the function is an ordinary polynomial, and it is
C-infinity on all of R^d exactly when no monomial carries an ``a_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch, SubstitutionOutsideClass

# (x exponents, abs mask) -> coefficient
Key = tuple[tuple[int, ...], tuple[int, ...]]


def _mul_keys(k1: Key, k2: Key) -> Key:
    e1, m1 = k1
    e2, m2 = k2
    exps = []
    mask = []
    for a, b, s, t in zip(e1, e2, m1, m2):
        e = a + b
        m = s + t
        if m == 2:
            e += 2
            m = 0
        exps.append(e)
        mask.append(m)
    return tuple(exps), tuple(mask)


class OrthantPoly:
    """Immutable normal-form element of Q[x_i, |x_i|]."""

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Key, Fraction] | None = None):
        self.dim = dim
        clean: dict[Key, Fraction] = {}
        for (exps, mask), c in (terms or {}).items():
            if len(exps) != dim or len(mask) != dim:
                raise DimensionMismatch(f"term of dimension {len(exps)} in OrthantPoly of dimension {dim}")
            c = Fraction(c)
            if not c:
                continue
            key = (tuple(exps), tuple(mask))
            if any(m not in (0, 1) for m in mask):
                # a_i**2 -> x_i**2
                key = _normalize_key(key)
            clean[key] = clean.get(key, Fraction(0)) + c
            if not clean[key]:
                del clean[key]
        self._terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, dim: int, c) -> "OrthantPoly":
        c = Fraction(c)
        if not c:
            return cls(dim)
        return cls(dim, {((0,) * dim, (0,) * dim): c})

    @classmethod
    def zero(cls, dim: int) -> "OrthantPoly":
        return cls(dim)

    @classmethod
    def var(cls, dim: int, i: int) -> "OrthantPoly":
        exps = [0] * dim
        exps[i] = 1
        return cls(dim, {(tuple(exps), (0,) * dim): Fraction(1)})

    @classmethod
    def absvar(cls, dim: int, i: int) -> "OrthantPoly":
        mask = [0] * dim
        mask[i] = 1
        return cls(dim, {((0,) * dim, tuple(mask)): Fraction(1)})

    # basic protocol ---------------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = OrthantPoly.const(self.dim, other)
        if not isinstance(other, OrthantPoly):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) and not any(m) for e, m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get(((0,) * self.dim, (0,) * self.dim), Fraction(0))

    def _coerce(self, other) -> "OrthantPoly":
        if isinstance(other, OrthantPoly):
            if other.dim != self.dim:
                raise DimensionMismatch(f"dimensions {self.dim} and {other.dim} differ")
            return other
        return OrthantPoly.const(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return OrthantPoly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return OrthantPoly(self.dim, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        out: dict[Key, Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = _mul_keys(k1, k2)
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return OrthantPoly(self.dim, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        if isinstance(other, OrthantPoly) and other.is_constant() and other:
            return self.scale(1 / other.constant_value())
        raise TypeError("OrthantPoly can only be divided by a nonzero rational")

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = OrthantPoly.const(self.dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "OrthantPoly":
        c = Fraction(c)
        return OrthantPoly(self.dim, {k: c * v for k, v in self._terms.items()})

    def __repr__(self):
        return f"OrthantPoly({self.dim}, {self.to_expr()!r})"

    # structure ----------------------------------------------------------
    def abs_part(self) -> "OrthantPoly":
        return OrthantPoly(self.dim, {k: c for k, c in self._terms.items() if any(k[1])})

    def smooth_part(self) -> "OrthantPoly":
        return OrthantPoly(self.dim, {k: c for k, c in self._terms.items() if not any(k[1])})

    def is_ordinarily_smooth(self) -> bool:
        return not any(any(mask) for _, mask in self._terms)

    def degree(self) -> int:
        return max((sum(e) + sum(m) for e, m in self._terms), default=0)

    def variables(self) -> set[int]:
        used = set()
        for e, m in self._terms:
            used.update(i for i in range(self.dim) if e[i] or m[i])
        return used

    def abs_variables(self) -> set[int]:
        used = set()
        for _, m in self._terms:
            used.update(i for i in range(self.dim) if m[i])
        return used

    # specialization ------------------------------------------------------
    def orthant_specialize(self, signs: Sequence[int]) -> "OrthantPoly":
        """Polynomial piece on the orthant with the given signs (a_i -> s_i x_i)."""
        if len(signs) != self.dim:
            raise DimensionMismatch("sign vector length differs from dimension")
        return self.partial_specialize(dict(enumerate(signs)))

    def partial_specialize(self, signs: Mapping[int, int]) -> "OrthantPoly":
        """Replace a_i by s_i * x_i only for the indices in ``signs``."""
        out: dict[Key, Fraction] = {}
        for (exps, mask), c in self._terms.items():
            e = list(exps)
            m = list(mask)
            for i, s in signs.items():
                if s not in (1, -1):
                    raise ValueError("signs must be +1 or -1")
                if m[i]:
                    m[i] = 0
                    e[i] += 1
                    c = c * s
            k = (tuple(e), tuple(m))
            out[k] = out.get(k, Fraction(0)) + c
        return OrthantPoly(self.dim, out)

    def pieces(self) -> dict[tuple[int, ...], "OrthantPoly"]:
        return {s: self.orthant_specialize(s) for s in product((1, -1), repeat=self.dim)}

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.dim:
            raise DimensionMismatch("point length differs from dimension")
        pt = [Fraction(v) for v in point]
        absval = [abs(v) for v in pt]
        total = Fraction(0)
        for (exps, mask), c in self._terms.items():
            term = c
            for i in range(self.dim):
                if exps[i]:
                    term *= pt[i] ** exps[i]
                if mask[i]:
                    term *= absval[i]
            total += term
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for (exps, mask), c in self._terms.items():
            term = float(c)
            for i in range(self.dim):
                if exps[i]:
                    term *= point[i] ** exps[i]
                if mask[i]:
                    term *= abs(point[i])
            total += term
        return total

    def substitute_point(self, values: Mapping[int, Fraction]) -> "OrthantPoly":
        """Fix the listed variables at rational values; remaining variables are renumbered."""
        keep = [i for i in range(self.dim) if i not in values]
        vals = {i: Fraction(v) for i, v in values.items()}
        out: dict[Key, Fraction] = {}
        for (exps, mask), c in self._terms.items():
            for i, v in vals.items():
                if exps[i]:
                    c *= v ** exps[i]
                if mask[i]:
                    c *= abs(v)
                if not c:
                    break
            if not c:
                continue
            k = (tuple(exps[i] for i in keep), tuple(mask[i] for i in keep))
            out[k] = out.get(k, Fraction(0)) + c
        return OrthantPoly(len(keep), out)

    def embed(self, new_dim: int, mapping: Sequence[int]) -> "OrthantPoly":
        """Rename variable ``i`` to ``mapping[i]`` inside a ``new_dim``-variable ring."""
        if len(mapping) != self.dim:
            raise DimensionMismatch("mapping length differs from dimension")
        if len(set(mapping)) != len(mapping):
            return self.affine_substitute(
                [[Fraction(1) if j == mapping[i] else Fraction(0) for j in range(new_dim)] for i in range(self.dim)],
                [Fraction(0)] * self.dim,
            )
        out: dict[Key, Fraction] = {}
        for (exps, mask), c in self._terms.items():
            e = [0] * new_dim
            m = [0] * new_dim
            for i, j in enumerate(mapping):
                e[j] = exps[i]
                m[j] = mask[i]
            out[(tuple(e), tuple(m))] = c
        return OrthantPoly(new_dim, out)

    def affine_substitute(self, matrix: Sequence[Sequence], offset: Sequence | None = None) -> "OrthantPoly":
        """Substitute x_i -> sum_j M[i][j] u_j + offset_i.

        |x_i| is rewritten only when the affine form is a constant or a
        single scaled variable c*u_j (then |c| * |u_j|).
        """
        if len(matrix) != self.dim:
            raise DimensionMismatch("substitution needs one row per variable")
        new_dim = len(matrix[0]) if matrix else 0
        offset = [Fraction(0)] * self.dim if offset is None else [Fraction(v) for v in offset]
        images = []
        abs_images = []
        used_abs = self.abs_variables()
        for i, row in enumerate(matrix):
            row = [Fraction(v) for v in row]
            img = OrthantPoly.const(new_dim, offset[i])
            for j, c in enumerate(row):
                if c:
                    img = img + OrthantPoly.var(new_dim, j).scale(c)
            images.append(img)
            if i in used_abs:
                nz = [j for j, c in enumerate(row) if c]
                if not nz:
                    abs_images.append(OrthantPoly.const(new_dim, abs(offset[i])))
                elif len(nz) == 1 and not offset[i]:
                    abs_images.append(OrthantPoly.absvar(new_dim, nz[0]).scale(abs(row[nz[0]])))
                else:
                    raise SubstitutionOutsideClass(
                        f"|x{i + 1}| would become the absolute value of a non-axis affine form")
            else:
                abs_images.append(None)
        result = OrthantPoly(new_dim)
        for (exps, mask), c in self._terms.items():
            term = OrthantPoly.const(new_dim, c)
            for i in range(self.dim):
                if exps[i]:
                    term = term * images[i] ** exps[i]
                if mask[i]:
                    term = term * abs_images[i]
            result = result + term
        return result

    # rendering --------------------------------------------------------------
    def to_expr(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.dim)]
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms, key=_term_order):
            c = self._terms[key]
            factors = []
            exps, mask = key
            for i in range(self.dim):
                if exps[i] == 1:
                    factors.append(names[i])
                elif exps[i] > 1:
                    factors.append(f"{names[i]}^{exps[i]}")
                if mask[i]:
                    factors.append(f"abs({names[i]})")
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if factors:
                body = "*".join(factors)
                if mag != 1:
                    body = (f"{mag.numerator}*{body}" if mag.denominator == 1
                            else f"{mag.numerator}/{mag.denominator}*{body}")
            else:
                body = str(mag)
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _normalize_key(key: Key) -> Key:
    exps, mask = key
    e = list(exps)
    m = list(mask)
    for i, mi in enumerate(m):
        if mi >= 2:
            e[i] += 2 * (mi // 2)
            m[i] = mi % 2
    return tuple(e), tuple(m)


def _term_order(key: Key):
    exps, mask = key
    return (sum(exps) + sum(mask), tuple(-e for e in exps), tuple(-m for m in mask))


def orthant_specialize(f: OrthantPoly, signs: Sequence[int]) -> OrthantPoly:
    return f.orthant_specialize(signs)


def is_ordinarily_smooth(f: OrthantPoly) -> bool:
    return f.is_ordinarily_smooth()


def substitute_point(f: OrthantPoly, variables: Sequence[int], values: Sequence) -> OrthantPoly:
    if len(variables) != len(values):
        raise DimensionMismatch("one value per substituted variable is required")
    return f.substitute_point(dict(zip(variables, values)))


@dataclass(frozen=True)
class PlotMap:
    """A map R^domain_dim -> R^codomain_dim with OrthantPoly components."""

    domain_dim: int
    components: tuple[OrthantPoly, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        for c in comps:
            if c.dim != self.domain_dim:
                raise DimensionMismatch(
                    f"component of dimension {c.dim} in a plot with domain dimension {self.domain_dim}")

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    @classmethod
    def from_components(cls, domain_dim: int, comps: Iterable) -> "PlotMap":
        return cls(domain_dim, tuple(c if isinstance(c, OrthantPoly) else OrthantPoly.const(domain_dim, c)
                                     for c in comps))

    def is_ordinarily_smooth(self) -> bool:
        return all(c.is_ordinarily_smooth() for c in self.components)

    def first_nonsmooth_component(self) -> int | None:
        return next((i for i, c in enumerate(self.components) if not c.is_ordinarily_smooth()), None)

    def apply_linear(self, matrix: Sequence[Sequence[Fraction]]) -> "PlotMap":
        if any(len(row) != self.codomain_dim for row in matrix):
            raise DimensionMismatch("matrix width differs from plot codomain")
        out = []
        for row in matrix:
            acc = OrthantPoly(self.domain_dim)
            for c, comp in zip(row, self.components):
                if c:
                    acc = acc + comp.scale(c)
            out.append(acc)
        return PlotMap(self.domain_dim, tuple(out))

    def functional(self, coefficients: Sequence[Fraction]) -> OrthantPoly:
        return self.apply_linear([list(coefficients)]).components[0]

    def substitute_point(self, values: Mapping[int, Fraction]) -> "PlotMap":
        comps = tuple(c.substitute_point(values) for c in self.components)
        return PlotMap(self.domain_dim - len(values), comps)

    def embed(self, new_dim: int, mapping: Sequence[int]) -> "PlotMap":
        return PlotMap(new_dim, tuple(c.embed(new_dim, mapping) for c in self.components))

    def compose_affine(self, matrix, offset=None) -> "PlotMap":
        new_dim = len(matrix[0]) if matrix else 0
        return PlotMap(new_dim, tuple(c.affine_substitute(matrix, offset) for c in self.components))

    def to_expr(self, names: Sequence[str] | None = None) -> str:
        return "(" + ", ".join(c.to_expr(names) for c in self.components) + ")"
