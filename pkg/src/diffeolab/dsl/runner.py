"""Build objects from parsed statements and execute commands."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .. import bundle as bd
from .. import dvs, metric
from ..errors import DiffeoError, ParseError
from ..pwpoly import OrthantPoly
from .parser import Document, Expect, Statement, bundle_plot, space_plot, to_poly

FIELDS = ("command", "object", "status", "dimension", "basis", "matrix", "strata", "witness", "reason")


@dataclass
class Config:
    degree: int = metric.DEFAULT_DEGREE
    seed: int = 0

    @classmethod
    def from_env(cls, degree: int | None = None) -> "Config":
        if degree is None:
            raw = os.environ.get("DIFFEOLAB_DEGREE")
            if raw is not None:
                try:
                    degree = int(raw)
                except ValueError:
                    raise ValueError(f"DIFFEOLAB_DEGREE must be an integer, got {raw!r}") from None
        if degree is not None and degree < 0:
            raise ValueError("the degree bound must be non-negative")
        return cls(degree if degree is not None else metric.DEFAULT_DEGREE)


@dataclass
class Entry:
    command: str
    object: str
    status: str
    dimension: int | None = None
    basis: Any = None
    matrix: Any = None
    strata: Any = None
    witness: Any = None
    reason: str | None = None
    # outcome of the expect clause: None when there was none
    expected: bool | None = field(default=None)
    expectation: str | None = field(default=None)

    def fields(self) -> dict:
        return {f: getattr(self, f) for f in FIELDS}


@dataclass
class Report:
    entries: list[Entry]

    @property
    def mismatches(self) -> list[Entry]:
        return [e for e in self.entries if e.expected is False]


# object construction --------------------------------------------------------

class Environment:
    def __init__(self):
        self.spaces: dict[str, dvs.DVSpace] = {}
        self.bundles: dict[str, bd.PseudoBundle] = {}
        self.gluings: dict[str, tuple[str, str, bd.GluingSpec, bd.GluedBundle]] = {}
        self.sections: dict[str, tuple[Any, str]] = {}

    def _taken(self, name: str, stmt: Statement):
        if name in self.spaces or name in self.bundles or name in self.gluings or name in self.sections:
            raise ParseError(f"name {name!r} is already defined", stmt.line, 1)

    def space(self, name: str) -> dvs.DVSpace:
        if name not in self.spaces:
            raise KeyError(f"no space named {name!r}")
        return self.spaces[name]

    def bundle(self, name: str) -> bd.PseudoBundle:
        if name in self.bundles:
            return self.bundles[name]
        if name in self.gluings:
            return self.gluings[name][3]
        raise KeyError(f"no bundle named {name!r}")

    def gluing(self, name: str):
        if name not in self.gluings:
            raise KeyError(f"no gluing named {name!r}")
        return self.gluings[name]

    def section(self, name: str):
        if name not in self.sections:
            raise KeyError(f"no section named {name!r}")
        return self.sections[name]

    def declare(self, stmt: Statement) -> None:
        self._taken(stmt.name, stmt)
        getattr(self, f"declare_{stmt.keyword}")(stmt)

    def declare_space(self, stmt: Statement) -> None:
        f, a = stmt.form, stmt.args
        if f == "standard":
            v = dvs.DVSpace.standard(a[0])
        elif f == "coarse":
            v = dvs.DVSpace.coarse(a[0])
        elif f == "generated":
            v = dvs.DVSpace.generated(a[0], [space_plot(p) for p in a[1]])
        elif f in ("direct_sum", "tensor"):
            v = dvs.combine_spaces(f, self.space(a[0]), self.space(a[1]))
        else:
            v = dvs.quotient(self.space(a[0]), [list(x) for x in a[1]])
        self.spaces[stmt.name] = v

    def declare_bundle(self, stmt: Statement) -> None:
        f, a = stmt.form, stmt.args
        if f == "generated":
            n, k, plots = a
            b = bd.make_generated_bundle(n, k, [bundle_plot(p, k) for p in plots])
        elif f == "standard":
            b = bd.trivial_bundle(a[0], a[1])
        elif f == "pullback_coarse":
            b = bd.PullbackCoarse(a[0], a[1])
        elif f in ("direct_sum", "tensor"):
            b = bd.combine_bundles(f, self.bundle(a[0]), self.bundle(a[1]))
        else:
            b = bd.combine_bundles(f, self.bundle(a[0]), [list(x) for x in a[1]])
        self.bundles[stmt.name] = b

    def declare_glue(self, stmt: Statement) -> None:
        left, right, spec_raw = stmt.args
        B1, B2 = self.bundle(left), self.bundle(right)
        spec = build_spec(spec_raw, B1, B2)
        self.gluings[stmt.name] = (left, right, spec, bd.glue(B1, B2, spec))

    def declare_section(self, stmt: Statement) -> None:
        if stmt.form == "glue":
            gname, a, b = stmt.args
            left, right, spec, _ = self.gluing(gname)
            g1, g2 = self.section(a)[0], self.section(b)[0]
            sec = metric.glue_metrics(g1, self.bundle(left), g2, self.bundle(right), spec)
            self.sections[stmt.name] = (sec, gname)
            return
        bname = stmt.args[0]
        B = self.bundle(bname)
        k = B.base_dim
        variables = {f"x{i + 1}": i for i in range(k)}

        def mat(rows):
            return [[to_poly(e, variables, k) for e in row] for row in rows]

        if stmt.form == "uniform":
            sec = metric.StratifiedSection.uniform(k, mat(stmt.args[1]))
        else:
            rules = tuple((cond, mat(m)) for cond, m in stmt.args[1])
            default = mat(stmt.args[2])
            sec = metric.StratifiedSection(k, len(default), rules, default)
        self.sections[stmt.name] = (sec, bname)


def build_spec(raw, B1: bd.PseudoBundle, B2: bd.PseudoBundle) -> bd.GluingSpec:
    m1 = B1.fibre_dim
    if raw[0] == "points":
        points, images, lifts = [], [], []
        for y, fy, lift in raw[1]:
            points.append(y)
            images.append(fy)
            lifts.append(_lift_matrix(lift, 0, m1, constant=True))
        return bd.GluingSpec.at_points(points, images, lifts)
    _, coords, matrix, offset, lift = raw
    return bd.GluingSpec.on_subspace(coords, matrix, offset, _lift_matrix(lift, len(coords), m1, constant=False))


def _lift_matrix(lift, r: int, m1: int, constant: bool):
    kind, body = lift
    params = {f"x{i + 1}": i for i in range(r)}
    if kind == "matrix":
        rows = [[to_poly(e, params, r) for e in row] for row in body]
    else:
        variables = dict(params)
        variables.update({f"v{j + 1}": r + j for j in range(m1)})
        comps = [to_poly(e, variables, r + m1) for e in body.components]
        rows = bd.lift_from_components(comps, r, m1)
    if constant:
        return [[e.constant_value() for e in row] for row in rows]
    return rows


# execution ------------------------------------------------------------------

def rat(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def jsonable(value):
    if isinstance(value, Fraction):
        return rat(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, OrthantPoly):
        return value.to_expr()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


def point_label(pt) -> str:
    if isinstance(pt, tuple) and len(pt) == 2 and pt[0] in ("L", "R"):
        return f"{pt[0]}[{', '.join(rat(c) for c in pt[1])}]"
    return f"[{', '.join(rat(c) for c in pt)}]"


def _section_strata(sec, base_dim: int) -> list:
    if isinstance(sec, metric.GluedSection):
        return [{"side": "L", "strata": _section_strata(sec.left, sec.left.base_dim)},
                {"side": "R", "strata": _section_strata(sec.right, sec.right.base_dim)}]
    names = [f"x{i + 1}" for i in range(base_dim)]
    out = []
    for cond, mat in sec.rules:
        label = " & ".join(f"x{i + 1}{'=' if s == 0 else '<' if s < 0 else '>'}0" for i, s in cond)
        out.append({"stratum": label, "matrix": [[e.to_expr(names) for e in row] for row in mat]})
    out.append({"stratum": "else" if sec.rules else "all",
                "matrix": [[e.to_expr(names) for e in row] for row in sec.default]})
    return out


def _verdict_entry(cmd: str, obj: str, v) -> Entry:
    return Entry(cmd, obj, v.status.value, witness=jsonable(v.witness), reason=v.reason or None)


class Runner:
    def __init__(self, config: Config | None = None):
        self.config = config or Config()
        self.env = Environment()

    def run(self, doc: Document) -> Report:
        entries = []
        for stmt in doc.statements:
            entry = self.execute(stmt)
            if entry is not None:
                entries.append(entry)
        return Report(entries)

    def execute(self, stmt: Statement) -> Entry | None:
        is_decl = stmt.keyword in ("space", "bundle", "glue", "section")
        obj = stmt.name if is_decl else self._object_name(stmt)
        try:
            if is_decl:
                self.env.declare(stmt)
                entry = None
                if stmt.expect is not None:
                    entry = Entry(stmt.keyword, obj, "ok")
            else:
                entry = getattr(self, f"cmd_{stmt.keyword}")(stmt)
                entry.object = obj
        except ParseError:
            raise
        except (DiffeoError, KeyError, ValueError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            witness = getattr(exc, "point", None) or getattr(exc, "witness", None)
            entry = Entry(stmt.keyword, obj, "error", witness=jsonable(witness),
                          reason=f"{type(exc).__name__}: {msg}")
        if entry is not None and stmt.expect is not None:
            entry.expected, entry.expectation = check_expect(entry, stmt.expect)
        return entry

    @staticmethod
    def _object_name(stmt: Statement) -> str:
        names = [a for a in stmt.args if isinstance(a, str)]
        return ",".join(names)

    # commands
    def cmd_dual(self, stmt):
        d = dvs.smooth_dual(self.env.space(stmt.args[0]))
        return Entry("dual", "", "ok", d.dim, jsonable(d.vectors()))

    def cmd_forms(self, stmt):
        forms = dvs.smooth_symmetric_forms(self.env.space(stmt.args[0]))
        return Entry("forms", "", "ok", len(forms), matrix=jsonable([f.rows() for f in forms]))

    def cmd_pseudometric(self, stmt):
        V = self.env.space(stmt.args[0])
        g = dvs.pseudo_metric(V)
        if g is None:
            return Entry("pseudometric", "", "absent", reason="the dual square failed verification")
        return Entry("pseudometric", "", "ok", g.rank(), matrix=jsonable(g.rows()),
                     reason=f"rank {g.rank()}, zero-eigenvalue multiplicity {g.zero_eigen_multiplicity()}")

    def cmd_fibre(self, stmt):
        B = self.env.bundle(stmt.args[0])
        V = B.fibre_space(stmt.args[1])
        d = dvs.smooth_dual(V)
        status = V.kind.value if V.complete else f"{V.kind.value} (partial)"
        names = None
        gens = None
        if V.is_generated:
            gens = [g.to_expr([f"y{i + 1}" for i in range(g.domain_dim)]) for g in V.generators]
            names = "generated by " + ", ".join(gens)
        reason = names
        if not V.complete:
            reason = (reason + "; " if reason else "") + "dual is an upper bound"
        return Entry("fibre", "", status, d.dim, jsonable(d.vectors()),
                     witness=point_label(stmt.args[1]), reason=reason)

    def cmd_dual_profile(self, stmt):
        B = self.env.bundle(stmt.args[0])
        prof = bd.dual_profile(B)
        strata = []
        for s in prof.strata:
            label = s.label() if prof.stratified or s.signs is not None else point_label(s.witness)
            strata.append({"stratum": label, "dimension": s.dim,
                           "basis": jsonable(s.basis) if s.basis is not None else "varies"})
        return Entry("dual_profile", "", "ok", strata=strata)

    def cmd_member(self, stmt):
        V = self.env.space(stmt.args[0])
        v = dvs.is_plot_member(space_plot(stmt.args[1]), V)
        return _verdict_entry("member", "", v)

    def cmd_smoothmap(self, stmt):
        M, a, b = stmt.args
        v = dvs.is_smooth_linear_map([list(r) for r in M], self.env.space(a), self.env.space(b))
        return _verdict_entry("smoothmap", "", v)

    def cmd_smooth_section(self, stmt):
        sec, bname = self.env.section(stmt.args[0])
        return _verdict_entry("smooth_section", "", metric.is_smooth_section(sec, self.env.bundle(bname)))

    def cmd_check_metric(self, stmt):
        sec, bname = self.env.section(stmt.args[0])
        v = metric.is_pseudometric(sec, self.env.bundle(bname))
        witness = point_label(v.point) if v.point is not None else None
        reason = v.reason or None
        if len(v.failures) > 1:
            reason = "; ".join(f"{r} at {point_label(p) if p is not None else '?'}" for p, r in v.failures)
        return Entry("check_metric", "", v.status, witness=witness, reason=reason)

    def cmd_find_metric(self, stmt):
        B = self.env.bundle(stmt.args[0])
        r = metric.find_pseudometric(B, self.config.degree, self.config.seed)
        strata = _section_strata(r.section, B.base_dim) if r.section is not None else None
        witness = [point_label(p) for p in r.deficient] or None
        return Entry("find_metric", "", r.status, strata=strata, witness=witness, reason=r.reason or None)

    def _glue_context(self, a, b, gname):
        left, right, spec, glued = self.env.gluing(gname)
        g1, _ = self.env.section(a)
        g2, _ = self.env.section(b)
        return g1, self.env.bundle(left), g2, self.env.bundle(right), spec, glued

    def cmd_compatible(self, stmt):
        g1, B1, g2, B2, spec, _ = self._glue_context(*stmt.args)
        ok, witness = metric.check_compatible(g1, B1, g2, B2, spec)
        if ok:
            return Entry("compatible", "", "compatible")
        return Entry("compatible", "", "incompatible", matrix=jsonable(witness["difference"]),
                     witness={"point": point_label(witness["point"]), "vector": witness["vector"]},
                     reason=f"the pulled-back form differs along {witness['vector']}")

    def cmd_glue_metrics(self, stmt):
        g1, B1, g2, B2, spec, glued = self._glue_context(*stmt.args)
        sec = metric.glue_metrics(g1, B1, g2, B2, spec)
        v = metric.is_pseudometric(sec, glued)
        pts = [point_label(p) for p in metric.witness_points(glued)]
        return Entry("glue_metrics", "", v.status, strata=_section_strata(sec, None), witness=pts,
                     reason=v.reason or None)

    def cmd_commute(self, stmt):
        kind = stmt.form
        if kind == "dual":
            left, right, spec, _ = self.env.gluing(stmt.args[0])
            rep = bd.check_gluing_commutes("dual", self.env.bundle(left), self.env.bundle(right), spec)
        else:
            l1, r1, s1, _ = self.env.gluing(stmt.args[0])
            l2, r2, s2, _ = self.env.gluing(stmt.args[1])
            rep = bd.check_gluing_commutes(kind, self.env.bundle(l1), self.env.bundle(r1), s1,
                                           self.env.bundle(l2), self.env.bundle(r2), s2)
        strata = [{"stratum": point_label(p), "dimension": list(d)} for p, d in zip(rep.witnesses, rep.dims)]
        matrix = jsonable(rep.dual_lifts) if kind == "dual" else None
        return Entry("commute", "", "commutes", matrix=matrix, strata=strata,
                     witness=[point_label(p) for p in rep.witnesses], reason=kind)

    def cmd_subbundle_gluing(self, stmt):
        gname, z1, z2 = stmt.args
        left, right, spec, _ = self.env.gluing(gname)
        ok, witness = bd.check_subbundle_gluing(self.env.bundle(left), self.env.bundle(right), spec,
                                                [list(v) for v in z1], [list(v) for v in z2])
        return Entry("subbundle_gluing", "", "true" if ok else "false", witness=witness,
                     reason=None if ok else f"the lift sends {witness} outside the target sub-bundle")


def check_expect(entry: Entry, ex: Expect) -> tuple[bool, str]:
    parts = []
    ok = True
    if ex.error is not None:
        parts.append(f"error {ex.error}")
        ok = entry.status == "error" and (entry.reason or "").startswith(ex.error + ":")
        return ok, " ".join(parts)
    if ex.status is not None:
        parts.append(ex.status)
        ok &= entry.status == ex.status
    if ex.dim is not None:
        parts.append(f"dim {ex.dim}")
        ok &= entry.dimension == ex.dim
    if ex.dims is not None:
        parts.append(f"dims {list(ex.dims)}")
        got = [s["dimension"] for s in entry.strata] if entry.strata else None
        ok &= got == list(ex.dims)
    return bool(ok), " ".join(parts)


def run(doc: Document, config: Config | None = None) -> Report:
    return Runner(config).run(doc)
