"""Report serialization and definition rendering."""

from __future__ import annotations

import json

from .. import bundle as bd
from .. import dvs
from .parser import Document, Statement
from .runner import Environment, Report, rat


def emit(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return emit_json(report)
    if fmt == "text":
        return emit_text(report)
    raise ValueError(f"unknown format {fmt!r}")


def emit_json(report: Report) -> bytes:
    """One entry per line; an empty report is ``[]``."""
    if not report.entries:
        return b"[]\n"
    rows = [json.dumps(e.fields(), ensure_ascii=False, separators=(",", ":")) for e in report.entries]
    return ("[\n" + ",\n".join(rows) + "\n]\n").encode("utf-8")


def _vec(v) -> str:
    return "[" + ", ".join(str(c) for c in v) + "]"


def _plain(value) -> str:
    """Nested lists and dicts without JSON quoting."""
    if isinstance(value, list):
        return "[" + ", ".join(_plain(v) for v in value) + "]"
    if isinstance(value, dict):
        return ", ".join(f"{k} {_plain(v)}" for k, v in value.items())
    return str(value)


def emit_text(report: Report) -> bytes:
    lines = []
    for e in report.entries:
        head = f"{e.command} {e.object}: {e.status}"
        if e.dimension is not None:
            head += f", dimension {e.dimension}"
        lines.append(head)
        if e.basis:
            lines.append("  basis: " + ", ".join(_vec(b) for b in e.basis))
        if e.matrix is not None and e.command != "forms":
            lines.append(f"  matrix: {_plain(e.matrix)}")
        if e.command == "forms" and e.matrix:
            for m in e.matrix:
                lines.append(f"  form: {_plain(m)}")
        if e.strata:
            for s in e.strata:
                lines.append(f"  {_plain(s)}")
        if e.witness is not None:
            lines.append(f"  witness: {_plain(e.witness)}")
        if e.reason:
            lines.append(f"  reason: {e.reason}")
        if e.expected is not None:
            lines.append(f"  expect {e.expectation}: {'ok' if e.expected else 'MISMATCH'}")
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


# definitions ----------------------------------------------------------------

def _matrix(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(str(c) for c in row) + "]" for row in rows) + "]"


def _expr_matrix(rows, names) -> str:
    return "[" + ", ".join("[" + ", ".join(e.to_expr(names) for e in row) + "]" for row in rows) + "]"


def _space_def(stmt: Statement, V: dvs.DVSpace) -> str:
    if stmt.form in ("direct_sum", "tensor"):
        return f"space {stmt.name} = {stmt.form}({stmt.args[0]}, {stmt.args[1]})"
    if stmt.form == "quotient":
        vecs = ", ".join(_vec(rat(c) for c in v) for v in stmt.args[1])
        return f"space {stmt.name} = quotient({stmt.args[0]}; {vecs})"
    if V.is_standard:
        return f"space {stmt.name} = standard({V.dim})"
    if V.is_coarse:
        return f"space {stmt.name} = coarse({V.dim})"
    plots = ", ".join(g.to_expr() for g in V.generators)
    return f"space {stmt.name} = generated({V.dim}; {plots})"


def _bundle_def(stmt: Statement, B: bd.PseudoBundle) -> str:
    if stmt.form in ("direct_sum", "tensor"):
        return f"bundle {stmt.name} = {stmt.form}({stmt.args[0]}, {stmt.args[1]})"
    if stmt.form in ("quotient", "sub"):
        vecs = ", ".join(_vec(rat(c) for c in v) for v in stmt.args[1])
        return f"bundle {stmt.name} = {stmt.form}({stmt.args[0]}; {vecs})"
    if isinstance(B, bd.PullbackCoarse):
        return f"bundle {stmt.name} = pullback_coarse({B.total_dim}, {B.base_dim})"
    if not B.generators:
        return f"bundle {stmt.name} = standard({B.total_dim}, {B.base_dim})"
    k = B.base_dim
    plots = []
    for g in B.generators:
        names = [f"x{i + 1}" for i in range(k)] + [f"y{j + 1}" for j in range(g.domain_dim - k)]
        plots.append(g.to_expr(names))
    return f"bundle {stmt.name} = generated({B.total_dim}, {B.base_dim}; {', '.join(plots)})"


def _glue_def(stmt: Statement, spec: bd.GluingSpec) -> str:
    left, right, _ = stmt.args
    if spec.is_finite:
        if not spec.points:
            body = "none"
        else:
            body = ", ".join(f"{_vec(rat(c) for c in y)} -> {_vec(rat(c) for c in fy)} by "
                             f"{_matrix([[rat(c) for c in r] for r in F])}"
                             for y, fy, F in zip(spec.points, spec.images, spec.lifts))
    else:
        names = [f"x{i + 1}" for i in range(len(spec.coords))]
        coords = ", ".join(f"x{i + 1}" for i in spec.coords)
        body = (f"on {coords} -> {_matrix([[rat(c) for c in r] for r in spec.f_matrix])} + "
                f"{_vec(rat(c) for c in spec.f_offset)} by {_expr_matrix(spec.lift_poly, names)}")
    return f"glue {stmt.name} = ({left}, {right}; {body})"


def _section_def(stmt: Statement, sec) -> str:
    if stmt.form == "glue":
        gname, a, b = stmt.args
        return f"section {stmt.name} on {gname} = glue({a}, {b})"
    bname = stmt.args[0]
    names = [f"x{i + 1}" for i in range(sec.base_dim)]
    if not sec.rules:
        return f"section {stmt.name} on {bname} = {_expr_matrix(sec.default, names)}"
    parts = []
    for cond, mat in sec.rules:
        c = " & ".join(f"x{i + 1}{'=' if s == 0 else '<' if s < 0 else '>'}0" for i, s in cond)
        parts.append(f"{c}: {_expr_matrix(mat, names)}")
    parts.append(f"else: {_expr_matrix(sec.default, names)}")
    return f"section {stmt.name} on {bname} = {{{', '.join(parts)}}}"


def emit_definitions(doc: Document, env: Environment | None = None) -> str:
    """Render every declaration of ``doc`` in canonical form."""
    if env is None:
        env = Environment()
        for stmt in doc.declarations:
            env.declare(stmt)
    lines = []
    for stmt in doc.declarations:
        if stmt.keyword == "space":
            lines.append(_space_def(stmt, env.space(stmt.name)))
        elif stmt.keyword == "bundle":
            lines.append(_bundle_def(stmt, env.bundle(stmt.name)))
        elif stmt.keyword == "glue":
            lines.append(_glue_def(stmt, env.gluing(stmt.name)[2]))
        else:
            lines.append(_section_def(stmt, env.section(stmt.name)[0]))
    return "\n".join(lines) + ("\n" if lines else "")
