"""Tokenizer and recursive-descent parser for diffeolab documents.

A document is a sequence of statements, one per line (brackets may span
lines).  ``#`` starts a comment.  Declarations bind names to spaces,
bundles, gluings and sections; commands query them.  Any statement may
end with an ``expect`` clause that the runner checks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import BreakLocusUnsupported, ParseError
from ..pwpoly import OrthantPoly, PlotMap

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<arrow>->)
  | (?P<number>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[()\[\]{},;=:+\-*/^&<>])
""", re.VERBOSE)

COMMANDS = ("dual", "forms", "pseudometric", "fibre", "dual_profile", "member", "smoothmap",
            "smooth_section", "check_metric", "find_metric", "compatible", "glue_metrics",
            "commute", "subbundle_gluing")
DECLARATIONS = ("space", "bundle", "glue", "section")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col, pos, depth = 1, 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("newline", s, line, col))
            line, col = line + 1, 1
        else:
            if kind == "punct":
                if s in "([{":
                    depth += 1
                elif s in ")]}":
                    depth = max(depth - 1, 0)
            if kind not in ("ws", "comment"):
                tokens.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    tokens.append(Token("newline", "", line, col))
    tokens.append(Token("eof", "", line, col))
    return tokens


# expression trees -----------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple
    token: Token | None = field(default=None, compare=False)


def _abs_of_monomial(inner: OrthantPoly, tok: Token) -> OrthantPoly:
    terms = list(inner.items())
    if len(terms) != 1:
        raise BreakLocusUnsupported(
            f"abs() applies to a single scaled monomial; got {inner.to_expr()} at line {tok.line}, column {tok.column}",
            tok.line, tok.column)
    (exps, mask), c = terms[0]
    d = inner.dim
    out = OrthantPoly.const(d, abs(c))
    for i in range(d):
        e = exps[i]
        if e:
            out = out * OrthantPoly.var(d, i) ** (e - e % 2)
            if e % 2:
                out = out * OrthantPoly.absvar(d, i)
        if mask[i]:
            out = out * OrthantPoly.absvar(d, i)
    return out


def to_poly(expr: Expr, variables: dict[str, int], dim: int) -> OrthantPoly:
    op, args = expr.op, expr.args
    if op == "num":
        return OrthantPoly.const(dim, args[0])
    if op == "var":
        name = args[0]
        if name not in variables:
            tok = expr.token
            raise ParseError(f"unknown variable {name!r}", tok.line, tok.column,
                             tuple(sorted(variables)) if variables else ())
        return OrthantPoly.var(dim, variables[name])
    if op == "neg":
        return -to_poly(args[0], variables, dim)
    if op in ("add", "sub", "mul"):
        a, b = to_poly(args[0], variables, dim), to_poly(args[1], variables, dim)
        return a + b if op == "add" else a - b if op == "sub" else a * b
    if op == "div":
        a, b = to_poly(args[0], variables, dim), to_poly(args[1], variables, dim)
        if not b.is_constant() or not b.constant_value():
            tok = expr.token
            raise ParseError("division only by a nonzero rational constant", tok.line, tok.column)
        return a / b.constant_value()
    if op == "pow":
        return to_poly(args[0], variables, dim) ** args[1]
    if op == "abs":
        return _abs_of_monomial(to_poly(args[0], variables, dim), expr.token)
    raise AssertionError(op)


def expr_variables(expr: Expr) -> set[str]:
    if expr.op == "var":
        return {expr.args[0]}
    out = set()
    for a in expr.args:
        if isinstance(a, Expr):
            out |= expr_variables(a)
    return out


def _check_abs(expr: Expr) -> None:
    """Reject abs() of anything but a scaled monomial, whatever the numbering."""
    if expr.op == "abs":
        names = sorted(expr_variables(expr.args[0]))
        local = {n: i for i, n in enumerate(names)}
        _abs_of_monomial(to_poly(expr.args[0], local, len(names)), expr.token)
    for a in expr.args:
        if isinstance(a, Expr):
            _check_abs(a)


def constant_value(expr: Expr) -> Fraction:
    p = to_poly(expr, {}, 0)
    return p.constant_value()


# statements -----------------------------------------------------------------

@dataclass(frozen=True)
class Expect:
    status: str | None = None
    dim: int | None = None
    dims: tuple[int, ...] | None = None
    error: str | None = None


@dataclass(frozen=True)
class Statement:
    keyword: str          # declaration keyword or command name
    name: str | None      # bound name for declarations
    form: str | None      # constructor / sub-kind
    args: tuple
    expect: Expect | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Document:
    statements: tuple[Statement, ...]

    @property
    def declarations(self) -> tuple[Statement, ...]:
        return tuple(s for s in self.statements if s.keyword in DECLARATIONS)

    @property
    def commands(self) -> tuple[Statement, ...]:
        return tuple(s for s in self.statements if s.keyword not in DECLARATIONS)


# plot and point payloads ----------------------------------------------------

@dataclass(frozen=True)
class RawPlot:
    """Components of a plot before variable numbering is fixed."""

    components: tuple[Expr, ...]
    token: Token | None = field(default=None, compare=False)


def space_plot(raw: RawPlot) -> PlotMap:
    names = set().union(*(expr_variables(e) for e in raw.components)) if raw.components else set()
    indices = []
    for n in names:
        if not re.fullmatch(r"x[1-9]\d*", n):
            tok = _find_var(raw, n)
            raise ParseError(f"plot parameters are x1, x2, ...; got {n!r}", tok.line, tok.column, ("x1",))
        indices.append(int(n[1:]))
    d = max(indices, default=1)
    variables = {f"x{i}": i - 1 for i in range(1, d + 1)}
    return PlotMap(d, tuple(to_poly(e, variables, d) for e in raw.components))


def bundle_plot(raw: RawPlot, k: int) -> PlotMap:
    names = set().union(*(expr_variables(e) for e in raw.components)) if raw.components else set()
    ys = []
    for n in names:
        if re.fullmatch(r"x[1-9]\d*", n) and int(n[1:]) <= k:
            continue
        if re.fullmatch(r"y[1-9]\d*", n):
            ys.append(int(n[1:]))
            continue
        tok = _find_var(raw, n)
        raise ParseError(f"bundle plots use base coordinates x1..x{k} and fibre parameters y1, y2, ...; got {n!r}",
                         tok.line, tok.column, tuple(f"x{i}" for i in range(1, k + 1)) + ("y1",))
    r = max(ys, default=0)
    variables = {f"x{i}": i - 1 for i in range(1, k + 1)}
    variables.update({f"y{j}": k + j - 1 for j in range(1, r + 1)})
    return PlotMap(k + r, tuple(to_poly(e, variables, k + r) for e in raw.components))


def _find_var(raw: RawPlot, name: str) -> Token:
    def walk(e: Expr):
        if e.op == "var" and e.args[0] == name:
            return e.token
        for a in e.args:
            if isinstance(a, Expr):
                t = walk(a)
                if t is not None:
                    return t
        return None
    for c in raw.components:
        t = walk(c)
        if t is not None:
            return t
    return raw.token


# parser ---------------------------------------------------------------------

class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("punct", "name", "arrow")

    def error(self, message: str, expected: tuple[str, ...] = ()):
        t = self.tok
        found = "end of line" if t.kind == "newline" else "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{message}, found {found}", t.line, t.column, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}", (text,))
        return self.advance()

    def name(self, what: str = "name") -> str:
        if self.tok.kind != "name":
            self.error(f"expected {what}", (what,))
        return self.advance().text

    def integer(self) -> int:
        if self.tok.kind != "number":
            self.error("expected an integer", ("integer",))
        return int(self.advance().text)

    def skip_newlines(self):
        while self.tok.kind == "newline":
            self.advance()

    # document
    def parse(self) -> Document:
        out = []
        self.skip_newlines()
        while self.tok.kind != "eof":
            out.append(self.statement())
            if self.tok.kind != "newline":
                self.error("expected end of statement", ("newline",))
            self.skip_newlines()
        return Document(tuple(out))

    def statement(self) -> Statement:
        t = self.tok
        if t.kind != "name" or t.text not in DECLARATIONS + COMMANDS:
            self.error("expected a declaration or command", DECLARATIONS + COMMANDS)
        kw = self.advance().text
        handler = getattr(self, f"stmt_{kw}")
        stmt = handler(t.line)
        if self.at("expect"):
            stmt = Statement(stmt.keyword, stmt.name, stmt.form, stmt.args, self.expect_clause(), stmt.line)
        return stmt

    def expect_clause(self) -> Expect:
        self.expect("expect")
        if self.at("error"):
            self.advance()
            return Expect(error=self.name("error class"))
        status = dim = dims = None
        if self.tok.kind == "name" and self.tok.text not in ("dim", "dims"):
            status = self.advance().text
        if self.at("dim"):
            self.advance()
            dim = self.integer()
        if self.at("dims"):
            self.advance()
            dims = tuple(self.int_list())
        if status is None and dim is None and dims is None:
            self.error("expected a status, 'dim', 'dims' or 'error'", ("status", "dim", "dims", "error"))
        return Expect(status, dim, dims)

    # declarations
    def stmt_space(self, line) -> Statement:
        name = self.name()
        self.expect("=")
        forms = ("standard", "coarse", "generated", "direct_sum", "tensor", "quotient")
        if self.tok.text not in forms:
            self.error("expected a space constructor", forms)
        form = self.advance().text
        self.expect("(")
        if form in ("standard", "coarse"):
            args = (self.integer(),)
        elif form == "generated":
            n = self.integer()
            self.expect(";")
            args = (n, tuple(self.plot_list()))
        elif form in ("direct_sum", "tensor"):
            a = self.name()
            self.expect(",")
            args = (a, self.name())
        else:
            a = self.name()
            self.expect(";")
            args = (a, tuple(self.vector_list()))
        self.expect(")")
        return Statement("space", name, form, args, line=line)

    def stmt_bundle(self, line) -> Statement:
        name = self.name()
        self.expect("=")
        forms = ("generated", "standard", "pullback_coarse", "direct_sum", "tensor", "quotient", "sub")
        if self.tok.text not in forms:
            self.error("expected a bundle constructor", forms)
        form = self.advance().text
        self.expect("(")
        if form in ("generated", "standard", "pullback_coarse"):
            n = self.integer()
            self.expect(",")
            k = self.integer()
            plots = ()
            if form == "generated" and self.at(";"):
                self.advance()
                plots = tuple(self.plot_list())
            args = (n, k, plots) if form == "generated" else (n, k)
        elif form in ("direct_sum", "tensor"):
            a = self.name()
            self.expect(",")
            args = (a, self.name())
        else:
            a = self.name()
            self.expect(";")
            args = (a, tuple(self.vector_list()))
        self.expect(")")
        return Statement("bundle", name, form, args, line=line)

    def stmt_glue(self, line) -> Statement:
        name = self.name()
        self.expect("=")
        self.expect("(")
        left = self.name()
        self.expect(",")
        right = self.name()
        self.expect(";")
        if self.at("none"):
            self.advance()
            spec = ("points", ())
        elif self.at("on"):
            self.advance()
            coords = [self.coord_name()]
            while self.at(","):
                self.advance()
                coords.append(self.coord_name())
            self.expect("->")
            matrix = self.matrix()
            self.expect("+")
            offset = self.vector()
            self.expect("by")
            spec = ("subspace", tuple(coords), matrix, offset, self.lift())
        else:
            entries = [self.glue_point()]
            while self.at(","):
                self.advance()
                entries.append(self.glue_point())
            spec = ("points", tuple(entries))
        self.expect(")")
        return Statement("glue", name, None, (left, right, spec), line=line)

    def coord_name(self) -> int:
        t = self.tok
        n = self.name("base coordinate")
        if not re.fullmatch(r"x[1-9]\d*", n):
            raise ParseError("expected a base coordinate x1, x2, ...", t.line, t.column, ("x1",))
        return int(n[1:]) - 1

    def glue_point(self):
        y = self.vector()
        self.expect("->")
        fy = self.vector()
        self.expect("by")
        return (y, fy, self.lift())

    def lift(self):
        """A lift is a matrix or a tuple of expressions linear in v1, v2, ..."""
        if self.at("("):
            return ("exprs", self.raw_plot())
        return ("matrix", self.expr_matrix())

    def stmt_section(self, line) -> Statement:
        name = self.name()
        self.expect("on")
        bundle = self.name()
        self.expect("=")
        if self.at("glue"):
            self.advance()
            self.expect("(")
            a = self.name()
            self.expect(",")
            b = self.name()
            self.expect(")")
            return Statement("section", name, "glue", (bundle, a, b), line=line)
        if self.at("{"):
            self.advance()
            rules = []
            default = None
            while True:
                if self.at("else"):
                    self.advance()
                    self.expect(":")
                    default = self.expr_matrix()
                else:
                    cond = [self.condition()]
                    while self.at("&"):
                        self.advance()
                        cond.append(self.condition())
                    self.expect(":")
                    rules.append((tuple(cond), self.expr_matrix()))
                if self.at(","):
                    self.advance()
                    continue
                break
            self.expect("}")
            if default is None:
                self.error("a stratified section needs an 'else' branch", ("else",))
            return Statement("section", name, "rules", (bundle, tuple(rules), default), line=line)
        return Statement("section", name, "uniform", (bundle, self.expr_matrix()), line=line)

    def condition(self) -> tuple[int, int]:
        i = self.coord_name()
        if self.at("="):
            self.advance()
            sign = 0
        elif self.at("<"):
            self.advance()
            sign = -1
        elif self.at(">"):
            self.advance()
            sign = 1
        else:
            self.error("expected '=', '<' or '>'", ("=", "<", ">"))
        t = self.tok
        if t.kind != "number" or t.text != "0":
            self.error("strata are compared with 0", ("0",))
        self.advance()
        return (i, sign)

    # commands
    def stmt_dual(self, line):
        return Statement("dual", None, None, (self.name(),), line=line)

    def stmt_forms(self, line):
        return Statement("forms", None, None, (self.name(),), line=line)

    def stmt_pseudometric(self, line):
        return Statement("pseudometric", None, None, (self.name(),), line=line)

    def stmt_dual_profile(self, line):
        return Statement("dual_profile", None, None, (self.name(),), line=line)

    def stmt_smooth_section(self, line):
        return Statement("smooth_section", None, None, (self.name(),), line=line)

    def stmt_check_metric(self, line):
        return Statement("check_metric", None, None, (self.name(),), line=line)

    def stmt_find_metric(self, line):
        return Statement("find_metric", None, None, (self.name(),), line=line)

    def stmt_fibre(self, line):
        b = self.name()
        self.expect("at")
        return Statement("fibre", None, None, (b, self.base_point()), line=line)

    def base_point(self):
        if self.tok.kind == "name" and self.tok.text in ("L", "R"):
            side = self.advance().text
            return (side, self.vector())
        return self.vector()

    def stmt_member(self, line):
        v = self.name()
        return Statement("member", None, None, (v, self.raw_plot()), line=line)

    def stmt_smoothmap(self, line):
        m = self.matrix()
        v = self.name()
        return Statement("smoothmap", None, None, (m, v, self.name()), line=line)

    def stmt_compatible(self, line):
        return Statement("compatible", None, None, (self.name(), self.name(), self.name()), line=line)

    def stmt_glue_metrics(self, line):
        return Statement("glue_metrics", None, None, (self.name(), self.name(), self.name()), line=line)

    def stmt_commute(self, line):
        kinds = ("product", "tensor", "dual")
        if self.tok.text not in kinds:
            self.error("expected a commutation kind", kinds)
        kind = self.advance().text
        names = (self.name(),) if kind == "dual" else (self.name(), self.name())
        return Statement("commute", None, kind, names, line=line)

    def stmt_subbundle_gluing(self, line):
        g = self.name()
        z1 = self.vector_block()
        z2 = self.vector_block()
        return Statement("subbundle_gluing", None, None, (g, z1, z2), line=line)

    # literals
    def vector_block(self) -> tuple:
        """``[[..], [..]]`` or ``[]`` for the zero subspace."""
        self.expect("[")
        out = []
        if not self.at("]"):
            out.append(self.vector())
            while self.at(","):
                self.advance()
                out.append(self.vector())
        self.expect("]")
        return tuple(out)

    def int_list(self) -> list[int]:
        self.expect("[")
        out = []
        if not self.at("]"):
            out.append(self.integer())
            while self.at(","):
                self.advance()
                out.append(self.integer())
        self.expect("]")
        return out

    def vector(self) -> tuple[Fraction, ...]:
        self.expect("[")
        out = []
        if not self.at("]"):
            out.append(self.rational())
            while self.at(","):
                self.advance()
                out.append(self.rational())
        self.expect("]")
        return tuple(out)

    def vector_list(self) -> list[tuple[Fraction, ...]]:
        out = [self.vector()]
        while self.at(","):
            self.advance()
            out.append(self.vector())
        return out

    def matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        self.expect("[")
        rows = [self.vector()]
        while self.at(","):
            self.advance()
            rows.append(self.vector())
        self.expect("]")
        return tuple(rows)

    def expr_matrix(self) -> tuple[tuple[Expr, ...], ...]:
        self.expect("[")
        rows = [self.expr_row()]
        while self.at(","):
            self.advance()
            rows.append(self.expr_row())
        self.expect("]")
        return tuple(rows)

    def expr_row(self) -> tuple[Expr, ...]:
        self.expect("[")
        out = [self.expr()]
        while self.at(","):
            self.advance()
            out.append(self.expr())
        self.expect("]")
        return tuple(out)

    def rational(self) -> Fraction:
        t = self.tok
        e = self.expr()
        if expr_variables(e):
            raise ParseError("expected a rational number", t.line, t.column, ("number",))
        return constant_value(e)

    def plot_list(self) -> list[RawPlot]:
        out = [self.raw_plot()]
        while self.at(","):
            self.advance()
            out.append(self.raw_plot())
        return out

    def raw_plot(self) -> RawPlot:
        t = self.expect("(")
        comps = [self.expr()]
        while self.at(","):
            self.advance()
            comps.append(self.expr())
        self.expect(")")
        return RawPlot(tuple(comps), t)

    # expressions
    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            t = self.advance()
            e = Expr("add" if t.text == "+" else "sub", (e, self.term()), t)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.at("*") or self.at("/"):
            t = self.advance()
            e = Expr("mul" if t.text == "*" else "div", (e, self.unary()), t)
        return e

    def unary(self) -> Expr:
        if self.at("-"):
            t = self.advance()
            return Expr("neg", (self.unary(),), t)
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        if self.at("^"):
            t = self.advance()
            return Expr("pow", (e, self.integer()), t)
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Expr("num", (Fraction(int(t.text)),), t)
        if t.kind == "name" and t.text == "abs":
            self.advance()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            e = Expr("abs", (inner,), t)
            _check_abs(e)
            return e
        if t.kind == "name":
            self.advance()
            return Expr("var", (t.text,), t)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected an expression", ("number", "variable", "abs", "("))


def parse(text: str) -> Document:
    return Parser(text).parse()


def parse_expression(text: str, variables: dict[str, int], dim: int) -> OrthantPoly:
    """One expression in the plot grammar, as an OrthantPoly of dimension ``dim``."""
    p = Parser(text)
    e = p.expr()
    if p.tok.kind not in ("newline", "eof"):
        p.error("expected end of expression", ("newline",))
    _check_abs(e)
    return to_poly(e, variables, dim)
