from __future__ import annotations

import io
import json
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import orthant_polys
from diffeolab.dsl import Config, emit, emit_definitions, parse, run
from diffeolab.dsl.cli import golden_report, main, regression_document
from diffeolab.dsl.parser import Document, tokenize
from diffeolab.dsl.runner import Environment
from diffeolab.errors import BreakLocusUnsupported, ParseError

REGRESSION = regression_document()


def report_json(text: str, **config) -> bytes:
    return emit(run(parse(text), Config(**config)), "json")


def entries(text: str) -> list[dict]:
    return json.loads(report_json(text))


def test_dual_report_fields():
    [e] = entries("space V = generated(3; (abs(x1)*0, 0, abs(x1)))\ndual V\n")
    assert list(e) == ["command", "object", "status", "dimension", "basis", "matrix", "strata", "witness",
                       "reason"]
    assert e["command"] == "dual" and e["dimension"] == 2
    assert e["basis"] == [["1", "0", "0"], ["0", "1", "0"]]


def test_find_metric_obstruction_report():
    [e] = entries("bundle C = generated(4, 2; (x1, x2, 0, x2*abs(y1)))\nfind_metric C\n")
    assert e["status"] == "not_exists"
    assert e["reason"] == "coefficients b,c forced to 0; rank 1 < required 2 on stratum x2=0"


def test_dual_profile_report():
    [e] = entries("bundle B = generated(2,1; (x1, abs(x1)*abs(y1)))\ndual_profile B\n")
    assert [s["dimension"] for s in e["strata"]] == [0, 1, 0]


def test_rationals_are_strings():
    [e] = entries("space A = generated(2; (x1/2 + abs(x1)/2, abs(x1)/2 - x1/2))\npseudometric A\n")
    assert e["matrix"] == [["1", "-1"], ["-1", "1"]]
    [e] = entries("space V = generated(2; (abs(x1), 2*abs(x1)))\ndual V\n")
    assert e["basis"] == [["1", "-1/2"]]


def test_empty_document_gives_empty_report():
    assert report_json("") == b"[]\n"
    assert report_json("# only a comment\n\n") == b"[]\n"


def test_unknown_membership_carries_a_reason():
    [e] = entries("space V = generated(1; (abs(x1)))\nmember V (abs(x1)*abs(x2))\n")
    assert e["status"] == "unknown"
    assert e["reason"]


def test_expectations_are_checked():
    report = run(parse("space V = standard(2)\ndual V expect ok dim 1\n"))
    [e] = report.mismatches
    assert e.expected is False


def test_abs_of_a_sum_is_rejected_at_its_position():
    text = "space V = generated(2; (abs(x1+x2), 0))"
    with pytest.raises(BreakLocusUnsupported) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (1, text.index("abs") + 1)


def test_parse_error_lists_what_was_expected():
    with pytest.raises(ParseError) as info:
        parse("space V = standard 2)\n")
    assert (info.value.line, info.value.column) == (1, 20)
    assert info.value.expected == ("(",)


def test_undefined_names_are_reported_as_errors():
    [e] = entries("dual nowhere\n")
    assert e["status"] == "error" and "nowhere" in e["reason"]


def test_duplicate_names_are_parse_errors():
    with pytest.raises(ParseError):
        run(parse("space V = standard(1)\nspace V = standard(2)\n"))


def test_regression_document_matches_the_golden_report():
    data = report_json(REGRESSION)
    assert data == golden_report()
    assert all(e["status"] != "error" or "error" in e["reason"] or e["reason"] for e in json.loads(data))
    assert not run(parse(REGRESSION)).mismatches


def test_text_report_is_readable():
    text = emit(run(parse("space V = generated(2; (0, abs(x1)))\ndual V expect ok dim 1\n")), "text").decode()
    assert text.splitlines() == ["dual V: ok, dimension 1", "  basis: [1, 0]", "  expect ok dim 1: ok"]


# round trip -------------------------------------------------------------------

def _build(doc: Document) -> Environment:
    env = Environment()
    for stmt in doc.declarations:
        env.declare(stmt)
    return env


def _same_objects(a: Environment, b: Environment) -> bool:
    return (a.spaces, a.bundles, a.gluings, a.sections) == (b.spaces, b.bundles, b.gluings, b.sections)


def test_definitions_round_trip_on_the_regression_document():
    doc = Document(tuple(s for s in parse(REGRESSION).declarations if s.expect is None))
    text = emit_definitions(doc)
    again = parse(text)
    assert _same_objects(_build(doc), _build(again))
    assert emit_definitions(again) == text


@st.composite
def definition_documents(draw):
    n = draw(st.integers(1, 3))
    comps = [draw(orthant_polys(dim=1, max_terms=2, max_var_degree=2)).to_expr() for _ in range(n)]
    k = draw(st.integers(1, 2))
    fibre = [draw(orthant_polys(dim=k + 1, max_terms=2, max_var_degree=2)) for _ in range(2)]
    # rename the last variable to the fibre parameter
    fexprs = [f.to_expr().replace(f"x{k + 1}", "y1") for f in fibre]
    base = ", ".join(f"x{i + 1}" for i in range(k))
    entry = draw(orthant_polys(dim=k, max_terms=2, max_var_degree=2)).to_expr()
    return "\n".join([
        f"space V = generated({n}; ({', '.join(comps)}))",
        "space S = standard(2)",
        f"bundle B = generated({k + 2}, {k}; ({base}, {', '.join(fexprs)}))",
        f"section g on B = {{x1=0: [[1, 0], [0, 0]], else: [[{entry}, 0], [0, 1]]}}",
        f"bundle T = standard({k + 1}, {k})",
    ]) + "\n"


@settings(max_examples=100)
@given(definition_documents())
def test_definitions_round_trip(text):
    doc = parse(text)
    again = parse(emit_definitions(doc))
    assert _same_objects(_build(doc), _build(again))


# determinism ------------------------------------------------------------------

@settings(max_examples=100)
@given(definition_documents(), st.sampled_from(["dual V", "forms V", "pseudometric V", "dual_profile B",
                                                "smooth_section g", "check_metric g", "find_metric B",
                                                "fibre B at [0, 1]", "member V (x1, 0, abs(x1))"]))
def test_reports_are_byte_identical_across_runs(text, command):
    doc = text + command + "\n"
    assert report_json(doc, degree=2) == report_json(doc, degree=2)


# error positions ----------------------------------------------------------------

STATEMENT_LINES = [l for l in REGRESSION.splitlines() if l.strip() and not l.startswith("#")]
SENTINELS = ["qq", "7", ";", "(", "]", "=", "-", "@", "abs(x1*x2)", "abs(1)"]


@settings(max_examples=300)
@given(st.sampled_from(STATEMENT_LINES), st.data(), st.sampled_from(SENTINELS))
def test_error_positions_fall_inside_the_offending_token(line, data, sentinel):
    toks = [t for t in tokenize(line) if t.kind not in ("newline", "eof")]
    t = data.draw(st.sampled_from(toks))
    start = t.column - 1
    text = line[:start] + sentinel + line[start + len(t.text):]
    try:
        parse(text)
    except ParseError as e:
        assert e.line == 1
        if sentinel == "@":
            assert text[e.column - 1] == "@"
        spans = [(u.column, u.column + max(len(u.text), 1)) for u in tokenize_lenient(text)]
        assert any(lo <= e.column < hi for lo, hi in spans)
        if "found" in str(e) and "end of line" not in str(e):
            found = str(e).split("found ", 1)[1].split(" at line")[0].strip("'")
            assert text[e.column - 1:].startswith(found)
    except BreakLocusUnsupported as e:
        assert text[e.column - 1:].startswith("abs(")


def tokenize_lenient(text: str):
    """Tokens of ``text``, with an unknown character standing as its own token."""
    try:
        return tokenize(text)
    except ParseError as e:
        class Bad:
            column = e.column
            text = "?"
        return [Bad()]


# command line -----------------------------------------------------------------

def _cli(argv, stdin: str = "") -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    out.buffer = io.BytesIO()  # type: ignore[attr-defined]
    old = sys.stdin, sys.stdout, sys.stderr
    sys.stdin, sys.stdout, sys.stderr = io.StringIO(stdin), out, err
    try:
        code = main(argv)
    finally:
        sys.stdin, sys.stdout, sys.stderr = old
    return code, out.buffer.getvalue().decode() + out.getvalue(), err.getvalue()


def test_regression_command_succeeds():
    code, out, err = _cli(["check-paper", "--format", "json"])
    assert code == 0
    assert out.encode() == golden_report()
    assert "entries match the golden report" in err


def test_run_exit_codes(tmp_path):
    good = tmp_path / "good.dl"
    good.write_text("space V = standard(2)\ndual V expect ok dim 2\n", encoding="utf-8")
    assert _cli(["run", str(good)])[0] == 0
    bad = tmp_path / "bad.dl"
    bad.write_text("space V = standard(2)\ndual V expect ok dim 1\n", encoding="utf-8")
    assert _cli(["run", str(bad)])[0] == 1
    broken = tmp_path / "broken.dl"
    broken.write_text("space V = generated(2; (abs(x1+x2), 0))\n", encoding="utf-8")
    code, _, err = _cli(["run", str(broken)])
    assert code == 2
    assert err.startswith(f"{broken}:1:25: BreakLocusUnsupported")
    assert _cli(["run", str(tmp_path / "missing.dl")])[0] == 2


def test_run_reads_stdin_and_writes_files(tmp_path):
    out = tmp_path / "report.json"
    code, stdout, _ = _cli(["run", "-", "--format", "json", "--out", str(out)], stdin="")
    assert code == 0 and stdout == ""
    assert out.read_bytes() == b"[]\n"


def test_degree_configuration(monkeypatch, tmp_path):
    doc = tmp_path / "d.dl"
    doc.write_text("space V = standard(1)\n", encoding="utf-8")
    monkeypatch.setenv("DIFFEOLAB_DEGREE", "two")
    assert _cli(["run", str(doc)])[0] == 2
    monkeypatch.setenv("DIFFEOLAB_DEGREE", "3")
    assert Config.from_env().degree == 3
    assert Config.from_env(5).degree == 5
    assert _cli(["run", str(doc), "--degree", "-1"])[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == 2
