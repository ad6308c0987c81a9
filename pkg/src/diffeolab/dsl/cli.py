"""Command line entry point: ``diffeolab run`` and ``diffeolab check-paper``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from ..errors import BreakLocusUnsupported, ParseError
from .emit import emit
from .parser import parse
from .runner import Config, run

EXIT_OK, EXIT_MISMATCH, EXIT_ERROR = 0, 1, 2


def regression_document() -> str:
    return resources.files("diffeolab.data").joinpath("worked_examples.dl").read_text(encoding="utf-8")


def golden_report() -> bytes:
    return resources.files("diffeolab.data").joinpath("worked_examples.golden.json").read_bytes()


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffeolab", description="Run diffeolab documents.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a document and print its report")
    r.add_argument("file", help="document path, or - for stdin")
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--degree", type=int, default=None, help="degree bound of the metric ansatz")
    r.add_argument("--out", default=None, help="write the report here instead of stdout")
    c = sub.add_parser("check-paper", help="run the shipped regression document against its golden report")
    c.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _write(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _diagnostic(exc: Exception, source: str) -> str:
    line, col = getattr(exc, "line", None), getattr(exc, "column", None)
    where = f"{source}:{line}:{col}: " if line is not None else f"{source}: "
    return f"{where}{type(exc).__name__}: {exc}"


def cmd_run(args) -> int:
    try:
        config = Config.from_env(args.degree)
        if args.file == "-":
            text, source = sys.stdin.read(), "<stdin>"
        else:
            text, source = Path(args.file).read_text(encoding="utf-8"), args.file
        doc = parse(text)
        report = run(doc, config)
    except (ParseError, BreakLocusUnsupported) as exc:
        print(_diagnostic(exc, args.file), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        print(f"diffeolab: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _write(emit(report, args.format), args.out)
    return EXIT_MISMATCH if report.mismatches else EXIT_OK


def cmd_regression(args) -> int:
    report = run(parse(regression_document()), Config())
    data = emit(report, "json")
    golden = golden_report()
    _write(data if args.format == "json" else emit(report, "text"), None)
    for e in report.mismatches:
        print(f"expectation failed: {e.command} {e.object}: {e.expectation} (got {e.status})", file=sys.stderr)
    if data != golden:
        print("report differs from the golden file", file=sys.stderr)
        return EXIT_MISMATCH
    if report.mismatches:
        return EXIT_MISMATCH
    print(f"{len(report.entries)} entries match the golden report", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_regression(args)


if __name__ == "__main__":
    sys.exit(main())
