"""Command-line entry point: ``contractcheck check <file.spa>``.

Exit codes: 0 clean, 1 defects found, 2 usage/parse/validation error,
3 a solver ran out of budget or could not be started.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analyze import Analysis, BuiltinBackend, ExternalBackend, exit_code, plan_queries, render_report, run_analysis
from .blocks import BlockSyntaxError, parse_blocks, validate_blocks
from .model import build_model
from .solve.bounded import DEFAULT_LIMIT
from .solve.smtlib import emit_smtlib

EXIT_USAGE = 2


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contractcheck",
        description="Consistency analysis for share purchase agreements written as .spa blocks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="analyze a .spa contract")
    check.add_argument("file", type=Path, help="contract in the block language")
    check.add_argument(
        "--analysis",
        choices=[a.value for a in Analysis],
        default=Analysis.ALL.value,
        help="which analysis to run (default: all)",
    )
    check.add_argument("--format", choices=["text", "json"], default="text")
    check.add_argument("--backend", choices=["builtin", "external"], default="builtin")
    check.add_argument(
        "--solver-cmd",
        default="z3 -in",
        help="SMT-LIB2 solver reading a script on stdin (external backend; default: %(default)s)",
    )
    check.add_argument("--emit-smt", type=Path, metavar="DIR", help="write one .smt2 script per solver query")
    check.add_argument("--horizon", type=_non_negative, metavar="DAYS", help="override the contract horizon")
    check.add_argument(
        "--limit",
        type=_positive,
        default=DEFAULT_LIMIT,
        metavar="ASSIGNMENTS",
        help="search budget of the built-in solver (default: %(default)s)",
    )
    return parser


def _fail(message: str) -> int:
    print(f"contractcheck: {message}", file=sys.stderr)
    return EXIT_USAGE


def run_check(args: argparse.Namespace) -> int:
    path: Path = args.file
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(f"cannot read {path}: {exc}")
    try:
        doc = parse_blocks(text)
    except BlockSyntaxError as exc:
        return _fail(f"{path}:{exc.line}: {exc.message}")
    diags = validate_blocks(doc)
    if diags:
        for d in diags:
            line = f":{d.span.line_start}" if d.span else ""
            who = f" block {d.block_id}:" if d.block_id else ""
            print(f"{path}{line}:{who} {d.message}", file=sys.stderr)
        return EXIT_USAGE

    model = build_model(doc)
    if args.horizon is not None:
        try:
            model = model.with_horizon(args.horizon)
        except ValueError as exc:
            return _fail(str(exc))

    if args.emit_smt is not None:
        out: Path = args.emit_smt
        try:
            out.mkdir(parents=True, exist_ok=True)
            for q in plan_queries(model, args.analysis):
                name = f"{q.analysis.value}.{q.claim or 'SPA'}.smt2"
                (out / name).write_text(emit_smtlib(q.assertions), encoding="utf-8")
        except OSError as exc:
            return _fail(f"cannot write SMT-LIB scripts to {out}: {exc}")

    backend = ExternalBackend(args.solver_cmd) if args.backend == "external" else BuiltinBackend(args.limit)
    report = run_analysis(model, args.analysis, backend=backend, contract=path.name)
    sys.stdout.write(render_report(report, args.format))
    return exit_code(report)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return run_check(args)
    return EXIT_USAGE  # pragma: no cover - argparse enforces the subcommand


if __name__ == "__main__":
    sys.exit(main())
