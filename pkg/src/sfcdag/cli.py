"""``sfcdag`` command line: parse, analyse, condense, order, solve, emit.

Data goes to stdout (or ``--out``), diagnostics to stderr.  Exit codes:
0 success, 1 model/solver/check failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .dependency import build_dependency_graph, structural_jacobian
from .emit import (
    DotStyle,
    emit_adjacency_csv,
    emit_dot,
    emit_json,
    emit_simulation_csv,
    format_order,
    format_sccs,
)
from .graph import condense, descendants, ancestors, tarjan_scc
from .model import ModelError, parse_model, validate_model
from .solver import SolverError, SolverOptions, run_checks, simulate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfcdag", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="parse and validate a model")
    p.add_argument("file")

    p = sub.add_parser("graph", help="dependency graph")
    p.add_argument("file")
    p.add_argument("--format", choices=("dot", "json", "csv"), default="dot")
    p.add_argument("--out")

    p = sub.add_parser("sccs", help="strongly connected components")
    p.add_argument("file")

    p = sub.add_parser("dag", help="condensation graph")
    p.add_argument("file")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--expand-sccs", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("order", help="block solve order")
    p.add_argument("file")

    p = sub.add_parser("solve", help="simulate and write a CSV of all periods")
    p.add_argument("file")
    p.add_argument("--periods", type=int, required=True)
    p.add_argument("--tol", type=float, default=SolverOptions.tolerance)
    p.add_argument("--damping", type=float, default=SolverOptions.damping)
    p.add_argument("--max-iterations", type=int, default=SolverOptions.max_iterations)
    p.add_argument("--check-tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = sub.add_parser("trace", help="variables reachable from (or reaching) a variable")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--from", dest="source")
    group.add_argument("--to", dest="target")
    return parser


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _run(args, err) -> tuple[int, str]:
    """Execute a parsed invocation; returns (exit code, stdout text)."""
    text = _read(args.file)
    if args.command == "check":
        model = parse_model(text, strict=False)
        report = validate_model(model)
        if report.errors:
            print(report.format(), file=err)
            return 1, ""
        summary = (
            f"{model.name}: {len(model.endogenous)} endogenous, "
            f"{len(model.exogenous)} exogenous, {len(model.parameters)} parameters, "
            f"{len(model.equations)} equations, {len(model.checks)} checks: ok\n"
        )
        if report.warnings:
            print(report.format(), file=err)
        return 0, summary

    model = parse_model(text)
    graph = build_dependency_graph(model)

    if args.command == "graph":
        if args.format == "dot":
            return 0, emit_dot(graph, name=model.name)
        if args.format == "json":
            return 0, emit_json(graph)
        return 0, emit_adjacency_csv(structural_jacobian(model))

    partition = tarjan_scc(graph)
    if args.command == "sccs":
        return 0, format_sccs(graph, partition)

    dag = condense(graph, partition)
    if args.command == "dag":
        if args.format == "dot":
            return 0, emit_dot(dag, DotStyle(expand_sccs=args.expand_sccs), name=model.name)
        return 0, emit_json(graph, partition, dag)
    if args.command == "order":
        return 0, format_order(dag)

    if args.command == "trace":
        label = args.source or args.target
        try:
            node = graph.index(label)
        except KeyError:
            raise UsageError(f"unknown variable {label}") from None
        reached = descendants(graph, node) if args.source else ancestors(graph, node)
        return 0, "".join(f"{graph.labels[v]}\n" for v in sorted(reached))

    # solve
    try:
        opts = SolverOptions(
            tolerance=args.tol,
            max_iterations=args.max_iterations,
            damping=args.damping,
            periods=args.periods,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = simulate(model, opts)
    outcomes = run_checks(model, result, args.check_tol)
    failed = [o for o in outcomes if not o.passed]
    worst = max((abs(o.residual) for o in outcomes), default=0.0)
    print(
        f"{len(result.values)} periods solved; {len(outcomes)} check evaluations, "
        f"{len(failed)} failed, max |residual| {worst:.3g}",
        file=err,
    )
    for o in failed:
        print(f"check {o.check} failed in period {o.period}: residual {o.residual!r}", file=err)
    csv_text = emit_simulation_csv(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        csv_text = ""
    return (1, "") if failed else (0, csv_text)


def run_cli(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, data = _run(args, err)
        if code == 0 and getattr(args, "out", None) and data:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
            data = ""
    except UsageError as exc:
        print(exc, file=err)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ModelError, SolverError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    if code == 0:
        out.write(data)
    return code


def main() -> None:
    sys.exit(run_cli())
