"""Command-line front end.

Subcommands: solve a model file, rewrite a model file (regularize), and
run the solitaire benchmark.  Exit codes: 0 solved or completed, 1
unsatisfiable, 2 timeout, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import BenchRow, append_rows, run_benchmark
from .blackhole import build_black_hole_csp, generate_black_hole
from .errors import CspError
from .model import check_solution
from .modelio import load_model, save_model
from .search import solve_first
from .transform import MODES, RegularizeConfig, apply_mode

EXIT_SOLVED = 0
EXIT_UNSAT = 1
EXIT_TIMEOUT = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_selections(text: str) -> Optional[tuple[tuple[int, ...], ...]]:
    """'auto' or semicolon-separated comma groups, e.g. '0,1;4;7,8'."""
    if text == "auto":
        return None
    groups = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            raise ValueError("empty selection group")
        groups.append(tuple(int(tok) for tok in part.split(",")))
    if not groups:
        raise ValueError("no selections given")
    return tuple(groups)


def _cmd_solve(args: argparse.Namespace) -> int:
    csp = load_model(args.model)
    transform_ms = 0.0
    model = csp
    if args.mode != "original":
        cfg = RegularizeConfig(mode=args.mode)
        model, report = apply_mode(csp, cfg)
        transform_ms = report.total_ms
    solution, stats = solve_first(model, args.time_limit_ms)
    if solution is not None and not check_solution(csp, solution):
        raise RuntimeError("solution violates the untransformed model")
    if args.stats:
        append_rows(
            args.stats,
            [
                BenchRow(
                    instance=Path(args.model).name,
                    mode=args.mode,
                    elapsed_ms=stats.elapsed_ms,
                    timed_out=stats.timed_out,
                    fails=stats.fails,
                    nodes=stats.nodes,
                    solution_found=solution is not None,
                    transform_ms=transform_ms,
                )
            ],
        )
    if solution is not None:
        print("SOLVED")
        print(json.dumps({v.name: solution[v.id] for v in csp.variables}))
        return EXIT_SOLVED
    if stats.timed_out:
        print("TIMEOUT")
        return EXIT_TIMEOUT
    print("UNSAT")
    return EXIT_UNSAT


def _cmd_regularize(args: argparse.Namespace) -> int:
    csp = load_model(args.model)
    try:
        selections = _parse_selections(args.select)
    except ValueError as exc:
        print(f"error: bad --select value: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = RegularizeConfig(mode=args.mode, selections=selections)
    rewritten, report = apply_mode(csp, cfg)
    save_model(rewritten, args.out)
    for entry in report.entries:
        print(
            f"selection {','.join(map(str, entry.selection))}: "
            f"size {entry.sub_size}, {entry.solution_count} solutions, "
            f"states {entry.states_before} -> {entry.states_after}"
        )
    print(f"total transformation: {report.total_ms:.1f} ms")
    return EXIT_SOLVED


def _cmd_bench_blackhole(args: argparse.Namespace) -> int:
    named = []
    if args.enumerated:
        named.append(("enumerated", generate_black_hole(enumerated=True)))
    for k in range(args.instances):
        seed = args.seed + k
        named.append((f"seed{seed}", generate_black_hole(seed)))
    models = [(name, build_black_hole_csp(inst)) for name, inst in named]
    run_benchmark(models, list(MODES), args.time_limit_ms, args.out)
    return EXIT_SOLVED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regularcsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve a model file")
    solve.add_argument("--model", required=True)
    solve.add_argument("--mode", choices=MODES, default="original")
    solve.add_argument("--time-limit-ms", type=float, default=60000.0)
    solve.add_argument("--stats", help="append one CSV row here")
    solve.set_defaults(func=_cmd_solve)

    reg = sub.add_parser("regularize", help="rewrite a model file")
    reg.add_argument("--model", required=True)
    reg.add_argument(
        "--select",
        default="auto",
        help="constraint index groups 'i,j;k,...' or 'auto'",
    )
    reg.add_argument(
        "--mode",
        choices=[m for m in MODES if m != "original"],
        default="regular",
    )
    reg.add_argument("--out", required=True)
    reg.set_defaults(func=_cmd_regularize)

    bench = sub.add_parser("bench", help="run benchmarks")
    bench_sub = bench.add_subparsers(dest="benchmark", required=True, parser_class=_Parser)
    bh = bench_sub.add_parser("blackhole", help="the 52-card solitaire benchmark")
    bh.add_argument("--instances", type=int, default=0, help="number of seeded deals")
    bh.add_argument("--seed", type=int, default=1, help="first seed")
    bh.add_argument("--enumerated", action="store_true", help="include the fixed deal")
    bh.add_argument("--time-limit-ms", type=float, default=60000.0)
    bh.add_argument("--out", required=True)
    bh.set_defaults(func=_cmd_bench_blackhole)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
