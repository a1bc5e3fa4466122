"""Benchmark orchestration: every instance solved in every mode.

Rows go to CSV as soon as they exist, so partial results survive an
interrupted run.  Each row records the solve and the transformation cost
that produced the model it solved.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .blackhole import adjacency_selections
from .model import Csp, check_solution
from .search import solve_first
from .transform import RegularizeConfig, apply_mode

CSV_HEADER = [
    "instance",
    "mode",
    "elapsed_ms",
    "timed_out",
    "fails",
    "nodes",
    "solution_found",
    "transform_ms",
]


@dataclass
class BenchRow:
    instance: str
    mode: str
    elapsed_ms: float
    timed_out: bool
    fails: int
    nodes: int
    solution_found: bool
    transform_ms: float

    def as_csv(self) -> list[str]:
        return [
            self.instance,
            self.mode,
            f"{self.elapsed_ms:.3f}",
            "true" if self.timed_out else "false",
            str(self.fails),
            str(self.nodes),
            "true" if self.solution_found else "false",
            f"{self.transform_ms:.3f}",
        ]


def append_rows(path: str | Path, rows: Sequence[BenchRow]) -> None:
    """Append rows to a CSV file, writing the header on first use."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as handle:
        writer = csv.writer(handle)
        if fresh:
            writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())
            handle.flush()


def bench_cell(
    name: str,
    csp: Csp,
    mode: str,
    time_limit_ms: float,
    selections: Optional[tuple[tuple[int, ...], ...]],
) -> BenchRow:
    """Transform one model for one mode and solve it once."""
    cfg = RegularizeConfig(mode=mode, selections=selections)
    rewritten, report = apply_mode(csp, cfg)
    solution, stats = solve_first(rewritten, time_limit_ms)
    if solution is not None and not check_solution(csp, solution):
        raise RuntimeError(
            f"{name}/{mode}: solution violates the untransformed model"
        )
    return BenchRow(
        instance=name,
        mode=mode,
        elapsed_ms=stats.elapsed_ms,
        timed_out=stats.timed_out,
        fails=stats.fails,
        nodes=stats.nodes,
        solution_found=solution is not None,
        transform_ms=report.total_ms,
    )


def run_benchmark(
    named_models: Sequence[tuple[str, Csp]],
    modes: Sequence[str],
    time_limit_ms: float,
    out_path: Optional[str | Path],
    selections_for: Callable[[Csp], tuple[tuple[int, ...], ...]] = adjacency_selections,
) -> list[BenchRow]:
    """Solve every (instance, mode) cell, streaming rows to ``out_path``.

    ``selections_for`` picks the constraint subsets the transformed modes
    replace; the default targets every rank-adjacency constraint.
    """
    handle = None
    writer = None
    if out_path is not None:
        path = Path(out_path)
        fresh = not path.exists() or path.stat().st_size == 0
        handle = path.open("a", newline="")
        writer = csv.writer(handle)
        if fresh:
            writer.writerow(CSV_HEADER)
            handle.flush()
    rows: list[BenchRow] = []
    try:
        for name, csp in named_models:
            selections = selections_for(csp)
            for mode in modes:
                row = bench_cell(name, csp, mode, time_limit_ms, selections)
                rows.append(row)
                if writer is not None:
                    writer.writerow(row.as_csv())
                    handle.flush()
    finally:
        if handle is not None:
            handle.close()
    print_summary(rows)
    return rows


def print_summary(rows: Sequence[BenchRow]) -> None:
    """Per-mode aggregates: mean time, wins, solved count, and mean
    improvement over the original-model time."""
    if not rows:
        return
    modes = list(dict.fromkeys(row.mode for row in rows))
    instances = list(dict.fromkeys(row.instance for row in rows))
    cells = {(row.instance, row.mode): row for row in rows}
    fastest: dict[str, int] = {mode: 0 for mode in modes}
    for name in instances:
        present = [cells[(name, m)] for m in modes if (name, m) in cells]
        best = min(row.elapsed_ms for row in present)
        for row in present:
            if row.elapsed_ms == best:
                fastest[row.mode] += 1
    print(f"{'mode':<22}{'avg_ms':>12}{'solved':>8}{'fastest':>9}{'improvement':>13}")
    for mode in modes:
        mode_rows = [row for row in rows if row.mode == mode]
        avg = sum(row.elapsed_ms for row in mode_rows) / len(mode_rows)
        solved = sum(row.solution_found for row in mode_rows)
        improvements = []
        for row in mode_rows:
            base = cells.get((row.instance, "original"))
            if base is not None and base.elapsed_ms > 0:
                improvements.append(
                    (base.elapsed_ms - row.elapsed_ms) / base.elapsed_ms * 100.0
                )
        gain = f"{sum(improvements) / len(improvements):.1f}%" if improvements else "-"
        print(
            f"{mode:<22}{avg:>12.1f}{solved:>8}{fastest[mode]:>9}{gain:>13}"
        )
