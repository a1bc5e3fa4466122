"""Model rewriting: replace constraint subsets by compiled equivalents.

A selection of constraints induces a sub-problem; its solution set,
found exhaustively, is compiled either into a table constraint or into a
minimized layered DFA behind a regular constraint.  A further variant
intersects the produced automata into fewer, wider regular constraints.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .automaton import Dfa, build_dfa, intersect, lift, minimize
from .errors import BadIndex, BudgetExceeded, EmptySelection, OverlappingSelections
from .model import Csp, Regular, Table, extract_sub_csp, replace_constraints, size_of
from .search import enumerate_all

MODES = ("original", "table", "regular", "regular-intersected")


@dataclass(frozen=True)
class RegularizeConfig:
    mode: str = "regular"
    selections: Optional[tuple[tuple[int, ...], ...]] = None
    auto_threshold: int = 10**6
    solution_cap: int = 10**6
    state_budget: int = 10**5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class SelectionReport:
    selection: tuple[int, ...]
    sub_size: int
    solution_count: int
    states_before: int
    states_after: int
    elapsed_ms: float


@dataclass
class RegularizeReport:
    entries: list[SelectionReport] = field(default_factory=list)
    total_ms: float = 0.0


def _union_size(csp: Csp, variables: Sequence[int]) -> int:
    return math.prod(len(csp.domains[v]) for v in variables)


def select_candidates(csp: Csp, cfg: RegularizeConfig) -> list[tuple[int, ...]]:
    """Explicit selections validated and passed through; otherwise greedy
    grouping of scope-overlapping constraints under the size threshold."""
    if cfg.selections is not None:
        seen: set[int] = set()
        validated = []
        for sel in cfg.selections:
            indices = tuple(sorted(set(sel)))
            if not indices:
                raise EmptySelection("a selection must name at least one constraint")
            for i in indices:
                if not 0 <= i < len(csp.constraints):
                    raise BadIndex(f"constraint index {i} out of range")
                if i in seen:
                    raise OverlappingSelections(
                        f"constraint {i} appears in two selections"
                    )
                seen.add(i)
            validated.append(indices)
        return validated

    groups: list[tuple[int, ...]] = []
    current: list[int] = []
    current_scope: set[int] = set()
    for ci, c in enumerate(csp.constraints):
        scope = set(c.scope)
        if not current:
            if _union_size(csp, scope) <= cfg.auto_threshold:
                current = [ci]
                current_scope = scope
            continue
        if current_scope & scope:
            union = current_scope | scope
            if _union_size(csp, union) <= cfg.auto_threshold:
                current.append(ci)
                current_scope = union
                continue
        groups.append(tuple(current))
        if _union_size(csp, scope) <= cfg.auto_threshold:
            current = [ci]
            current_scope = scope
        else:
            current = []
            current_scope = set()
    if current:
        groups.append(tuple(current))
    return groups


def regularize_selection(
    csp: Csp, selection: Sequence[int], cap: Optional[int]
) -> tuple[Regular, SelectionReport]:
    """Enumerate the selected sub-problem and compile its solutions into
    a minimized regular constraint over the covered variables.

    An unsatisfiable sub-problem yields an empty-language constraint, not
    an error.
    """
    started = time.monotonic()
    sub = extract_sub_csp(csp, selection)
    solutions, _stats = enumerate_all(sub.as_csp(), cap=cap)
    if solutions.tuples:
        raw = build_dfa(solutions, sub.domains)
        compact = minimize(raw)
        states_before = raw.num_states
    else:
        alphabet = set().union(*(set(d) for d in sub.domains))
        compact = Dfa.empty(len(sub.parent_vars), alphabet)
        states_before = compact.num_states
    constraint = Regular(scope=sub.parent_vars, dfa=compact)
    report = SelectionReport(
        selection=tuple(sorted(set(selection))),
        sub_size=size_of(sub.as_csp()),
        solution_count=len(solutions),
        states_before=states_before,
        states_after=compact.num_states,
        elapsed_ms=(time.monotonic() - started) * 1000.0,
    )
    return constraint, report


def tabulate_selection(
    csp: Csp, selection: Sequence[int], cap: Optional[int]
) -> tuple[Table, SelectionReport]:
    """As regularize_selection, but the solution set becomes table rows."""
    started = time.monotonic()
    sub = extract_sub_csp(csp, selection)
    solutions, _stats = enumerate_all(sub.as_csp(), cap=cap)
    constraint = Table(scope=sub.parent_vars, tuples=solutions.tuples)
    report = SelectionReport(
        selection=tuple(sorted(set(selection))),
        sub_size=size_of(sub.as_csp()),
        solution_count=len(solutions),
        states_before=0,
        states_after=0,
        elapsed_ms=(time.monotonic() - started) * 1000.0,
    )
    return constraint, report


def intersect_regulars(
    csp: Csp, regulars: Sequence[Regular], state_budget: Optional[int] = None
) -> Regular:
    """One regular constraint equivalent to the conjunction of several.

    Each automaton is lifted onto the union scope with wildcard layers,
    then intersected left to right, minimizing after each product.
    Raises BudgetExceeded when a product passes the state budget.
    """
    if len(regulars) < 2:
        raise ValueError("need at least two regular constraints to intersect")
    union_scope = tuple(sorted(set().union(*(set(r.scope) for r in regulars))))
    position_of = {v: i for i, v in enumerate(union_scope)}
    full_domains = [csp.domains[v] for v in union_scope]
    lifted = [
        lift(r.dfa, [position_of[v] for v in r.scope], len(union_scope), full_domains)
        for r in regulars
    ]
    product = lifted[0]
    for nxt in lifted[1:]:
        product = minimize(intersect(product, nxt, state_budget))
    return Regular(scope=union_scope, dfa=product)


def _group_by_overlap(constraints: Sequence[Regular]) -> list[list[int]]:
    """Greedy chains of scope-overlapping constraints, in given order;
    returns groups of positions into ``constraints``."""
    groups: list[list[int]] = []
    current: list[int] = []
    current_scope: set[int] = set()
    for k, c in enumerate(constraints):
        scope = set(c.scope)
        if current and current_scope & scope:
            current.append(k)
            current_scope |= scope
        else:
            if current:
                groups.append(current)
            current = [k]
            current_scope = scope
    if current:
        groups.append(current)
    return groups


def apply_mode(csp: Csp, cfg: RegularizeConfig) -> tuple[Csp, RegularizeReport]:
    """Rewrite a model per the configured mode.

    original: identity.  table / regular: every selection becomes one
    table / regular constraint.  regular-intersected: as regular, then
    overlapping produced automata are intersected; a group whose product
    exceeds the state budget stays as separate constraints.
    """
    started = time.monotonic()
    report = RegularizeReport()
    if cfg.mode == "original":
        return csp, report

    selections = select_candidates(csp, cfg)
    current = csp
    # Constraint positions shift as substitutions remove and append, so
    # every position carries a tag identifying what it came from.
    tags: list[tuple[str, int]] = [("orig", i) for i in range(len(csp.constraints))]
    for k, sel in enumerate(selections):
        if cfg.mode == "table":
            replacement, entry = tabulate_selection(csp, sel, cfg.solution_cap)
        else:
            replacement, entry = regularize_selection(csp, sel, cfg.solution_cap)
        report.entries.append(entry)
        position = {tag: pos for pos, tag in enumerate(tags)}
        indices = [position[("orig", i)] for i in sel]
        current = replace_constraints(current, indices, replacement)
        removed = set(indices)
        tags = [t for pos, t in enumerate(tags) if pos not in removed]
        tags.append(("sub", k))

    if cfg.mode == "regular-intersected":
        position = {tag: pos for pos, tag in enumerate(tags)}
        produced = [
            current.constraints[position[("sub", k)]] for k in range(len(selections))
        ]
        for g, group in enumerate(_group_by_overlap(produced)):
            if len(group) < 2:
                continue
            try:
                merged = intersect_regulars(
                    csp, [produced[k] for k in group], cfg.state_budget
                )
            except BudgetExceeded:
                continue
            position = {tag: pos for pos, tag in enumerate(tags)}
            indices = [position[("sub", k)] for k in group]
            current = replace_constraints(current, indices, merged)
            removed = set(indices)
            tags = [t for pos, t in enumerate(tags) if pos not in removed]
            tags.append(("mix", g))

    report.total_ms = (time.monotonic() - started) * 1000.0
    return current, report
