"""Backtracking search: propagation to fixpoint, dom/wdeg ordering,
binary branching, first-solution and exhaustive modes.

A node is the root or any branching decision (assignment or refutation);
a fail is any propagation run that empties a domain.  Identical models
and limits give identical node and fail counts.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .automaton import SolutionSet
from .errors import CapExceeded
from .model import Csp, InverseChanneling, NotEqual, check_solution
from .propagation import (
    DomainView,
    PropagationOutcome,
    Status,
    apply_channeling_events,
    propagator_for,
)

# A complete assignment, indexed by variable id.
Solution = tuple[int, ...]


@dataclass
class SearchStats:
    nodes: int = 0
    fails: int = 0
    solutions: int = 0
    elapsed_ms: float = 0.0
    timed_out: bool = False


@dataclass
class WeightTable:
    """Per-constraint failure weights; start at 1, bumped on failure."""

    weights: list[int] = field(default_factory=list)

    @classmethod
    def for_csp(cls, csp: Csp) -> "WeightTable":
        return cls([1] * len(csp.constraints))

    def bump(self, index: int) -> None:
        self.weights[index] += 1

    def __getitem__(self, index: int) -> int:
        return self.weights[index]


def build_watchers(csp: Csp) -> list[list[int]]:
    """Variable id -> indices of constraints scoping it."""
    watchers: list[list[int]] = [[] for _ in csp.variables]
    for ci, c in enumerate(csp.constraints):
        for v in c.scope:
            watchers[v].append(ci)
    return watchers


class PropagatorState:
    """Per-engine helper data for the fixpoint loop.

    Two call-count reductions that leave every observable result (final
    domains, failure, weight bumps) unchanged.  An inequality constraint
    is queued only when the variable that just changed became a
    singleton: it can only remove a singleton peer's value, and that
    removal already happened when the peer crossed to a singleton, so
    re-running it on any other trigger is a no-op.  A channeling
    constraint that already reached its fixpoint re-propagates from the
    trail suffix of removals instead of a full sweep; ``note_backtrack``
    must be called whenever domains are restored, which falls back to
    full sweeps.
    """

    def __init__(self, csp: Csp):
        self.props = [propagator_for(c) for c in csp.constraints]
        self.singleton_only = [isinstance(c, NotEqual) for c in csp.constraints]
        self.incremental = [
            isinstance(c, InverseChanneling) for c in csp.constraints
        ]
        self.incremental_indices = [
            ci for ci, flag in enumerate(self.incremental) if flag
        ]
        self.last_run: list[Optional[int]] = [None] * len(csp.constraints)
        self.failed_constraint: Optional[int] = None

    def note_backtrack(self) -> None:
        for ci in self.incremental_indices:
            self.last_run[ci] = None


def propagate_to_fixpoint(
    csp: Csp,
    view: DomainView,
    weights: WeightTable,
    changed_vars: Optional[Iterable[int]] = None,
    watchers: Optional[list[list[int]]] = None,
    state: Optional[PropagatorState] = None,
) -> PropagationOutcome:
    """Run propagators until quiescence or a domain wipeout.

    ``changed_vars`` seeds the queue with just the constraints watching
    those variables; None seeds every constraint.  On Failure the failing
    constraint's weight is bumped.
    """
    if watchers is None:
        watchers = build_watchers(csp)
    if state is None:
        state = PropagatorState(csp)
    state.failed_constraint = None
    constraints = csp.constraints
    domains = view.domains
    trail = view.trail
    singleton_only = state.singleton_only
    incremental = state.incremental
    props = state.props
    in_queue = [False] * len(constraints)
    queue: deque[int] = deque()

    if changed_vars is None:
        for ci, c in enumerate(constraints):
            if singleton_only[ci] and not any(
                len(domains[v]) == 1 for v in c.scope
            ):
                continue
            in_queue[ci] = True
            queue.append(ci)
    else:
        for var in changed_vars:
            crossed = len(domains[var]) == 1
            for ci in watchers[var]:
                if not in_queue[ci] and (crossed or not singleton_only[ci]):
                    in_queue[ci] = True
                    queue.append(ci)

    total_removed = 0
    while queue:
        ci = queue.popleft()
        in_queue[ci] = False
        before = len(trail)
        if incremental[ci]:
            last = state.last_run[ci]
            if last is not None and last <= before:
                outcome = apply_channeling_events(
                    constraints[ci], view, trail[last:before]
                )
            else:
                outcome = props[ci](constraints[ci], view)
            state.last_run[ci] = len(trail)
        else:
            outcome = props[ci](constraints[ci], view)
        total_removed += outcome.removed
        if outcome.status is Status.FAILURE:
            weights.bump(ci)
            state.failed_constraint = ci
            return PropagationOutcome(Status.FAILURE, total_removed)
        if outcome.removed:
            touched = {var for var, _val in trail[before:]}
            for var in touched:
                crossed = len(domains[var]) == 1
                for watcher in watchers[var]:
                    if (
                        watcher != ci
                        and not in_queue[watcher]
                        and (crossed or not singleton_only[watcher])
                    ):
                        in_queue[watcher] = True
                        queue.append(watcher)
    return PropagationOutcome(Status.FIXPOINT, total_removed)


def select_variable_dom_over_wdeg(
    view: DomainView,
    weights: WeightTable,
    csp: Csp,
    watchers: Optional[list[list[int]]] = None,
) -> Optional[int]:
    """Unassigned variable minimizing |dom| / weighted degree.

    Only constraints with at least two uninstantiated variables count
    toward the degree; an empty degree counts as 1.  Ties go to the
    smallest variable id.  Returns None when everything is assigned.
    """
    if watchers is None:
        watchers = build_watchers(csp)
    active = [
        sum(1 for v in c.scope if view.size(v) >= 2) >= 2 for c in csp.constraints
    ]
    best_var = None
    best_size = 0
    best_degree = 1
    for var in range(len(csp.variables)):
        size = view.size(var)
        if size < 2:
            continue
        degree = sum(weights[ci] for ci in watchers[var] if active[ci])
        if degree == 0:
            degree = 1
        # size/degree < best_size/best_degree, compared exactly.
        if best_var is None or size * best_degree < best_size * degree:
            best_var = var
            best_size = size
            best_degree = degree
    return best_var


class _Engine:
    """Shared depth-first core for first-solution and exhaustive search.

    Keeps the dom/wdeg quotient incrementally instead of rescanning all
    constraints per node: ``uninst[ci]`` counts scope variables with at
    least two values, and ``degree[v]`` sums the weights of watching
    constraints whose count is still two or more.  Both are adjusted
    when variables cross to singletons during a branch, and the
    adjustment is replayed in reverse on backtracking.  ``paranoid``
    checks every pick against the reference selector.
    """

    def __init__(self, csp: Csp, limit_ms: float, paranoid: bool = False):
        self.csp = csp
        self.view = DomainView(csp.domains)
        self.weights = WeightTable.for_csp(csp)
        self.watchers = build_watchers(csp)
        self.pstate = PropagatorState(csp)
        self.stats = SearchStats()
        self.first: Optional[Solution] = None
        self.paranoid = paranoid
        self.scopes = [c.scope for c in csp.constraints]
        self.uninst = [0] * len(csp.constraints)
        self.degree = [0] * len(csp.variables)
        self.deadline = time.monotonic() + limit_ms / 1000.0
        self.started = time.monotonic()

    def finish(self) -> SearchStats:
        self.stats.elapsed_ms = (time.monotonic() - self.started) * 1000.0
        return self.stats

    def out_of_time(self) -> bool:
        if time.monotonic() > self.deadline:
            self.stats.timed_out = True
            return True
        return False

    def _init_selector(self) -> None:
        domains = self.view.domains
        weights = self.weights.weights
        degree = self.degree
        for v in range(len(degree)):
            degree[v] = 0
        for ci, scope in enumerate(self.scopes):
            count = sum(1 for v in scope if len(domains[v]) >= 2)
            self.uninst[ci] = count
            if count >= 2:
                w = weights[ci]
                for v in scope:
                    degree[v] += w

    def _apply_crossings(self, start: int) -> list[int]:
        """Note vars reduced to singletons since trail position ``start``
        and update the activity counts; returns them for the undo."""
        domains = self.view.domains
        crossed: list[int] = []
        seen: set[int] = set()
        for var, _val in self.view.trail[start:]:
            if var not in seen:
                seen.add(var)
                if len(domains[var]) == 1:
                    crossed.append(var)
        uninst = self.uninst
        degree = self.degree
        weights = self.weights.weights
        for var in crossed:
            for ci in self.watchers[var]:
                uninst[ci] -= 1
                if uninst[ci] == 1:
                    w = weights[ci]
                    for v in self.scopes[ci]:
                        degree[v] -= w
        return crossed

    def _undo_crossings(self, crossed: list[int]) -> None:
        uninst = self.uninst
        degree = self.degree
        weights = self.weights.weights
        for var in reversed(crossed):
            for ci in self.watchers[var]:
                if uninst[ci] == 1:
                    w = weights[ci]
                    for v in self.scopes[ci]:
                        degree[v] += w
                uninst[ci] += 1

    def _select(self) -> Optional[int]:
        domains = self.view.domains
        degree = self.degree
        best_var = None
        best_size = 0
        best_degree = 1
        for var in range(len(domains)):
            size = len(domains[var])
            if size < 2:
                continue
            d = degree[var]
            if d == 0:
                d = 1
            if best_var is None or size * best_degree < best_size * d:
                best_var = var
                best_size = size
                best_degree = d
        if self.paranoid:
            reference = select_variable_dom_over_wdeg(
                self.view, self.weights, self.csp, self.watchers
            )
            assert reference == best_var, (reference, best_var)
        return best_var

    def try_branch(self, var: int, val: int, refute: bool) -> Optional[list[int]]:
        """One branching decision plus propagation; undone on failure.

        Returns the list of vars newly reduced to singletons, or None
        when propagation failed."""
        self.view.mark()
        self.stats.nodes += 1
        start = len(self.view.trail)
        if refute:
            self.view.remove(var, val)
        else:
            self.view.assign(var, val)
        outcome = propagate_to_fixpoint(
            self.csp, self.view, self.weights, (var,), self.watchers, self.pstate
        )
        if outcome.status is Status.FAILURE:
            self.stats.fails += 1
            self.view.backtrack()
            self.pstate.note_backtrack()
            # The failing constraint's weight rose by one; mirror that
            # into the degrees if it is still active here.
            fc = self.pstate.failed_constraint
            if fc is not None and self.uninst[fc] >= 2:
                for v in self.scopes[fc]:
                    self.degree[v] += 1
            return None
        return self._apply_crossings(start)

    def run(self, collect: Optional[list[Solution]], cap: Optional[int]) -> None:
        """Depth-first search; appends to ``collect`` in exhaustive mode,
        stops at the first solution when ``collect`` is None (the found
        solution is stored in ``self.first``)."""
        self.stats.nodes = 1
        root = propagate_to_fixpoint(
            self.csp, self.view, self.weights, None, self.watchers, self.pstate
        )
        if root.status is Status.FAILURE:
            self.stats.fails = 1
            return
        self._init_selector()
        # Stack of (var, val, already_refuted, crossed) decisions above
        # the current node; the view always reflects the current node.
        stack: list[tuple[int, int, bool, list[int]]] = []
        while True:
            if self.out_of_time():
                return
            var = self._select()
            if var is None:
                values = tuple(self.view.value(i) for i in range(len(self.csp.variables)))
                assert check_solution(self.csp, values)
                self.stats.solutions += 1
                if collect is None:
                    self.first = values
                    return
                collect.append(values)
                if cap is not None and len(collect) > cap:
                    raise CapExceeded(f"more than {cap} solutions")
                if not self._unwind(stack):
                    return
                continue
            val = min(self.view.domains[var])
            crossed = self.try_branch(var, val, refute=False)
            if crossed is not None:
                stack.append((var, val, False, crossed))
                continue
            crossed = self.try_branch(var, val, refute=True)
            if crossed is not None:
                stack.append((var, val, True, crossed))
                continue
            if not self._unwind(stack):
                return

    def _unwind(self, stack: list[tuple[int, int, bool, list[int]]]) -> bool:
        """Backtrack to the deepest ancestor with an untried refutation;
        False when the tree is exhausted."""
        while stack:
            if self.out_of_time():
                return False
            var, val, refuted, crossed = stack.pop()
            self.view.backtrack()
            self.pstate.note_backtrack()
            self._undo_crossings(crossed)
            if not refuted:
                redo = self.try_branch(var, val, refute=True)
                if redo is not None:
                    stack.append((var, val, True, redo))
                    return True
        return False


def solve_first(csp: Csp, limit_ms: float) -> tuple[Optional[Solution], SearchStats]:
    """First solution by depth-first search, or None with stats telling
    whether the search timed out or proved unsatisfiability."""
    engine = _Engine(csp, limit_ms)
    engine.run(collect=None, cap=None)
    return engine.first, engine.finish()


def enumerate_all(
    csp: Csp, cap: Optional[int] = None, limit_ms: float = 3_600_000.0
) -> tuple[SolutionSet, SearchStats]:
    """Every solution, in deterministic depth-first order.

    Raises CapExceeded when more than ``cap`` solutions exist.
    """
    engine = _Engine(csp, limit_ms)
    solutions: list[Solution] = []
    engine.run(collect=solutions, cap=cap)
    stats = engine.finish()
    return SolutionSet(len(csp.variables), tuple(solutions)), stats
