"""Domain filtering for every constraint kind.

Regular and table constraints get full generalized arc consistency; the
binary kinds get arc (or bounds) consistency.  All removals go through a
DomainView, which journals them for bit-exact backtracking.

When a propagator finds a value set with no remaining support it removes
every unsupported value it knows about, so a Failure outcome always
coincides with at least one emptied domain.
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import TYPE_CHECKING, AbstractSet, NamedTuple, Sequence

from .model import (
    BinaryAdjacency,
    Constraint,
    Domain,
    FixedAssignment,
    InverseChanneling,
    LessThan,
    NotEqual,
    Regular,
    Table,
)

if TYPE_CHECKING:
    from .automaton import Dfa


class Status(Enum):
    FIXPOINT = "fixpoint"
    FAILURE = "failure"


class PropagationOutcome(NamedTuple):
    status: Status
    removed: int


class DomainView:
    """Mutable per-variable value sets with a removal trail.

    ``mark()`` records the current trail length; ``backtrack()`` re-adds
    every value removed since the latest mark.  Values only ever leave a
    domain through ``remove``, so restoration is exact.
    """

    def __init__(self, domains: Sequence[Domain]):
        self.domains: list[set[int]] = [set(d) for d in domains]
        self.trail: list[tuple[int, int]] = []
        self.marks: list[int] = []

    def size(self, var: int) -> int:
        return len(self.domains[var])

    def contains(self, var: int, val: int) -> bool:
        return val in self.domains[var]

    def value(self, var: int) -> int:
        (v,) = self.domains[var]
        return v

    def is_singleton(self, var: int) -> bool:
        return len(self.domains[var]) == 1

    def remove(self, var: int, val: int) -> None:
        self.domains[var].remove(val)
        self.trail.append((var, val))

    def assign(self, var: int, val: int) -> int:
        """Reduce a domain to one value; returns the number of removals."""
        removed = 0
        for other in [v for v in self.domains[var] if v != val]:
            self.remove(var, other)
            removed += 1
        return removed

    def mark(self) -> None:
        self.marks.append(len(self.trail))

    def backtrack(self) -> None:
        target = self.marks.pop()
        while len(self.trail) > target:
            var, val = self.trail.pop()
            self.domains[var].add(val)

    def snapshot(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(d) for d in self.domains)


class LayeredGraph:
    """Position-by-position unfolding of a DFA against current domains.

    An edge (state, value, next) at position t is live when its source is
    forward-reachable, its value sits in the position's domain, and its
    target can still reach a final state.  ``supported[t]`` collects the
    values of live edges, which is exactly the GAC-consistent domain.
    """

    def __init__(self, dfa: "Dfa", domains: Sequence[AbstractSet[int]]):
        n = dfa.word_length
        self.forward: list[set[int]] = [set() for _ in range(n + 1)]
        self.backward: list[set[int]] = [set() for _ in range(n + 1)]
        self.live_edges: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        self.supported: list[set[int]] = [set() for _ in range(n)]

        self.forward[0].add(dfa.start)
        fwd_edges: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for t in range(n):
            dom = domains[t]
            reach_next = self.forward[t + 1]
            for state in self.forward[t]:
                for sym, nxt in dfa.layer_maps[t].get(state, {}).items():
                    if sym in dom:
                        fwd_edges[t].append((state, sym, nxt))
                        reach_next.add(nxt)
        self.backward[n] = self.forward[n] & dfa.finals
        for t in range(n - 1, -1, -1):
            alive_next = self.backward[t + 1]
            for state, sym, nxt in fwd_edges[t]:
                if nxt in alive_next:
                    self.backward[t].add(state)
                    self.live_edges[t].append((state, sym, nxt))
                    self.supported[t].add(sym)


def propagate_regular(c: Regular, view: DomainView) -> PropagationOutcome:
    """GAC on DFA membership: keep a value iff an accepted word uses it."""
    graph = LayeredGraph(c.dfa, [view.domains[v] for v in c.scope])
    return _restrict_to(view, c.scope, graph.supported)


def propagate_table(c: Table, view: DomainView) -> PropagationOutcome:
    """GAC by support scan over the currently valid tuples."""
    arity = len(c.scope)
    doms = [view.domains[v] for v in c.scope]
    supported: list[set[int]] = [set() for _ in range(arity)]
    for t in c.tuples:
        if all(val in doms[i] for i, val in enumerate(t)):
            for i, val in enumerate(t):
                supported[i].add(val)
    return _restrict_to(view, c.scope, supported)


def _restrict_to(
    view: DomainView, scope: Sequence[int], supported: Sequence[AbstractSet[int]]
) -> PropagationOutcome:
    removed = 0
    failed = False
    for pos, var in enumerate(scope):
        keep = supported[pos]
        for val in [v for v in view.domains[var] if v not in keep]:
            view.remove(var, val)
            removed += 1
        if not view.domains[var]:
            failed = True
    return PropagationOutcome(Status.FAILURE if failed else Status.FIXPOINT, removed)


def propagate_adjacency(c: BinaryAdjacency, view: DomainView) -> PropagationOutcome:
    """Arc consistency through rank classes: only v mod modulus matters."""
    m = c.modulus
    a, b = c.scope
    diffs = c.diffs
    dom_a = view.domains[a]
    dom_b = view.domains[b]
    keep_a = {(rb + d) % m for rb in {v % m for v in dom_b} for d in diffs}
    removed = 0
    for val in [v for v in dom_a if v % m not in keep_a]:
        view.remove(a, val)
        removed += 1
    if not dom_a:
        return PropagationOutcome(Status.FAILURE, removed)
    keep_b = {(ra - d) % m for ra in {v % m for v in dom_a} for d in diffs}
    for val in [v for v in dom_b if v % m not in keep_b]:
        view.remove(b, val)
        removed += 1
    status = Status.FAILURE if not dom_b else Status.FIXPOINT
    return PropagationOutcome(status, removed)


def propagate_binary_generic(c: Constraint, view: DomainView) -> PropagationOutcome:
    if isinstance(c, LessThan):
        return _propagate_less_than(c, view)
    if isinstance(c, NotEqual):
        return _propagate_not_equal(c, view)
    if isinstance(c, FixedAssignment):
        return _propagate_fixed(c, view)
    if isinstance(c, InverseChanneling):
        return _propagate_channeling(c, view)
    raise TypeError(f"no propagator for {type(c).__name__}")


def _propagate_less_than(c: LessThan, view: DomainView) -> PropagationOutcome:
    a, b = c.scope
    removed = 0
    # x < y: x needs a larger partner, y a smaller one.
    max_b = max(view.domains[b])
    for val in [v for v in view.domains[a] if v >= max_b]:
        view.remove(a, val)
        removed += 1
    if not view.domains[a]:
        return PropagationOutcome(Status.FAILURE, removed)
    min_a = min(view.domains[a])
    for val in [v for v in view.domains[b] if v <= min_a]:
        view.remove(b, val)
        removed += 1
    status = Status.FAILURE if not view.domains[b] else Status.FIXPOINT
    return PropagationOutcome(status, removed)


def _propagate_not_equal(c: NotEqual, view: DomainView) -> PropagationOutcome:
    a, b = c.scope
    da = view.domains[a]
    db = view.domains[b]
    removed = 0
    if len(da) == 1:
        (val,) = da
        if val in db:
            view.remove(b, val)
            removed += 1
            if not db:
                return PropagationOutcome(Status.FAILURE, removed)
    if len(db) == 1:
        (val,) = db
        if val in da:
            view.remove(a, val)
            removed += 1
            if not da:
                return PropagationOutcome(Status.FAILURE, removed)
    return PropagationOutcome(Status.FIXPOINT, removed)


def _propagate_fixed(c: FixedAssignment, view: DomainView) -> PropagationOutcome:
    var = c.scope[0]
    removed = 0
    for val in [v for v in view.domains[var] if v != c.value]:
        view.remove(var, val)
        removed += 1
    status = Status.FAILURE if not view.domains[var] else Status.FIXPOINT
    return PropagationOutcome(status, removed)


def _channeling_halves(
    c: InverseChanneling,
) -> tuple[tuple[int, ...], tuple[int, ...], dict[int, int]]:
    """Scope halves and a var -> (side-relative index) map, cached."""
    cached = c.__dict__.get("_halves")
    if cached is None:
        n = len(c.scope) // 2
        xs = c.scope[:n]
        ys = c.scope[n:]
        local = {var: i for i, var in enumerate(xs)}
        local.update({var: j for j, var in enumerate(ys)})
        cached = (xs, ys, local)
        object.__setattr__(c, "_halves", cached)
    return cached


def apply_channeling_events(
    c: InverseChanneling, view: DomainView, events: Sequence[tuple[int, int]]
) -> PropagationOutcome:
    """Re-establish the channeling fixpoint after known removals.

    ``events`` lists (variable, value) removals that happened since the
    constraint last reached its fixpoint; only removals can have
    occurred.  Each removal mirrors onto the opposite side, and domains
    that became singletons force their mirror variable.
    """
    xs, ys, local = _channeling_halves(c)
    n = len(xs)
    x_side = set(xs)
    scope_set = x_side | set(ys)
    removed = 0
    pending = deque(e for e in events if e[0] in scope_set)

    def mirror_remove(var: int, val: int) -> bool:
        nonlocal removed
        if val in view.domains[var]:
            view.remove(var, val)
            removed += 1
            pending.append((var, val))
            return not view.domains[var]
        return False

    while pending:
        var, val = pending.popleft()
        on_x = var in x_side
        i = local[var]
        # The mirror of losing value `val` on one side is the opposite
        # variable `val` losing value `i`.
        if 0 <= val < n:
            opposite = ys[val] if on_x else xs[val]
            if mirror_remove(opposite, i):
                return PropagationOutcome(Status.FAILURE, removed)
        dom = view.domains[var]
        if not dom:
            return PropagationOutcome(Status.FAILURE, removed)
        if len(dom) == 1:
            (forced,) = dom
            if 0 <= forced < n:
                opposite = ys[forced] if on_x else xs[forced]
                for other in [v for v in view.domains[opposite] if v != i]:
                    if mirror_remove(opposite, other):
                        return PropagationOutcome(Status.FAILURE, removed)
            else:
                view.remove(var, forced)
                removed += 1
                return PropagationOutcome(Status.FAILURE, removed)
    return PropagationOutcome(Status.FIXPOINT, removed)


def _propagate_channeling(c: InverseChanneling, view: DomainView) -> PropagationOutcome:
    """x_i = j iff y_j = i: value consistency plus singleton forcing,
    run to a local fixpoint."""
    n = len(c.scope) // 2
    xs = c.scope[:n]
    ys = c.scope[n:]
    removed = 0

    def revise_side(left: Sequence[int], right: Sequence[int]) -> tuple[int, bool]:
        # left[i] = j requires i in dom(right[j]); singletons force the mirror.
        pruned = 0
        for i, var in enumerate(left):
            dom = view.domains[var]
            for j in [v for v in dom if not 0 <= v < n or i not in view.domains[right[v]]]:
                view.remove(var, j)
                pruned += 1
            if not dom:
                return pruned, True
            if len(dom) == 1:
                (j,) = dom
                mirror = right[j]
                for other in [v for v in view.domains[mirror] if v != i]:
                    view.remove(mirror, other)
                    pruned += 1
                if not view.domains[mirror]:
                    return pruned, True
        return pruned, False

    while True:
        pruned_x, failed = revise_side(xs, ys)
        removed += pruned_x
        if failed:
            return PropagationOutcome(Status.FAILURE, removed)
        pruned_y, failed = revise_side(ys, xs)
        removed += pruned_y
        if failed:
            return PropagationOutcome(Status.FAILURE, removed)
        if pruned_x == 0 and pruned_y == 0:
            return PropagationOutcome(Status.FIXPOINT, removed)


_PROPAGATORS = {
    Regular: propagate_regular,
    Table: propagate_table,
    BinaryAdjacency: propagate_adjacency,
    LessThan: _propagate_less_than,
    NotEqual: _propagate_not_equal,
    FixedAssignment: _propagate_fixed,
    InverseChanneling: _propagate_channeling,
}


def propagator_for(c: Constraint):
    """Concrete propagator for a constraint, skipping per-call dispatch."""
    prop = _PROPAGATORS.get(type(c))
    if prop is None:
        for kind, candidate in _PROPAGATORS.items():
            if isinstance(c, kind):
                return candidate
        raise TypeError(f"no propagator for {type(c).__name__}")
    return prop


def propagate(c: Constraint, view: DomainView) -> PropagationOutcome:
    """Dispatch to the propagator for the constraint's kind."""
    return propagator_for(c)(c, view)
