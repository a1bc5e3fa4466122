"""Layered fixed-word-length DFAs compiled from solution sets.

A solution set of arity n becomes a DFA whose states are the distinct
solution prefixes, with one shared start and one shared end state.  All
automata here are acyclic and accept only words of one fixed length, so
minimization reduces to bottom-up merging of states with identical
outgoing behaviour.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptySolutionSet,
    LengthMismatch,
    PositionOutOfRange,
    ValueOutsideDomain,
    WrongLength,
)
from .model import Domain


@dataclass(frozen=True)
class SolutionSet:
    """Deduplicated tuples of one arity, first-occurrence order kept."""

    arity: int
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        deduped = tuple(dict.fromkeys(self.tuples))
        for t in deduped:
            if len(t) != self.arity:
                raise ValueError(f"tuple {t} does not have arity {self.arity}")
        object.__setattr__(self, "tuples", deduped)

    def __len__(self) -> int:
        return len(self.tuples)

    def as_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.tuples)


@dataclass(frozen=True)
class PrefixSets:
    """levels[i] holds the distinct length-(i+1) prefixes of the solutions."""

    levels: tuple[frozenset[tuple[int, ...]], ...]


def prefix_sets(s: SolutionSet) -> PrefixSets:
    if not s.tuples:
        raise EmptySolutionSet("cannot take prefixes of an empty solution set")
    levels = tuple(
        frozenset(t[: i + 1] for t in s.tuples) for i in range(s.arity)
    )
    return PrefixSets(levels)


class Dfa:
    """Deterministic automaton over int symbols accepting fixed-length words.

    ``transitions`` maps (state, symbol) -> state; a missing entry is a
    dead move.  Construction runs a breadth-first layering check: every
    reachable state sits at exactly one depth, no depth exceeds
    ``word_length``, and reachable final states sit at depth
    ``word_length``.  Instances are immutable after construction.
    """

    def __init__(
        self,
        num_states: int,
        transitions: Mapping[tuple[int, int], int],
        start: int,
        finals: Iterable[int],
        word_length: int,
        alphabet: Iterable[int],
    ):
        self.num_states = num_states
        self.transitions = dict(transitions)
        self.start = start
        self.finals = frozenset(finals)
        self.word_length = word_length
        self.alphabet = tuple(sorted(set(alphabet)))
        self._validate()
        self._build_layers()

    def _validate(self) -> None:
        if not 0 <= self.start < self.num_states:
            raise ValueError("start state out of range")
        if self.word_length < 0:
            raise ValueError("word length must be non-negative")
        for f in self.finals:
            if not 0 <= f < self.num_states:
                raise ValueError("final state out of range")
        for (src, _sym), dst in self.transitions.items():
            if not 0 <= src < self.num_states or not 0 <= dst < self.num_states:
                raise ValueError("transition endpoint out of range")

    def _build_layers(self) -> None:
        # Breadth-first layering: depth per reachable state, or None.
        out: dict[int, dict[int, int]] = {}
        for (src, sym), dst in self.transitions.items():
            out.setdefault(src, {})[sym] = dst
        depth: list[int | None] = [None] * self.num_states
        depth[self.start] = 0
        queue = deque([self.start])
        while queue:
            s = queue.popleft()
            d = depth[s]
            for dst in out.get(s, {}).values():
                if d + 1 > self.word_length:
                    raise ValueError("path longer than the word length")
                if depth[dst] is None:
                    depth[dst] = d + 1
                    queue.append(dst)
                elif depth[dst] != d + 1:
                    raise ValueError("state reachable at two different depths")
        for f in self.finals:
            if depth[f] is not None and depth[f] != self.word_length:
                raise ValueError("reachable final state not at full depth")
        self.depth = depth
        # Per-position transition maps restricted to reachable states.
        maps: list[dict[int, dict[int, int]]] = [{} for _ in range(self.word_length)]
        for s, d in enumerate(depth):
            if d is not None and d < self.word_length and s in out:
                maps[d][s] = out[s]
        self.layer_maps = maps

    def states_at(self, position: int) -> list[int]:
        """Reachable states at a given depth, ascending id."""
        return [s for s, d in enumerate(self.depth) if d == position]

    def accepts(self, word: Sequence[int]) -> bool:
        if len(word) != self.word_length:
            raise WrongLength(
                f"word length {len(word)} != automaton length {self.word_length}"
            )
        state = self.start
        for sym in word:
            nxt = self.transitions.get((state, sym))
            if nxt is None:
                return False
            state = nxt
        return state in self.finals

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dfa):
            return NotImplemented
        return (
            self.num_states == other.num_states
            and self.start == other.start
            and self.finals == other.finals
            and self.word_length == other.word_length
            and self.transitions == other.transitions
            and self.alphabet == other.alphabet
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.num_states,
                self.start,
                self.finals,
                self.word_length,
                frozenset(self.transitions.items()),
                self.alphabet,
            )
        )

    def __repr__(self) -> str:
        return (
            f"Dfa(states={self.num_states}, len={self.word_length}, "
            f"transitions={len(self.transitions)}, finals={len(self.finals)})"
        )

    @classmethod
    def empty(cls, word_length: int, alphabet: Iterable[int]) -> "Dfa":
        """The empty-language automaton: one start state, no finals."""
        return cls(1, {}, 0, (), word_length, alphabet)


def build_dfa(s: SolutionSet, domains: Sequence[Domain]) -> Dfa:
    """Prefix-tree DFA accepting exactly the tuples of ``s``.

    One state per prefix of length 1..n-1, plus a start and a shared end
    state.  The alphabet is the union of the domains.
    """
    if not s.tuples:
        raise EmptySolutionSet("cannot build an automaton from no solutions")
    n = s.arity
    if len(domains) != n:
        raise ValueError("one domain per tuple position required")
    domain_sets = [set(d) for d in domains]
    for t in s.tuples:
        for i, v in enumerate(t):
            if v not in domain_sets[i]:
                raise ValueOutsideDomain(
                    f"value {v} outside domain at position {i}"
                )
    alphabet: set[int] = set().union(*domain_sets) if domain_sets else set()
    if n == 0:
        return Dfa(1, {}, 0, (0,), 0, alphabet)
    levels = prefix_sets(s).levels
    state_of: dict[tuple[int, ...], int] = {}
    next_id = 1
    for i in range(n - 1):
        for p in sorted(levels[i]):
            state_of[p] = next_id
            next_id += 1
    end = next_id
    num_states = end + 1
    transitions: dict[tuple[int, int], int] = {}
    for p, q in state_of.items():
        parent = 0 if len(p) == 1 else state_of[p[:-1]]
        transitions[(parent, p[-1])] = q
    for t in s.tuples:
        parent = 0 if n == 1 else state_of[t[:-1]]
        transitions[(parent, t[-1])] = end
    return Dfa(num_states, transitions, 0, (end,), n, alphabet)


def accepts(d: Dfa, word: Sequence[int]) -> bool:
    return d.accepts(word)


def _coreachable(d: Dfa) -> set[int]:
    """States from which some final state is reachable."""
    rev: dict[int, list[int]] = {}
    for (src, _sym), dst in d.transitions.items():
        rev.setdefault(dst, []).append(src)
    alive = set(d.finals)
    queue = deque(alive)
    while queue:
        s = queue.popleft()
        for src in rev.get(s, ()):
            if src not in alive:
                alive.add(src)
                queue.append(src)
    return alive


def enumerate_language(d: Dfa) -> SolutionSet:
    """All accepted words, in lexicographic order."""
    alive = _coreachable(d)
    words: list[tuple[int, ...]] = []
    if d.start in alive:
        prefix: list[int] = []

        def walk(position: int, state: int) -> None:
            if position == d.word_length:
                if state in d.finals:
                    words.append(tuple(prefix))
                return
            for sym, nxt in sorted(d.layer_maps[position].get(state, {}).items()):
                if nxt in alive:
                    prefix.append(sym)
                    walk(position + 1, nxt)
                    prefix.pop()

        walk(0, d.start)
    return SolutionSet(d.word_length, tuple(words))


def count_accepted(d: Dfa) -> int:
    """Number of accepted words, by path counting over the layers."""
    ways = {d.start: 1}
    for position in range(d.word_length):
        nxt_ways: dict[int, int] = {}
        for state, k in ways.items():
            for _sym, nxt in d.layer_maps[position].get(state, {}).items():
                nxt_ways[nxt] = nxt_ways.get(nxt, 0) + k
        ways = nxt_ways
    return sum(k for s, k in ways.items() if s in d.finals)


def minimize(d: Dfa) -> Dfa:
    """Language-equivalent layered DFA with the fewest states.

    Trims states that are unreachable or cannot reach a final state, then
    merges states with identical outgoing behaviour, sweeping from the
    deepest layer up.
    """
    alive = _coreachable(d)
    keep = [s for s in range(d.num_states) if d.depth[s] is not None and s in alive]
    if d.start not in keep:
        return Dfa.empty(d.word_length, d.alphabet)
    by_depth: dict[int, list[int]] = {}
    for s in keep:
        by_depth.setdefault(d.depth[s], []).append(s)
    keep_set = set(keep)
    # Class id per surviving state, computed bottom-up by signature.
    class_of: dict[int, int] = {}
    next_class = 0
    for t in sorted(by_depth, reverse=True):
        signatures: dict[tuple, int] = {}
        for s in sorted(by_depth[t]):
            if t == d.word_length:
                sig: tuple = ()
            else:
                sig = tuple(
                    sorted(
                        (sym, class_of[dst])
                        for sym, dst in d.layer_maps[t].get(s, {}).items()
                        if dst in keep_set
                    )
                )
            if sig not in signatures:
                signatures[sig] = next_class
                next_class += 1
            class_of[s] = signatures[sig]
    # Relabel classes breadth-first from the start for stable ids.
    order: dict[int, int] = {}
    for t in sorted(by_depth):
        for s in sorted(by_depth[t]):
            c = class_of[s]
            if c not in order:
                order[c] = len(order)
    transitions: dict[tuple[int, int], int] = {}
    for s in keep:
        t = d.depth[s]
        if t == d.word_length:
            continue
        for sym, dst in d.layer_maps[t].get(s, {}).items():
            if dst in keep_set:
                transitions[(order[class_of[s]], sym)] = order[class_of[dst]]
    finals = {order[class_of[s]] for s in keep if s in d.finals}
    return Dfa(
        len(order), transitions, order[class_of[d.start]], finals, d.word_length, d.alphabet
    )


def lift(
    d: Dfa,
    local_positions: Sequence[int],
    full_length: int,
    full_domains: Sequence[Domain],
) -> Dfa:
    """Embed ``d`` into words of length ``full_length``.

    The result accepts w iff ``d`` accepts the subsequence of w at
    ``local_positions``; every other position is a wildcard layer over
    that position's full domain.
    """
    positions = list(local_positions)
    for p in positions:
        if not 0 <= p < full_length:
            raise PositionOutOfRange(f"position {p} outside 0..{full_length - 1}")
    if sorted(set(positions)) != positions:
        raise ValueError("local positions must be strictly increasing")
    if len(positions) != d.word_length:
        raise LengthMismatch(
            f"{len(positions)} positions for a length-{d.word_length} automaton"
        )
    if len(full_domains) != full_length:
        raise ValueError("one domain per full position required")
    covered = set(positions)
    consumed = 0
    # New state = (boundary, inner state); numbered layer by layer.
    state_id: dict[tuple[int, int], int] = {}
    transitions: dict[tuple[int, int], int] = {}

    def sid(boundary: int, inner: int) -> int:
        key = (boundary, inner)
        if key not in state_id:
            state_id[key] = len(state_id)
        return state_id[key]

    frontier = [d.start]
    sid(0, d.start)
    for i in range(full_length):
        if i in covered:
            inner_pos = consumed
            consumed += 1
            nxt: set[int] = set()
            for s in frontier:
                for sym, dst in sorted(d.layer_maps[inner_pos].get(s, {}).items()):
                    transitions[(sid(i, s), sym)] = sid(i + 1, dst)
                    nxt.add(dst)
            frontier = sorted(nxt)
        else:
            for s in frontier:
                for v in full_domains[i]:
                    transitions[(sid(i, s), v)] = sid(i + 1, s)
            if not full_domains[i]:
                frontier = []
        if not frontier:
            break
    finals = {
        state_id[(full_length, f)] for f in d.finals if (full_length, f) in state_id
    }
    alphabet = set(d.alphabet)
    for i, dom in enumerate(full_domains):
        if i not in covered:
            alphabet.update(dom)
    if not state_id:
        return Dfa.empty(full_length, alphabet)
    return Dfa(len(state_id), transitions, 0, finals, full_length, alphabet)


def intersect(a: Dfa, b: Dfa, state_budget: int | None = None) -> Dfa:
    """Product automaton with L = L(a) ∩ L(b), trimmed.

    Raises BudgetExceeded when the reachable product grows past
    ``state_budget`` states.
    """
    from .errors import BudgetExceeded

    if a.word_length != b.word_length:
        raise LengthMismatch(
            f"cannot intersect word lengths {a.word_length} and {b.word_length}"
        )
    n = a.word_length
    pair_id: dict[tuple[int, int], int] = {(a.start, b.start): 0}
    transitions: dict[tuple[int, int], int] = {}
    frontier = [(a.start, b.start)]
    for position in range(n):
        nxt_frontier: dict[tuple[int, int], None] = {}
        for sa, sb in frontier:
            src = pair_id[(sa, sb)]
            moves_a = a.layer_maps[position].get(sa, {})
            moves_b = b.layer_maps[position].get(sb, {})
            small = moves_a if len(moves_a) <= len(moves_b) else moves_b
            for sym in sorted(small):
                da = moves_a.get(sym)
                db = moves_b.get(sym)
                if da is None or db is None:
                    continue
                pair = (da, db)
                if pair not in pair_id:
                    pair_id[pair] = len(pair_id)
                    if state_budget is not None and len(pair_id) > state_budget:
                        raise BudgetExceeded(
                            f"product exceeded {state_budget} states"
                        )
                    nxt_frontier[pair] = None
                transitions[(src, sym)] = pair_id[pair]
        frontier = list(nxt_frontier)
        if not frontier:
            break
    finals = {
        i for (sa, sb), i in pair_id.items() if sa in a.finals and sb in b.finals
    }
    alphabet = set(a.alphabet) | set(b.alphabet)
    product = Dfa(len(pair_id), transitions, 0, finals, n, alphabet)
    return _trim(product)


def _trim(d: Dfa) -> Dfa:
    """Drop states that are unreachable or cannot reach a final state."""
    alive = _coreachable(d)
    keep = [s for s in range(d.num_states) if d.depth[s] is not None and s in alive]
    if d.start not in keep:
        return Dfa.empty(d.word_length, d.alphabet)
    relabel = {s: i for i, s in enumerate(keep)}
    keep_set = set(keep)
    transitions = {
        (relabel[src], sym): relabel[dst]
        for (src, sym), dst in d.transitions.items()
        if src in keep_set and dst in keep_set
    }
    finals = {relabel[s] for s in d.finals if s in keep_set}
    return Dfa(
        len(keep), transitions, relabel[d.start], finals, d.word_length, d.alphabet
    )
