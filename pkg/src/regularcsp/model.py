"""CSP model: variables, domains, constraints, and sub-problem extraction.

A problem is an immutable triple of variables, per-variable integer
domains, and constraints.  Transformations never mutate a model; they
build new ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import BadIndex, EmptySelection, ScopeMismatch

if TYPE_CHECKING:
    from .automaton import Dfa

# A domain is a strictly increasing tuple of ints.
Domain = tuple[int, ...]


def make_domain(values: Iterable[int]) -> Domain:
    """Sorted, deduplicated domain from arbitrary int values."""
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class Variable:
    id: int
    name: str


@dataclass(frozen=True)
class Constraint:
    """Base class; concrete kinds below. ``scope`` holds variable ids."""

    scope: tuple[int, ...]

    def holds(self, assignment: Sequence[int]) -> bool:
        """Direct relation check against a full assignment (id -> value)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Table(Constraint):
    """Extensional constraint: the scope tuple must be one of ``tuples``."""

    tuples: tuple[tuple[int, ...], ...]

    def holds(self, assignment: Sequence[int]) -> bool:
        return tuple(assignment[v] for v in self.scope) in self._tuple_set

    @property
    def _tuple_set(self) -> frozenset[tuple[int, ...]]:
        cached = self.__dict__.get("_ts")
        if cached is None:
            cached = frozenset(self.tuples)
            object.__setattr__(self, "_ts", cached)
        return cached


@dataclass(frozen=True)
class Regular(Constraint):
    """The scope values, read in scope order, must be a word of the DFA."""

    dfa: "Dfa"

    def holds(self, assignment: Sequence[int]) -> bool:
        return self.dfa.accepts([assignment[v] for v in self.scope])


@dataclass(frozen=True)
class BinaryAdjacency(Constraint):
    """(rank(a) - rank(b)) mod modulus in diffs, with rank(v) = v mod modulus."""

    modulus: int
    diffs: tuple[int, ...]

    def holds(self, assignment: Sequence[int]) -> bool:
        a, b = self.scope
        return (assignment[a] - assignment[b]) % self.modulus in self.diffs


@dataclass(frozen=True)
class LessThan(Constraint):
    def holds(self, assignment: Sequence[int]) -> bool:
        a, b = self.scope
        return assignment[a] < assignment[b]


@dataclass(frozen=True)
class NotEqual(Constraint):
    def holds(self, assignment: Sequence[int]) -> bool:
        a, b = self.scope
        return assignment[a] != assignment[b]


@dataclass(frozen=True)
class FixedAssignment(Constraint):
    value: int

    def holds(self, assignment: Sequence[int]) -> bool:
        return assignment[self.scope[0]] == self.value


@dataclass(frozen=True)
class InverseChanneling(Constraint):
    """x_i = j iff y_j = i, where x is the first half of the scope and y
    the second.  Values index into the opposite half (0-based)."""

    def holds(self, assignment: Sequence[int]) -> bool:
        n = len(self.scope) // 2
        xs = [assignment[v] for v in self.scope[:n]]
        ys = [assignment[v] for v in self.scope[n:]]
        for i, j in enumerate(xs):
            if not 0 <= j < n or ys[j] != i:
                return False
        for j, i in enumerate(ys):
            if not 0 <= i < n or xs[i] != j:
                return False
        return True


def scope_of(c: Constraint) -> tuple[int, ...]:
    """Scope variable ids, duplicates dropped, first-occurrence order kept."""
    return tuple(dict.fromkeys(c.scope))


@dataclass(frozen=True)
class Csp:
    variables: tuple[Variable, ...]
    domains: tuple[Domain, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if len(self.variables) != len(self.domains):
            raise ValueError("variables and domains must be parallel")
        for i, var in enumerate(self.variables):
            if var.id != i:
                raise ValueError(f"variable ids must be dense from 0, got {var.id} at {i}")
        for dom in self.domains:
            if not dom:
                raise ValueError("empty domain at model load")
            if list(dom) != sorted(set(dom)):
                raise ValueError("domain must be strictly sorted without duplicates")
        n = len(self.variables)
        for c in self.constraints:
            if len(set(c.scope)) != len(c.scope):
                raise ValueError(f"duplicate variable in scope {c.scope}")
            for v in c.scope:
                if not 0 <= v < n:
                    raise ValueError(f"constraint scopes unknown variable {v}")
            _check_arity(c)

    def variable_named(self, name: str) -> Variable:
        for var in self.variables:
            if var.name == name:
                return var
        raise KeyError(name)


def _check_arity(c: Constraint) -> None:
    if isinstance(c, Table):
        for t in c.tuples:
            if len(t) != len(c.scope):
                raise ValueError("table tuple arity must match scope")
    elif isinstance(c, Regular):
        if c.dfa.word_length != len(c.scope):
            raise ValueError("regular word length must match scope")
    elif isinstance(c, BinaryAdjacency):
        if len(c.scope) != 2:
            raise ValueError("adjacency constraint is binary")
        if c.modulus <= 0:
            raise ValueError("adjacency modulus must be positive")
    elif isinstance(c, (LessThan, NotEqual)):
        if len(c.scope) != 2:
            raise ValueError(f"{type(c).__name__} is binary")
    elif isinstance(c, FixedAssignment):
        if len(c.scope) != 1:
            raise ValueError("fixed assignment is unary")
    elif isinstance(c, InverseChanneling):
        if len(c.scope) % 2 != 0 or not c.scope:
            raise ValueError("channeling scope must pair two equal halves")


def size_of(csp: Csp) -> int:
    """Product of domain cardinalities; 1 for a zero-variable problem."""
    return math.prod(len(d) for d in csp.domains)


@dataclass(frozen=True)
class SubCsp:
    """A constraint subset rescoped onto its own variables.

    ``parent_vars`` maps local index -> parent variable id, in ascending
    parent-id order; that order fixes the word order of any automaton
    later compiled from this sub-problem.
    """

    parent_vars: tuple[int, ...]
    domains: tuple[Domain, ...]
    constraints: tuple[Constraint, ...]
    parent_names: tuple[str, ...] = field(default=())

    def as_csp(self) -> Csp:
        names = self.parent_names or tuple(f"v{p}" for p in self.parent_vars)
        variables = tuple(Variable(i, names[i]) for i in range(len(self.parent_vars)))
        return Csp(variables, self.domains, self.constraints)


def _rescope(c: Constraint, mapping: dict[int, int]) -> Constraint:
    new_scope = tuple(mapping[v] for v in c.scope)
    fields = {f: getattr(c, f) for f in c.__dataclass_fields__}
    fields["scope"] = new_scope
    return type(c)(**fields)


def extract_sub_csp(csp: Csp, selection: Iterable[int]) -> SubCsp:
    """Sub-problem induced by a set of constraint indices.

    Its variables are exactly the union of the selected scopes.
    """
    indices = sorted(set(selection))
    if not indices:
        raise EmptySelection("selection must name at least one constraint")
    for i in indices:
        if not 0 <= i < len(csp.constraints):
            raise BadIndex(f"constraint index {i} out of range")
    covered: set[int] = set()
    for i in indices:
        covered.update(csp.constraints[i].scope)
    parent_vars = tuple(sorted(covered))
    mapping = {p: k for k, p in enumerate(parent_vars)}
    return SubCsp(
        parent_vars=parent_vars,
        domains=tuple(csp.domains[p] for p in parent_vars),
        constraints=tuple(_rescope(csp.constraints[i], mapping) for i in indices),
        parent_names=tuple(csp.variables[p].name for p in parent_vars),
    )


def replace_constraints(csp: Csp, selection: Iterable[int], replacement: Constraint) -> Csp:
    """New model with the selected constraints removed and ``replacement``
    appended.  The replacement scope must equal the union of the selected
    scopes in ascending id order."""
    indices = sorted(set(selection))
    if not indices:
        raise EmptySelection("selection must name at least one constraint")
    for i in indices:
        if not 0 <= i < len(csp.constraints):
            raise BadIndex(f"constraint index {i} out of range")
    covered: set[int] = set()
    for i in indices:
        covered.update(csp.constraints[i].scope)
    expected = tuple(sorted(covered))
    if tuple(replacement.scope) != expected:
        raise ScopeMismatch(
            f"replacement scope {replacement.scope} must be {expected}"
        )
    removed = set(indices)
    kept = tuple(c for i, c in enumerate(csp.constraints) if i not in removed)
    return Csp(csp.variables, csp.domains, kept + (replacement,))


def check_solution(csp: Csp, values: Sequence[int]) -> bool:
    """Independent full check: every value in-domain, every relation holds."""
    if len(values) != len(csp.variables):
        return False
    for v, dom in zip(values, csp.domains):
        if v not in dom:
            return False
    return all(c.holds(values) for c in csp.constraints)
