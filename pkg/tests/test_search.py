"""Search engine: fixpoint, variable ordering, completeness, determinism."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from regularcsp import (
    Csp,
    DomainView,
    LessThan,
    NotEqual,
    Status,
    Table,
    Variable,
    WeightTable,
    enumerate_all,
    make_domain,
    propagate_to_fixpoint,
    select_variable_dom_over_wdeg,
    solve_first,
)
from regularcsp.blackhole import build_black_hole_csp, generate_black_hole
from regularcsp.errors import CapExceeded
from regularcsp.search import _Engine, build_watchers

from oracles import adjacency_pairs, brute_solutions, random_csp


def chain_csp():
    # x < y < z over {1,2,3} each: propagation alone solves it.
    return Csp(
        tuple(Variable(i, f"v{i}") for i in range(3)),
        tuple(make_domain([1, 2, 3]) for _ in range(3)),
        (LessThan((0, 1)), LessThan((1, 2))),
    )


# --- propagate_to_fixpoint ---


def test_fixpoint_solves_ordering_chain():
    csp = chain_csp()
    view = DomainView(csp.domains)
    weights = WeightTable.for_csp(csp)
    outcome = propagate_to_fixpoint(csp, view, weights)
    assert outcome.status is Status.FIXPOINT
    assert view.domains == [{1}, {2}, {3}]


def test_fixpoint_failure_bumps_weight():
    csp = Csp(
        (Variable(0, "a"), Variable(1, "b")),
        (make_domain([3]), make_domain([3])),
        (NotEqual((0, 1)),),
    )
    view = DomainView(csp.domains)
    weights = WeightTable.for_csp(csp)
    outcome = propagate_to_fixpoint(csp, view, weights)
    assert outcome.status is Status.FAILURE
    assert weights[0] == 2


def test_fixpoint_no_constraints():
    csp = Csp((Variable(0, "a"),), (make_domain([1, 2]),), ())
    view = DomainView(csp.domains)
    outcome = propagate_to_fixpoint(csp, view, WeightTable.for_csp(csp))
    assert outcome.status is Status.FIXPOINT
    assert outcome.removed == 0


def test_fixpoint_seeded_by_changed_vars():
    csp = chain_csp()
    view = DomainView(csp.domains)
    weights = WeightTable.for_csp(csp)
    watchers = build_watchers(csp)
    propagate_to_fixpoint(csp, view, weights, None, watchers)
    view.mark()
    # No change: seeding an untouched variable must do nothing.
    outcome = propagate_to_fixpoint(csp, view, weights, (0,), watchers)
    assert outcome.removed == 0


# --- variable selection ---


def test_select_smallest_ratio():
    csp = Csp(
        (Variable(0, "a"), Variable(1, "b")),
        (make_domain([1, 2, 3]), make_domain([1, 2])),
        (NotEqual((0, 1)),),
    )
    view = DomainView(csp.domains)
    assert select_variable_dom_over_wdeg(view, WeightTable.for_csp(csp), csp) == 1


def test_select_breaks_ties_by_id():
    csp = Csp(
        (Variable(0, "a"), Variable(1, "b")),
        (make_domain([1, 2]), make_domain([1, 2])),
        (NotEqual((0, 1)),),
    )
    view = DomainView(csp.domains)
    assert select_variable_dom_over_wdeg(view, WeightTable.for_csp(csp), csp) == 0


def test_select_none_when_all_assigned():
    csp = Csp((Variable(0, "a"),), (make_domain([4]),), ())
    view = DomainView(csp.domains)
    assert select_variable_dom_over_wdeg(view, WeightTable.for_csp(csp), csp) is None


def test_select_ignores_nearly_instantiated_constraints():
    # The constraint over (0, 1) has one uninstantiated variable left,
    # so it contributes no weight; both free variables tie on 1 and the
    # smaller id wins despite the bigger raw weight on variable 2.
    csp = Csp(
        tuple(Variable(i, f"v{i}") for i in range(3)),
        (make_domain([5]), make_domain([1, 2]), make_domain([1, 2])),
        (NotEqual((0, 1)), NotEqual((0, 2))),
    )
    view = DomainView(csp.domains)
    weights = WeightTable.for_csp(csp)
    weights.bump(1)
    assert select_variable_dom_over_wdeg(view, weights, csp) == 1


def test_select_prefers_heavier_degree():
    csp = Csp(
        tuple(Variable(i, f"v{i}") for i in range(3)),
        tuple(make_domain([1, 2]) for _ in range(3)),
        (NotEqual((0, 1)), NotEqual((1, 2))),
    )
    view = DomainView(csp.domains)
    weights = WeightTable.for_csp(csp)
    # Variable 1 sits in both constraints: ratio 2/2 beats 2/1.
    assert select_variable_dom_over_wdeg(view, weights, csp) == 1


# --- solve_first ---


def test_solve_first_unique_solution():
    csp = Csp(
        (Variable(0, "x"), Variable(1, "y")),
        (make_domain([1, 2]), make_domain([1, 2])),
        (LessThan((0, 1)),),
    )
    solution, stats = solve_first(csp, 10_000.0)
    assert solution == (1, 2)
    assert stats.solutions == 1
    assert not stats.timed_out


def test_solve_first_proves_unsat():
    csp = Csp(
        (Variable(0, "x"), Variable(1, "y")),
        (make_domain([1]), make_domain([1])),
        (NotEqual((0, 1)),),
    )
    solution, stats = solve_first(csp, 10_000.0)
    assert solution is None
    assert not stats.timed_out
    assert stats.fails >= 1


def test_solve_first_times_out():
    csp = build_black_hole_csp(generate_black_hole(seed=3))
    solution, stats = solve_first(csp, 0.001)
    assert solution is None
    assert stats.timed_out
    assert stats.nodes >= 1


def test_stats_fails_bounded_by_nodes():
    rng = random.Random(17)
    for _ in range(40):
        csp = random_csp(rng)
        _solution, stats = solve_first(csp, 10_000.0)
        assert stats.fails <= stats.nodes


# --- enumerate_all ---


def test_enumerate_unconstrained_pair():
    csp = Csp((Variable(0, "x"),), (make_domain([1, 2]),), ())
    solutions, _stats = enumerate_all(csp)
    assert solutions.as_set() == {(1,), (2,)}


def test_enumerate_unsat_is_empty():
    csp = Csp(
        (Variable(0, "x"),),
        (make_domain([1, 2]),),
        (Table((0,), ()),),
    )
    solutions, stats = enumerate_all(csp)
    assert len(solutions) == 0
    assert not stats.timed_out


def test_enumerate_adjacency_pair_finds_416():
    from regularcsp import BinaryAdjacency

    csp = Csp(
        (Variable(0, "a"), Variable(1, "b")),
        (make_domain(range(52)), make_domain(range(52))),
        (BinaryAdjacency((0, 1), 13, (1, 12)),),
    )
    solutions, _stats = enumerate_all(csp)
    assert solutions.as_set() == adjacency_pairs(52, 13, (1, 12))
    assert len(solutions) == 416


def test_enumerate_cap_exceeded():
    csp = Csp(
        (Variable(0, "x"), Variable(1, "y")),
        (make_domain(range(10)), make_domain(range(10))),
        (),
    )
    with pytest.raises(CapExceeded):
        enumerate_all(csp, cap=50)


def test_enumerate_cap_exact_boundary():
    csp = Csp((Variable(0, "x"),), (make_domain(range(10)),), ())
    solutions, _stats = enumerate_all(csp, cap=10)
    assert len(solutions) == 10


# --- completeness, determinism, fast-path equivalence ---


def test_enumeration_matches_brute_force_with_paranoid_selector():
    # The engine's incremental dom/wdeg bookkeeping is asserted against
    # the reference selector at every node while enumerating.
    rng = random.Random(2024)
    for _ in range(120):
        csp = random_csp(rng)
        engine = _Engine(csp, 60_000.0, paranoid=True)
        found: list = []
        engine.run(collect=found, cap=None)
        assert set(found) == brute_solutions(csp)


@settings(deadline=None, max_examples=40)
@given(st.data())
def test_enumeration_matches_brute_force_property(data):
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    csp = random_csp(rng)
    solutions, _stats = enumerate_all(csp)
    assert solutions.as_set() == brute_solutions(csp)


def test_search_is_deterministic():
    rng = random.Random(5)
    for _ in range(10):
        csp = random_csp(rng)
        first = enumerate_all(csp)
        second = enumerate_all(csp)
        assert first[0].tuples == second[0].tuples
        assert (first[1].nodes, first[1].fails) == (second[1].nodes, second[1].fails)


def test_weights_never_decrease():
    csp = Csp(
        tuple(Variable(i, f"v{i}") for i in range(6)),
        tuple(make_domain(range(5)) for _ in range(6)),
        tuple(NotEqual((a, b)) for a in range(6) for b in range(a + 1, 6)),
    )
    engine = _Engine(csp, 10_000.0)
    engine.run(collect=None, cap=None)  # pigeonhole: 6 vars, 5 values
    assert engine.first is None
    assert all(w >= 1 for w in engine.weights.weights)
    assert sum(engine.weights.weights) > len(csp.constraints)
