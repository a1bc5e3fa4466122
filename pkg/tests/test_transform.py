"""Model rewriting: selection, tabulation, regularization, intersection."""

import random

import pytest

from regularcsp import (
    BinaryAdjacency,
    Csp,
    DomainView,
    Regular,
    RegularizeConfig,
    Table,
    Variable,
    WeightTable,
    apply_mode,
    count_accepted,
    enumerate_all,
    enumerate_language,
    intersect_regulars,
    make_domain,
    propagate_to_fixpoint,
    regularize_selection,
    select_candidates,
    size_of,
    solve_first,
    tabulate_selection,
)
from regularcsp.blackhole import (
    adjacency_selections,
    build_black_hole_csp,
    generate_black_hole,
)
from regularcsp.errors import BadIndex, BudgetExceeded, OverlappingSelections
from regularcsp.transform import MODES

from oracles import adjacency_pairs, brute_solutions, random_csp


def adjacency_chain(num_vars=5, num_values=6, modulus=3):
    variables = tuple(Variable(i, f"y{i}") for i in range(num_vars))
    domains = tuple(make_domain(range(num_values)) for _ in range(num_vars))
    constraints = tuple(
        BinaryAdjacency((i, i + 1), modulus, (1, modulus - 1))
        for i in range(num_vars - 1)
    )
    return Csp(variables, domains, constraints)


def card_chain(num_vars):
    variables = tuple(Variable(i, f"y{i}") for i in range(num_vars))
    domains = tuple(make_domain(range(52)) for _ in range(num_vars))
    constraints = tuple(
        BinaryAdjacency((i, i + 1), 13, (1, 12)) for i in range(num_vars - 1)
    )
    return Csp(variables, domains, constraints)


# --- selection ---


def test_explicit_selections_pass_through():
    csp = adjacency_chain()
    cfg = RegularizeConfig(selections=((0, 1), (2,)))
    assert select_candidates(csp, cfg) == [(0, 1), (2,)]


def test_explicit_selections_reject_overlap():
    csp = adjacency_chain()
    cfg = RegularizeConfig(selections=((0, 1), (1, 2)))
    with pytest.raises(OverlappingSelections):
        select_candidates(csp, cfg)


def test_explicit_selections_reject_bad_index():
    csp = adjacency_chain()
    with pytest.raises(BadIndex):
        select_candidates(csp, RegularizeConfig(selections=((99,),)))


def test_auto_mode_on_card_chain_gives_singletons():
    # With the threshold at 52^2, an adjacency constraint fits alone and
    # any pair's union scope (52^3) does not.
    csp = card_chain(52)
    cfg = RegularizeConfig(auto_threshold=52**2)
    got = select_candidates(csp, cfg)
    assert got == [(i,) for i in range(51)]


def test_auto_mode_groups_within_threshold():
    csp = adjacency_chain(num_vars=4, num_values=6)
    # 6^3 fits, 6^4 does not: chain of 3 constraints splits into a
    # two-constraint group and a remainder.
    cfg = RegularizeConfig(auto_threshold=6**3)
    got = select_candidates(csp, cfg)
    assert got == [(0, 1), (2,)]


def test_auto_mode_respects_disjoint_groups():
    csp = card_chain(52)
    cfg = RegularizeConfig(auto_threshold=52**3)
    got = select_candidates(csp, cfg)
    # Pairs of consecutive adjacency constraints merge, singles remain.
    flat = [i for sel in got for i in sel]
    assert flat == list(range(51))
    assert all(len(sel) <= 2 for sel in got)


# --- per-selection rewriting ---


def test_regularized_adjacency_has_416_words():
    csp = card_chain(2)
    constraint, entry = regularize_selection(csp, (0,), 10**6)
    assert isinstance(constraint, Regular)
    assert constraint.scope == (0, 1)
    assert enumerate_language(constraint.dfa).as_set() == adjacency_pairs(52, 13, (1, 12))
    assert entry.sub_size == 52 * 52
    assert entry.solution_count == 416
    assert entry.states_after == 15  # one merged state per rank class
    assert entry.states_after <= entry.states_before


def test_tabulated_adjacency_has_416_tuples():
    csp = card_chain(2)
    constraint, entry = tabulate_selection(csp, (0,), 10**6)
    assert isinstance(constraint, Table)
    assert set(constraint.tuples) == adjacency_pairs(52, 13, (1, 12))
    assert entry.solution_count == 416


def test_unsat_selection_yields_empty_language():
    csp = Csp(
        (Variable(0, "x"),),
        (make_domain([1, 2]),),
        (Table((0,), ()),),
    )
    constraint, entry = regularize_selection(csp, (0,), 10**6)
    assert count_accepted(constraint.dfa) == 0
    assert entry.solution_count == 0
    rewritten, _report = apply_mode(csp, RegularizeConfig(mode="regular", selections=((0,),)))
    solution, stats = solve_first(rewritten, 5_000.0)
    assert solution is None and not stats.timed_out


def test_selection_round_trip_matches_sub_solutions():
    rng = random.Random(31)
    checked = 0
    while checked < 40:
        csp = random_csp(rng)
        index = rng.randrange(len(csp.constraints))
        from regularcsp import extract_sub_csp

        sub = extract_sub_csp(csp, (index,))
        if size_of(sub.as_csp()) > 10**5:
            continue
        constraint, _entry = regularize_selection(csp, (index,), 10**6)
        want = {
            t for t in brute_solutions(sub.as_csp())
        }
        assert enumerate_language(constraint.dfa).as_set() == want
        checked += 1


# --- intersection ---


def test_intersect_regulars_chains_adjacent_scopes():
    csp = card_chain(3)
    first, _ = regularize_selection(csp, (0,), 10**6)
    second, _ = regularize_selection(csp, (1,), 10**6)
    merged = intersect_regulars(csp, [first, second], 10**6)
    assert merged.scope == (0, 1, 2)
    want = {
        (a, b, c)
        for (a, b) in adjacency_pairs(52, 13, (1, 12))
        for c in range(52)
        if (b - c) % 13 in (1, 12)
    }
    assert enumerate_language(merged.dfa).as_set() == want


def test_intersect_regulars_requires_two():
    csp = card_chain(2)
    only, _ = regularize_selection(csp, (0,), 10**6)
    with pytest.raises(ValueError):
        intersect_regulars(csp, [only], 10**6)


def test_intersect_regulars_budget_propagates():
    csp = card_chain(3)
    first, _ = regularize_selection(csp, (0,), 10**6)
    second, _ = regularize_selection(csp, (1,), 10**6)
    with pytest.raises(BudgetExceeded):
        intersect_regulars(csp, [first, second], 1)


# --- apply_mode ---


def test_apply_mode_rejects_unknown_mode():
    with pytest.raises(ValueError):
        RegularizeConfig(mode="simplex")


def test_original_mode_is_identity():
    csp = adjacency_chain()
    out, report = apply_mode(csp, RegularizeConfig(mode="original"))
    assert out == csp
    assert report.entries == []


def test_modes_constant_lists_all_four():
    assert MODES == ("original", "table", "regular", "regular-intersected")


def test_regular_mode_swaps_all_black_hole_adjacencies():
    csp = build_black_hole_csp(generate_black_hole(enumerated=True))
    selections = adjacency_selections(csp)
    assert len(selections) == 51
    out, report = apply_mode(
        csp, RegularizeConfig(mode="regular", selections=selections)
    )
    assert len(out.constraints) == len(csp.constraints)
    regulars = [c for c in out.constraints if isinstance(c, Regular)]
    assert len(regulars) == 51
    assert not any(isinstance(c, BinaryAdjacency) for c in out.constraints)
    assert all(entry.solution_count == 416 for entry in report.entries)


def test_intersected_mode_merges_chain_and_keeps_solutions():
    csp = adjacency_chain(num_vars=5, num_values=6, modulus=3)
    selections = tuple((i,) for i in range(4))
    regular, _ = apply_mode(csp, RegularizeConfig(mode="regular", selections=selections))
    merged, _ = apply_mode(
        csp, RegularizeConfig(mode="regular-intersected", selections=selections)
    )
    assert len(merged.constraints) < len(regular.constraints)
    base = brute_solutions(csp)
    assert enumerate_all(regular)[0].as_set() == base
    assert enumerate_all(merged)[0].as_set() == base


def test_intersected_mode_falls_back_when_budget_exceeded():
    csp = adjacency_chain(num_vars=5, num_values=6, modulus=3)
    selections = tuple((i,) for i in range(4))
    cfg = RegularizeConfig(
        mode="regular-intersected", selections=selections, state_budget=1
    )
    out, _report = apply_mode(csp, cfg)
    regular, _ = apply_mode(csp, RegularizeConfig(mode="regular", selections=selections))
    assert len(out.constraints) == len(regular.constraints)
    assert enumerate_all(out)[0].as_set() == brute_solutions(csp)


def test_report_counts_match_dfa_language():
    csp = card_chain(3)
    out, report = apply_mode(
        csp, RegularizeConfig(mode="regular", selections=((0,), (1,)))
    )
    regulars = [c for c in out.constraints if isinstance(c, Regular)]
    for entry, constraint in zip(report.entries, regulars):
        assert entry.solution_count == count_accepted(constraint.dfa)


def test_transformation_is_deterministic():
    csp = adjacency_chain(num_vars=5, num_values=6, modulus=3)
    cfg = RegularizeConfig(mode="regular-intersected", selections=tuple((i,) for i in range(4)))
    first, report_a = apply_mode(csp, cfg)
    second, report_b = apply_mode(csp, cfg)
    assert first == second
    assert [e.solution_count for e in report_a.entries] == [
        e.solution_count for e in report_b.entries
    ]


def test_all_modes_preserve_solutions_on_random_models():
    rng = random.Random(77)
    checked = 0
    while checked < 25:
        csp = random_csp(rng)
        if size_of(csp) > 10**5:
            continue
        base = brute_solutions(csp)
        selections = ((rng.randrange(len(csp.constraints)),),)
        for mode in ("table", "regular", "regular-intersected"):
            out, _ = apply_mode(csp, RegularizeConfig(mode=mode, selections=selections))
            assert enumerate_all(out)[0].as_set() == base, mode
        checked += 1


def test_rewriting_never_weakens_root_pruning():
    rng = random.Random(41)
    checked = 0
    while checked < 25:
        csp = random_csp(rng)
        if size_of(csp) > 10**5:
            continue
        selections = ((rng.randrange(len(csp.constraints)),),)
        view = DomainView(csp.domains)
        propagate_to_fixpoint(csp, view, WeightTable.for_csp(csp))
        for mode in ("table", "regular"):
            out, _ = apply_mode(csp, RegularizeConfig(mode=mode, selections=selections))
            other = DomainView(out.domains)
            propagate_to_fixpoint(out, other, WeightTable.for_csp(out))
            for rewritten, original in zip(other.domains, view.domains):
                assert rewritten <= original
        checked += 1
