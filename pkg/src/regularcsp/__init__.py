"""Finite-domain constraint solving with DFA compilation of sub-problems.

The core pipeline: pick a subset of constraints, enumerate the induced
sub-problem exhaustively, and replace it by a single table or regular
(DFA membership) constraint propagated to generalized arc consistency;
overlapping automata can further be intersected into one.
"""

from .automaton import (
    Dfa,
    PrefixSets,
    SolutionSet,
    accepts,
    build_dfa,
    count_accepted,
    enumerate_language,
    intersect,
    lift,
    minimize,
    prefix_sets,
)
from .blackhole import (
    BlackHoleInstance,
    build_black_hole_csp,
    build_game_csp,
    deal_fans,
    generate_black_hole,
)
from .model import (
    BinaryAdjacency,
    Constraint,
    Csp,
    Domain,
    FixedAssignment,
    InverseChanneling,
    LessThan,
    NotEqual,
    Regular,
    SubCsp,
    Table,
    Variable,
    check_solution,
    extract_sub_csp,
    make_domain,
    replace_constraints,
    scope_of,
    size_of,
)
from .modelio import load_model, save_model
from .propagation import (
    DomainView,
    LayeredGraph,
    PropagationOutcome,
    Status,
    propagate,
    propagate_adjacency,
    propagate_binary_generic,
    propagate_regular,
    propagate_table,
)
from .search import (
    SearchStats,
    WeightTable,
    enumerate_all,
    propagate_to_fixpoint,
    select_variable_dom_over_wdeg,
    solve_first,
)
from .transform import (
    MODES,
    RegularizeConfig,
    RegularizeReport,
    apply_mode,
    intersect_regulars,
    regularize_selection,
    select_candidates,
    tabulate_selection,
)

__all__ = [name for name in dir() if not name.startswith("_")]
