"""Exact-arithmetic toolkit for Stackelberg games and oracle query learning.

Everything runs on arbitrary-precision rationals (fractions.Fraction); there
are no floats anywhere in the core.  The package splits into a full-information
engine (games, linear programming, vertex enumeration), an oracle boundary
(sessions answering yes/no equilibrium queries against a hidden game), and the
learner pipeline that recovers enough of the hidden leader matrix to compute
an optimal fake follower matrix to report.
"""

from .rationals import rat, rat_str, dot, vec_add, vec_scale
from .linprog import LinearProgram, LPResult, lp_solve_exact, lp_solve_lexmin, solve_linear_system_2x2
from .sternbrocot import stern_brocot_find, stern_brocot_threshold, BoundExceededError
from .polytope import enumerate_polytope_vertices
from .games import (
    Game,
    StrategyProfile,
    MaximinResult,
    game_to_json,
    game_from_json,
    matrix_payoff,
    best_response_set,
    best_response_region,
    compute_sse,
    sse_value,
    is_sse,
    is_sse_response,
    maximin,
    inducible_fullinfo,
)
from .witness import construct_witness, WitnessSynthesisError
from .oracle import (
    OracleSession,
    LedgerEntry,
    QueryLedgerReport,
    MalformedQueryError,
    OracleModeError,
)
from .warmup import RelationTable, learn_Ij, learn_relation_table
from .gradient import (
    MAXIMIN_COINCIDES,
    ColumnOrdering,
    CoverMatrix,
    CriticalPointState,
    GradientModel,
    advance_Ig,
    compute_cover,
    critical_points,
    initial_growth_state,
    learn_aj,
    learn_gradient_model,
    learn_separating_hyperplane,
    make_proper_cover,
    order_rows,
    pinning_fake,
)
from .calibrate import (
    AT_MAXIMIN,
    BELOW_MAXIMIN,
    CalibrationResult,
    ColumnCalibration,
    ReferencePair,
    RelabelPlan,
    ShortCircuit,
    build_surrogate_and_J_xstar,
    calibrate,
    calibration_to_json,
    compute_Jhat,
    first_reference_pair,
    normalize_labels,
    second_reference_pair,
    second_reference_pair_brc,
    solve_ratios,
)

__all__ = [
    "rat", "rat_str", "dot", "vec_add", "vec_scale",
    "LinearProgram", "LPResult", "lp_solve_exact", "lp_solve_lexmin", "solve_linear_system_2x2",
    "stern_brocot_find", "stern_brocot_threshold", "BoundExceededError",
    "enumerate_polytope_vertices",
    "Game", "StrategyProfile", "MaximinResult",
    "game_to_json", "game_from_json",
    "matrix_payoff", "best_response_set", "best_response_region",
    "compute_sse", "sse_value", "is_sse", "is_sse_response",
    "maximin", "inducible_fullinfo",
    "construct_witness", "WitnessSynthesisError",
    "OracleSession", "LedgerEntry", "QueryLedgerReport",
    "MalformedQueryError", "OracleModeError",
    "RelationTable", "learn_Ij", "learn_relation_table",
    "MAXIMIN_COINCIDES", "ColumnOrdering", "CoverMatrix", "CriticalPointState",
    "GradientModel", "advance_Ig", "compute_cover", "critical_points",
    "initial_growth_state", "learn_aj", "learn_gradient_model",
    "learn_separating_hyperplane", "make_proper_cover", "order_rows",
    "pinning_fake",
    "AT_MAXIMIN", "BELOW_MAXIMIN", "CalibrationResult", "ColumnCalibration",
    "ReferencePair", "RelabelPlan", "ShortCircuit",
    "build_surrogate_and_J_xstar", "calibrate", "calibration_to_json",
    "compute_Jhat", "first_reference_pair", "normalize_labels",
    "second_reference_pair", "second_reference_pair_brc", "solve_ratios",
]
