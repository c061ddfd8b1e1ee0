"""Longest k-monotone chains in random point sets.

Exact divided-difference predicates, the cells C_k(a, b) and their
measure-preserving maps, samplers, an exact chain solver and the Monte
Carlo experiments built on them.
"""

from .cells import Cell, area, cell_bounds, cell_info, contains, contains_exact, vertices, width
from .chains import (
    BoundaryChain,
    Chain,
    ValidationReport,
    load_chain,
    lower_order_check,
    nesting_check,
    validate_exhaustive,
    validate_windows,
)
from .errors import BudgetExceededError, GuardrailError, InvalidInputError, KMonotoneError
from .experiments import (
    EstimateReport,
    TrialRecord,
    concentration_experiment,
    coupling_check,
    estimate_alpha,
    greedy_lower_bound,
    limit_shape_probe,
    run_poisson_trials,
    run_uniform_trials,
    superadditivity_check,
)
from .maps import CellMap, apply_G, apply_G_inv, apply_T
from .numerics import (
    Node,
    Point,
    diff_table,
    divided_difference,
    gamma,
    is_general_position,
    newton_eval,
    sign_of_tuple,
)
from .sampling import (
    PoissonSample,
    RngSpec,
    poisson_pmf_and_tail,
    sample_poisson_cell,
    sample_uniform_cell,
    sample_uniform_square,
)
from .solver import SolveResult, concatenate, solve, solve_brute, solve_dp, solve_greedy_cells, solve_lis

__version__ = "0.1.0"
