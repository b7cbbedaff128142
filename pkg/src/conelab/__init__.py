"""conelab: a numerical laboratory for a cone-constrained quadratic program.

The model problem minimizes

    f_h(t, u) = t^2 + ||S u||^2 - (1/2) ||u||^2 - h t

over the cone C = {(t, u) in R x L^2(0, 1) : |u| <= t a.e.}, where S
is the running integral (S u)(x) = integral of u over (0, x).  The
apex (0, 0) is the unique minimizer at h = 0 and satisfies a coercive
second-order condition, yet for every tilt h > 0 the minimizers run
off into faster and faster oscillation as the mesh refines: their weak
limit is not a minimizer.  The package discretizes the problem exactly
on piecewise-constant functions, solves it by three independent
methods, certifies the second-order analysis, and scripts the
refinement experiments that exhibit the degeneration.
"""

from .cone import (
    ConePoint,
    InfeasiblePointError,
    contains,
    norm_X,
    norm_X_sq,
    project,
    stationarity_residual,
)
from .experiments import (
    CSV_HEADER,
    StabilityRecord,
    SweepConfig,
    SweepRow,
    perturbation_sweep,
    solve_with_canonical_start,
    stability_report,
    write_rows,
)
from .grid import GridFunction, Mesh, MeshMismatchError, l2_inner, l2_norm_sq
from .objective import (
    check_tilt,
    gradient,
    hessian_form,
    hessian_vec,
    quadratic_decrease,
    rayleigh_ratio,
    value,
)
from .operators import (
    PiecewiseLinear,
    PowerIterationError,
    apply_S,
    apply_SstarS,
    gram_matrix,
    norm_S_sq,
    op_norm_SstarS,
    pl_l2_inner,
)
from .solvers import (
    BRUTE_FORCE_MAX_CELLS,
    BruteForceSizeError,
    PontryaginCheck,
    SolveReport,
    SolverOptions,
    all_plus_signs,
    alternating_signs,
    count_sign_changes,
    pontryagin_check,
    pontryagin_residual,
    random_feasible_point,
    solve_bangbang,
    solve_bruteforce,
    solve_pgd,
)
from .ssc import (
    BETA_CERTIFIED,
    DELTA_CERTIFIED,
    ChainLink,
    CoercivityReport,
    GrowthReport,
    check_stationarity,
    coercivity_certificate,
    coercivity_estimate,
    growth_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "BETA_CERTIFIED",
    "BRUTE_FORCE_MAX_CELLS",
    "BruteForceSizeError",
    "CSV_HEADER",
    "ChainLink",
    "CoercivityReport",
    "ConePoint",
    "DELTA_CERTIFIED",
    "GridFunction",
    "GrowthReport",
    "InfeasiblePointError",
    "Mesh",
    "MeshMismatchError",
    "PiecewiseLinear",
    "PontryaginCheck",
    "PowerIterationError",
    "SolveReport",
    "SolverOptions",
    "StabilityRecord",
    "SweepConfig",
    "SweepRow",
    "all_plus_signs",
    "alternating_signs",
    "apply_S",
    "apply_SstarS",
    "check_stationarity",
    "check_tilt",
    "coercivity_certificate",
    "coercivity_estimate",
    "contains",
    "count_sign_changes",
    "gradient",
    "gram_matrix",
    "growth_estimate",
    "hessian_form",
    "hessian_vec",
    "l2_inner",
    "l2_norm_sq",
    "norm_S_sq",
    "norm_X",
    "norm_X_sq",
    "op_norm_SstarS",
    "perturbation_sweep",
    "pl_l2_inner",
    "pontryagin_check",
    "pontryagin_residual",
    "project",
    "quadratic_decrease",
    "random_feasible_point",
    "rayleigh_ratio",
    "solve_bangbang",
    "solve_bruteforce",
    "solve_pgd",
    "solve_with_canonical_start",
    "stability_report",
    "stationarity_residual",
    "value",
    "write_rows",
]
