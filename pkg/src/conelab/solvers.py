"""Minimizers of f_h over the cone, by three independent routes.

* solve_pgd: projected gradient descent with backtracking.
* solve_bangbang: descent on vertex sign patterns.  For fixed t the
  u-subproblem minimizes the concave quadratic ||S u||^2 - ||u||^2 / 2
  over the box [-t, t]^n (concave because 2 lambda_max(S*S) < 1), so
  its minimum sits at a vertex u = t * sigma, and along each ray u =
  t * sigma the objective is t^2 (1/2 + m) - h t with m = ||S sigma||^2,
  minimized at t = h / (1 + 2 m) with value -h^2 / (2 + 4 m).  Finding
  the best pattern therefore means minimizing m = sigma' G sigma over
  sign vectors, where G is the Gram matrix of S.
* solve_bruteforce: exhaustive enumeration of all 2^n sign patterns
  (n <= 20), the oracle the iterative methods are tested against.

The vertex reduction is asserted at runtime: solve_bruteforce checks
2 * op_norm_SstarS(mesh) < 1 before trusting the enumeration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cone import (
    ConePoint,
    InfeasiblePointError,
    contains,
    norm_X,
    project,
    stationarity_residual,
)
from .grid import GridFunction, Mesh, MeshMismatchError
from .objective import gradient, quadratic_decrease, value
from .operators import apply_SstarS, gram_matrix, op_norm_SstarS

MIN_BACKTRACK_STEP = 1e-16
BRUTE_FORCE_MAX_CELLS = 20
_ENUM_CHUNK = 1 << 16
_TIE_TOL = 1e-12


class BruteForceSizeError(ValueError):
    """Raised when exhaustive enumeration is asked for on too fine a mesh."""


@dataclass(frozen=True)
class SolverOptions:
    """Shared iteration controls.

    step_rule "backtracking" halves the step until the objective
    decreases (reset to initial_step each iteration); "fixed" always
    applies initial_step with no decrease test.  seed only matters to
    callers that draw random starts; the solvers themselves are
    deterministic.
    """

    max_iterations: int = 100000
    tolerance: float = 1e-10
    step_rule: str = "backtracking"
    initial_step: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ValueError("max_iterations must be an integer >= 1")
        if not (float(self.tolerance) > 0.0):
            raise ValueError("tolerance must be positive")
        if self.step_rule not in ("backtracking", "fixed"):
            raise ValueError("step_rule must be 'backtracking' or 'fixed'")
        if not (float(self.initial_step) > 0.0):
            raise ValueError("initial_step must be positive")


@dataclass(frozen=True)
class PontryaginCheck:
    """Deviation from the pointwise bang-bang optimality conditions.

    residual is the worst-cell deviation; nonvertex_cells counts cells
    whose value is not at an endpoint of [-t, t], reported separately
    because cells with a vanishing multiplier pass the residual test at
    any interior value.
    """

    residual: float
    nonvertex_cells: int

    def as_dict(self) -> dict:
        return {"residual": self.residual, "nonvertex_cells": self.nonvertex_cells}


@dataclass(frozen=True)
class SolveReport:
    minimizer: ConePoint
    objective: float
    method: str
    iterations: int
    stationarity: float
    pontryagin_residual: float
    sign_changes: int
    converged: bool
    tie_count: int | None = None
    nonvertex_cells: int = 0

    def as_dict(self) -> dict:
        return {
            "minimizer": {"t": self.minimizer.t, "u": self.minimizer.u.values.tolist()},
            "objective": self.objective,
            "method": self.method,
            "iterations": self.iterations,
            "stationarity": self.stationarity,
            "pontryagin_residual": self.pontryagin_residual,
            "sign_changes": self.sign_changes,
            "converged": self.converged,
            "tie_count": self.tie_count,
            "nonvertex_cells": self.nonvertex_cells,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def count_sign_changes(values: np.ndarray) -> int:
    """Number of adjacent cell pairs with strictly opposite signs."""
    v = np.asarray(values, dtype=float).reshape(-1)
    return int(np.count_nonzero(v[:-1] * v[1:] < 0.0))


def all_plus_signs(n: int) -> np.ndarray:
    return np.ones(n)


def alternating_signs(n: int) -> np.ndarray:
    signs = np.ones(n)
    signs[1::2] = -1.0
    return signs


def random_feasible_point(mesh: Mesh, rng: np.random.Generator) -> ConePoint:
    """A random cone point with t = 1 and cell values uniform in [-1, 1]."""
    return ConePoint(1.0, GridFunction(mesh, rng.uniform(-1.0, 1.0, size=mesh.n)))


def pontryagin_check(p: ConePoint, tol: float = 1e-10) -> PontryaginCheck:
    """Check the pointwise endpoint conditions satisfied by minimizers.

    Minimizing the objective cell by cell in u (all other cells and t
    held fixed) is a concave one-dimensional problem on [-t, t], so at
    any local minimizer each cell sits at the endpoint opposing the
    sign of the reduced derivative g = 2 S*S u - u: where |g_i| > tol
    the cell must equal -t * sign(g_i), and where g_i vanishes any box
    value is cellwise admissible, so only the box violation
    max(|u_i| - t, 0) is charged.  The returned residual is the worst
    deviation over cells; zero certifies the necessary condition.
    """
    if not contains(p, tol):
        raise InfeasiblePointError("the check applies to cone points only")
    u = p.u.values
    g = 2.0 * apply_SstarS(p.u).values - u
    active = np.abs(g) > tol
    deviation = np.where(
        active,
        np.abs(u + p.t * np.sign(g)),
        np.maximum(np.abs(u) - p.t, 0.0),
    )
    nonvertex = int(np.count_nonzero(np.abs(np.abs(u) - p.t) > tol))
    return PontryaginCheck(residual=float(deviation.max()), nonvertex_cells=nonvertex)


def pontryagin_residual(p: ConePoint, tol: float = 1e-10) -> float:
    return pontryagin_check(p, tol).residual


def _build_report(
    h: float,
    method: str,
    p: ConePoint,
    iterations: int,
    reached: bool,
    opts: SolverOptions,
    tie_count: int | None = None,
) -> SolveReport:
    stat = stationarity_residual(p, gradient(h, p))
    check = pontryagin_check(p, opts.tolerance)
    return SolveReport(
        minimizer=p,
        objective=value(h, p),
        method=method,
        iterations=iterations,
        stationarity=stat,
        pontryagin_residual=check.residual,
        sign_changes=count_sign_changes(p.u.values),
        converged=bool(reached and stat <= opts.tolerance),
        tie_count=tie_count,
        nonvertex_cells=check.nonvertex_cells,
    )


def _axpy(p: ConePoint, a: float, q: ConePoint) -> ConePoint:
    return ConePoint(p.t + a * q.t, GridFunction(p.mesh, p.u.values + a * q.u.values))


def solve_pgd(
    h: float, mesh: Mesh, start: ConePoint, opts: SolverOptions | None = None
) -> SolveReport:
    """Projected gradient descent from a feasible start.

    Each iteration projects x - alpha * gradient back onto the cone.
    Under the backtracking rule alpha is halved until the objective
    decreases; the decrease is evaluated through the exact quadratic
    expansion (quadratic_decrease), which stays meaningful where the
    difference of two objective values would drown in cancellation.
    Convergence is declared when the unit-step fixed-point residual
    ||x - project(x - gradient)|| drops to opts.tolerance.  A
    backtracking stall (step below 1e-16 with no decrease) stops the
    iteration with converged=False.
    """
    opts = opts or SolverOptions()
    if start.mesh != mesh:
        raise MeshMismatchError("start must live on the target mesh")
    if not contains(start):
        raise InfeasiblePointError("solve_pgd requires a feasible start")
    x = start
    steps = 0
    reached = False
    while True:
        g = gradient(h, x)
        target = project(_axpy(x, -1.0, g))
        residual = norm_X(_axpy(x, -1.0, target))
        if residual <= opts.tolerance:
            reached = True
            break
        if steps >= opts.max_iterations:
            break
        if opts.step_rule == "fixed":
            x = project(_axpy(x, -opts.initial_step, g))
        else:
            step = opts.initial_step
            accepted = None
            while True:
                candidate = project(_axpy(x, -step, g))
                move = _axpy(candidate, -1.0, x)
                if quadratic_decrease(h, x, move) < 0.0:
                    accepted = candidate
                    break
                step *= 0.5
                if step < MIN_BACKTRACK_STEP:
                    break
            if accepted is None:
                break
            x = accepted
        steps += 1
    return _build_report(h, "pgd", x, steps, reached, opts)


def _pair_gain(signs: np.ndarray, Gs: np.ndarray, G: np.ndarray, i: int) -> float:
    # Quarter of the drop in m = sigma' G sigma from flipping cells i and i+1.
    j = i + 1
    return (
        signs[i] * Gs[i]
        + signs[j] * Gs[j]
        - G[i, i]
        - G[j, j]
        - 2.0 * signs[i] * signs[j] * G[i, j]
    )


def _flip(signs: np.ndarray, Gs: np.ndarray, G: np.ndarray, i: int) -> None:
    signs[i] = -signs[i]
    Gs += (2.0 * signs[i]) * G[:, i]


def solve_bangbang(
    h: float,
    mesh: Mesh,
    start_signs: np.ndarray,
    opts: SolverOptions | None = None,
) -> SolveReport:
    """Descend on sign patterns until no cellwise move improves.

    Works on m(sigma) = ||S sigma||^2 = sigma' G sigma, which alone
    determines the ray optimum t = h / (1 + 2 m).  A sweep applies, in
    order: single flips with positive gain (flipping cell i changes m
    by 4 (G_ii - sigma_i (G sigma)_i), so the exact improvement test is
    sigma_i (G sigma)_i > G_ii), adjacent pair flips with positive gain
    (these escape the stalls single flips hit on domain walls), and,
    once no gaining move exists, zero-gain flips that turn the earliest
    possible -1 into +1.  The last pass walks the plateau of tied
    patterns to its lexicographically smallest member (+1 before -1)
    without changing m, so tied runs land on one canonical pattern.

    Strict moves decrease m by a bounded-below amount and polish moves
    strictly decrease the lexicographic key, so the iteration cannot
    cycle; it stops at a pattern where no move applies (converged) or
    at the sweep cap (converged=False).  iterations counts sweeps.

    For h = 0 the ray optimum is t = 0 for every pattern, so the apex
    is returned immediately.
    """
    opts = opts or SolverOptions()
    signs = np.array(start_signs, dtype=float).reshape(-1)
    if signs.shape[0] != mesh.n or not np.all(np.abs(signs) == 1.0):
        raise ValueError("start_signs must be a length-n sequence of +/-1 entries")
    if h == 0:
        apex = ConePoint.apex(mesh)
        return _build_report(0.0, "bangbang", apex, 0, True, opts)
    n = mesh.n
    G = gram_matrix(mesh)
    Gs = G @ signs
    move_tol = 1e-9 * mesh.width**3
    sweeps = 0
    settled = False
    while sweeps < opts.max_iterations:
        sweeps += 1
        moved = False
        for i in range(n):
            if signs[i] * Gs[i] - G[i, i] > move_tol:
                _flip(signs, Gs, G, i)
                moved = True
        for i in range(n - 1):
            if _pair_gain(signs, Gs, G, i) > move_tol:
                _flip(signs, Gs, G, i)
                _flip(signs, Gs, G, i + 1)
                moved = True
        if not moved:
            for i in range(n):
                if signs[i] < 0 and abs(signs[i] * Gs[i] - G[i, i]) <= move_tol:
                    _flip(signs, Gs, G, i)
                    moved = True
            for i in range(n - 1):
                if signs[i] < 0 and abs(_pair_gain(signs, Gs, G, i)) <= move_tol:
                    _flip(signs, Gs, G, i)
                    _flip(signs, Gs, G, i + 1)
                    moved = True
        if not moved:
            settled = True
            break
    m = float(signs @ (G @ signs))
    t = h / (1.0 + 2.0 * m)
    p = ConePoint(t, GridFunction(mesh, t * signs))
    return _build_report(h, "bangbang", p, sweeps, settled, opts)


def solve_bruteforce(h: float, mesh: Mesh) -> SolveReport:
    """Global minimizer by enumerating every sign pattern (n <= 20).

    Valid because the u-subproblem at fixed t is strictly concave on
    the box (checked here via 2 * op_norm_SstarS < 1), so the global
    minimizer is the apex or a vertex point t(sigma) * (1, sigma); the
    apex, with objective 0, never beats a ray value -h^2 / (2 + 4 m)
    and coincides with every ray optimum when h = 0.  Among patterns
    tied to within a small absolute tolerance on m (sigma and -sigma
    always tie exactly), the lexicographically smallest pattern wins,
    ordering +1 before -1; enumeration order is exactly that order, so
    the first hit is kept.  tie_count reports the number of tied
    patterns.  iterations counts evaluated patterns.
    """
    n = mesh.n
    if n > BRUTE_FORCE_MAX_CELLS:
        raise BruteForceSizeError(
            f"enumeration needs 2^n patterns and is capped at n = "
            f"{BRUTE_FORCE_MAX_CELLS} (got n = {n}); use solve_bangbang or solve_pgd"
        )
    op_norm_SstarS(mesh)  # raises unless 2 lambda_max < 1, the reduction's premise
    opts = SolverOptions()
    if h == 0:
        # Every ray optimum is t = 0: all 2^n patterns tie at the apex.
        return _build_report(
            0.0, "brute", ConePoint.apex(mesh), 0, True, opts, tie_count=2**n
        )
    G = gram_matrix(mesh)
    shifts = n - 1 - np.arange(n)
    total = 1 << n
    best_m = np.inf
    best_idx = 0
    for base in range(0, total, _ENUM_CHUNK):
        idx = np.arange(base, min(base + _ENUM_CHUNK, total), dtype=np.int64)
        patterns = 1.0 - 2.0 * ((idx[:, None] >> shifts) & 1)
        m = np.einsum("ij,jk,ik->i", patterns, G, patterns)
        chunk_min = float(m.min())
        if chunk_min < best_m - _TIE_TOL:
            best_idx = base + int(np.nonzero(m <= chunk_min + _TIE_TOL)[0][0])
            best_m = chunk_min
        elif chunk_min < best_m:
            best_m = chunk_min
    ties = 0
    for base in range(0, total, _ENUM_CHUNK):
        idx = np.arange(base, min(base + _ENUM_CHUNK, total), dtype=np.int64)
        patterns = 1.0 - 2.0 * ((idx[:, None] >> shifts) & 1)
        m = np.einsum("ij,jk,ik->i", patterns, G, patterns)
        ties += int(np.count_nonzero(m <= best_m + _TIE_TOL))
    sigma = 1.0 - 2.0 * ((best_idx >> shifts) & 1)
    m_best = float(sigma @ (G @ sigma))
    t = h / (1.0 + 2.0 * m_best)
    p = ConePoint(t, GridFunction(mesh, t * sigma))
    return _build_report(h, "brute", p, total, True, opts, tie_count=ties)
