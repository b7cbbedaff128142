"""Mesh-refinement sweeps, a stability audit, and their CSV/JSON output.

For h > 0 the minimizing cell pattern alternates sign (sign_changes =
n - 1 in every computed row), the minimum slides down toward -h^2/2 at
the rate 1/(3 n^2), and ||S u*||^2 vanishes at the same rate: refining
the mesh buys a lower objective only through ever faster oscillation.
The point the oscillating minimizers converge to weakly, (h, 0), has
objective exactly 0 and is undercut by every row.  Each row also
audits the stability bound ||minimizer|| <= 2 h / delta with the
certified growth constant delta = 1/2.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

from .cone import ConePoint, norm_X, project
from .grid import GridFunction, Mesh
from .objective import check_tilt
from .operators import norm_S_sq
from .solvers import (
    BRUTE_FORCE_MAX_CELLS,
    SolveReport,
    SolverOptions,
    all_plus_signs,
    solve_bangbang,
    solve_bruteforce,
    solve_pgd,
)
from .ssc import DELTA_CERTIFIED

_METHODS = ("pgd", "bangbang", "brute")
_FORMATS = ("csv", "json")

_ROW_FIELDS = (
    "h",
    "n",
    "t_star",
    "f_star",
    "norm_Su_sq",
    "norm_x",
    "sign_changes",
    "pontryagin_residual",
    "stationarity",
    "prop2_bound",
    "prop2_ok",
)
CSV_HEADER = ",".join(_ROW_FIELDS)


@dataclass(frozen=True)
class SweepRow:
    h: float
    n: int
    t_star: float
    f_star: float
    norm_Su_sq: float
    norm_x: float
    sign_changes: int
    pontryagin_residual: float
    stationarity: float
    prop2_bound: float
    prop2_ok: bool

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in _ROW_FIELDS}


@dataclass(frozen=True)
class StabilityRecord:
    """A sweep row plus the audited growth constant and the bound's slack."""

    row: SweepRow
    delta: float
    slack: float

    def as_dict(self) -> dict:
        out = self.row.as_dict()
        out["delta"] = self.delta
        out["slack"] = self.slack
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep plan: tilts, mesh sizes, solver, output target."""

    h_list: tuple
    n_list: tuple
    method: str = "bangbang"
    opts: SolverOptions = field(default_factory=SolverOptions)
    output_path: str = ""
    format: str = "csv"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_list", tuple(float(h) for h in self.h_list))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.h_list or not self.n_list:
            raise ValueError("h_list and n_list must be nonempty")
        for h in self.h_list:
            check_tilt(h)
        for n in self.n_list:
            if n < 1:
                raise ValueError("mesh sizes must be >= 1")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.method == "brute" and max(self.n_list) > BRUTE_FORCE_MAX_CELLS:
            raise ValueError(
                f"brute-force sweeps need n <= {BRUTE_FORCE_MAX_CELLS}"
            )
        if self.format not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}")


def solve_with_canonical_start(
    h: float, mesh: Mesh, method: str, opts: SolverOptions | None = None
) -> SolveReport:
    """Run one solver from its fixed, documented start.

    bangbang starts from the all-plus pattern, pgd from the projection
    of (h, 0), and brute needs no start.  Fixed starts keep sweep rows
    reproducible without hidden state.
    """
    opts = opts or SolverOptions()
    if method == "bangbang":
        return solve_bangbang(h, mesh, all_plus_signs(mesh.n), opts)
    if method == "pgd":
        start = project(ConePoint(h, GridFunction.zeros(mesh)))
        return solve_pgd(h, mesh, start, opts)
    if method == "brute":
        return solve_bruteforce(h, mesh)
    raise ValueError(f"method must be one of {_METHODS}")


def _make_row(h: float, mesh: Mesh, report: SolveReport, delta: float) -> SweepRow:
    p = report.minimizer
    nx = norm_X(p)
    bound = 2.0 * h / delta
    return SweepRow(
        h=float(h),
        n=mesh.n,
        t_star=p.t,
        f_star=report.objective,
        norm_Su_sq=norm_S_sq(p.u),
        norm_x=nx,
        sign_changes=report.sign_changes,
        pontryagin_residual=report.pontryagin_residual,
        stationarity=report.stationarity,
        prop2_bound=bound,
        prop2_ok=bool(nx <= bound),
    )


def perturbation_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """One row per (h, n), in the order the config lists them (h outer)."""
    rows = []
    for h in cfg.h_list:
        for n in cfg.n_list:
            mesh = Mesh(n)
            report = solve_with_canonical_start(h, mesh, cfg.method, cfg.opts)
            rows.append(_make_row(h, mesh, report, DELTA_CERTIFIED))
    return rows


def stability_report(
    h: float, mesh: Mesh, delta: float, opts: SolverOptions | None = None
) -> StabilityRecord:
    """Audit the bound ||minimizer|| <= 2 h / delta at one (h, mesh).

    delta is the quadratic-growth constant to audit against: the
    certified 1/2, or a growth_estimate result.  The minimizer comes
    from the bang-bang solver's canonical start.
    """
    check_tilt(h)
    if not delta > 0:
        raise ValueError("delta must be positive")
    report = solve_with_canonical_start(h, mesh, "bangbang", opts)
    row = _make_row(h, mesh, report, delta)
    return StabilityRecord(row=row, delta=float(delta), slack=row.prop2_bound - row.norm_x)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return repr(value)
    return format(value, ".17g")


def write_rows(rows, path: str, format: str = "csv") -> None:
    """Write sweep rows to path as CSV or a JSON array, atomically.

    CSV carries the fixed header and 17-significant-digit decimals, so
    reading the file back reproduces every double bit for bit.  The
    content goes to a temporary file first and is renamed into place,
    so a failed write never leaves a partial file at path.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("rows must be nonempty")
    if format not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}")
    if format == "csv":
        lines = [CSV_HEADER]
        lines += [",".join(_cell(v) for v in row.as_dict().values()) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([row.as_dict() for row in rows]) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    except OSError as exc:
        raise OSError(f"cannot write rows to {path!r}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except OSError as exc:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise OSError(f"cannot write rows to {path!r}: {exc}") from exc
