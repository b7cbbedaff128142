"""Command-line interface.

Each command prints a single-line JSON report to standard output and a
short human summary to standard error, so output can be piped without
flags.  Identical invocations produce byte-identical output and files.

Exit codes: 0 when the command's success condition holds, 1 when the
run completed but the condition failed (or an output file could not be
written), 2 for invalid usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cone import ConePoint
from .grid import Mesh
from .experiments import (
    SweepConfig,
    perturbation_sweep,
    solve_with_canonical_start,
    stability_report,
    write_rows,
)
from .solvers import BRUTE_FORCE_MAX_CELLS, SolverOptions
from .ssc import check_stationarity, coercivity_estimate, growth_estimate

_STATIONARITY_LIMIT = 1e-12
_BETA_SLACK = 1e-9
_DELTA_SLACK = 1e-9


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text!r}")
    return n


def _nonnegative_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text!r}")
    return x


def _positive_float(text: str) -> float:
    x = _nonnegative_float(text)
    if x == 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _int_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part != ""]


def _float_list(text: str) -> list[float]:
    return [_nonnegative_float(part) for part in text.split(",") if part != ""]


def _emit(payload: dict, summary: str) -> None:
    print(json.dumps(payload))
    print(summary, file=sys.stderr)


def _cmd_verify_ssc(args: argparse.Namespace) -> int:
    mesh = Mesh(args.n)
    stationarity = check_stationarity(0.0, ConePoint.apex(mesh))
    report = coercivity_estimate(mesh, samples=args.samples, seed=args.seed)
    ok = (
        stationarity <= _STATIONARITY_LIMIT
        and report.beta_estimate >= report.beta_certified - _BETA_SLACK
    )
    _emit(
        {"stationarity": stationarity, **report.as_dict()},
        f"apex stationarity {stationarity:.3e}, beta_estimate "
        f"{report.beta_estimate:.9f} vs certified {report.beta_certified:.9f}: "
        f"{'ok' if ok else 'FAIL'}",
    )
    return 0 if ok else 1


def _cmd_solve(args: argparse.Namespace) -> int:
    if args.method == "brute" and args.n > BRUTE_FORCE_MAX_CELLS:
        print(
            f"error: method brute needs --n <= {BRUTE_FORCE_MAX_CELLS}",
            file=sys.stderr,
        )
        return 2
    mesh = Mesh(args.n)
    opts = SolverOptions(
        max_iterations=args.max_iter, tolerance=args.tol, seed=args.seed
    )
    report = solve_with_canonical_start(args.h, mesh, args.method, opts)
    _emit(
        report.as_dict(),
        f"{args.method} at n={args.n}, h={args.h:g}: f_star={report.objective:.12g} "
        f"t_star={report.minimizer.t:.12g} converged={report.converged}",
    )
    return 0 if report.converged else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = SweepConfig(
        h_list=tuple(args.h_list),
        n_list=tuple(args.n_list),
        method=args.method,
        opts=SolverOptions(seed=args.seed),
        output_path=args.out,
        format=args.format,
    )
    rows = perturbation_sweep(cfg)
    write_rows(rows, cfg.output_path, cfg.format)
    print(f"wrote {len(rows)} rows to {cfg.output_path}", file=sys.stderr)
    return 0


def _cmd_growth(args: argparse.Namespace) -> int:
    mesh = Mesh(args.n)
    report = growth_estimate(
        mesh, epsilon=args.epsilon, samples=args.samples, seed=args.seed
    )
    ok = report.delta_estimate >= 0.5 - _DELTA_SLACK
    _emit(
        report.as_dict(),
        f"delta_estimate {report.delta_estimate:.9f} vs certified 0.5: "
        f"{'ok' if ok else 'FAIL'}",
    )
    return 0 if ok else 1


def _cmd_stability(args: argparse.Namespace) -> int:
    record = stability_report(args.h, Mesh(args.n), args.delta)
    row = record.row
    _emit(
        record.as_dict(),
        f"norm {row.norm_x:.6g} vs bound {row.prop2_bound:.6g} "
        f"(slack {record.slack:.6g}): {'ok' if row.prop2_ok else 'FAIL'}",
    )
    return 0 if row.prop2_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conelab",
        description=(
            "Numerical laboratory for minimizing f_h(t, u) = t^2 + ||Su||^2 "
            "- ||u||^2/2 - h t over the cone |u| <= t."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser(
        "verify-ssc",
        help="check apex stationarity and the sampled coercivity bound",
    )
    verify.add_argument("--n", type=_positive_int, required=True, help="mesh cells")
    verify.add_argument("--samples", type=_positive_int, default=10000)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=_cmd_verify_ssc)

    solve = sub.add_parser("solve", help="minimize f_h on one mesh")
    solve.add_argument("--n", type=_positive_int, required=True, help="mesh cells")
    solve.add_argument("--h", type=_nonnegative_float, required=True, help="tilt")
    solve.add_argument(
        "--method", choices=("pgd", "bangbang", "brute"), default="bangbang"
    )
    solve.add_argument("--tol", type=_positive_float, default=1e-10)
    solve.add_argument("--max-iter", type=_positive_int, default=100000)
    solve.add_argument("--seed", type=int, default=0)
    solve.set_defaults(func=_cmd_solve)

    sweep = sub.add_parser("sweep", help="solve over a grid of (h, n) and write rows")
    sweep.add_argument(
        "--n-list", type=_int_list, required=True, help="comma-separated mesh sizes"
    )
    sweep.add_argument(
        "--h-list", type=_float_list, required=True, help="comma-separated tilts"
    )
    sweep.add_argument(
        "--method", choices=("pgd", "bangbang", "brute"), default="bangbang"
    )
    sweep.add_argument("--out", required=True, help="output file path")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.set_defaults(func=_cmd_sweep)

    growth = sub.add_parser(
        "growth", help="sample the quadratic-growth constant at the apex"
    )
    growth.add_argument("--n", type=_positive_int, required=True, help="mesh cells")
    growth.add_argument("--samples", type=_positive_int, default=10000)
    growth.add_argument("--epsilon", type=_positive_float, default=1.0)
    growth.add_argument("--seed", type=int, default=0)
    growth.set_defaults(func=_cmd_growth)

    stability = sub.add_parser(
        "stability", help="audit the bound ||minimizer|| <= 2 h / delta"
    )
    stability.add_argument("--n", type=_positive_int, required=True, help="mesh cells")
    stability.add_argument("--h", type=_nonnegative_float, required=True, help="tilt")
    stability.add_argument("--delta", type=_positive_float, default=0.5)
    stability.add_argument("--seed", type=int, default=0)
    stability.set_defaults(func=_cmd_stability)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
