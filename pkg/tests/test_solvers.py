"""The three solvers against closed forms and an exact enumeration oracle.

The oracle rebuilds the Gram matrix of the running-integral operator in
rational arithmetic (same antiderivative route as the operator tests),
enumerates every sign pattern with Fractions, and applies the documented
tie-break; no floating-point shortcut of the implementation is reused.
"""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conelab import (
    BruteForceSizeError,
    ConePoint,
    GridFunction,
    InfeasiblePointError,
    Mesh,
    MeshMismatchError,
    SolverOptions,
    all_plus_signs,
    alternating_signs,
    contains,
    count_sign_changes,
    pontryagin_check,
    pontryagin_residual,
    random_feasible_point,
    solve_bangbang,
    solve_bruteforce,
    solve_pgd,
    value,
)


def _exact_gram(n):
    width = Fraction(1, n)
    G = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            # node values of the images of the cell indicators
            fi = [min(max(Fraction(k) - i, 0), 1) * width for k in range(n + 1)]
            fj = [min(max(Fraction(k) - j, 0), 1) * width for k in range(n + 1)]
            total = Fraction(0)
            for a, b, c, d in zip(fi[:-1], fi[1:], fj[:-1], fj[1:]):
                total += width * (
                    a * c + (a * (d - c) + c * (b - a)) / 2 + (b - a) * (d - c) / 3
                )
            G[i][j] = total
    return G


def _oracle_bruteforce(n, h):
    """Exact global minimum over sign patterns, with lex tie-break."""
    G = _exact_gram(n)
    h = Fraction(h)
    best_m, best_sigma, ties = None, None, 0
    for sigma in itertools.product((1, -1), repeat=n):
        m = sum(sigma[i] * G[i][j] * sigma[j] for i in range(n) for j in range(n))
        if best_m is None or m < best_m:
            best_m, best_sigma, ties = m, sigma, 1
        elif m == best_m:
            ties += 1
    t = h / (1 + 2 * best_m)
    f = -(h * h) / (2 + 4 * best_m)
    return best_sigma, t, f, ties


def test_solver_options_validation():
    SolverOptions()
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolverOptions(tolerance=0.0)
    with pytest.raises(ValueError):
        SolverOptions(step_rule="newton")
    with pytest.raises(ValueError):
        SolverOptions(initial_step=0.0)


def test_bruteforce_two_cells():
    report = solve_bruteforce(1.0, Mesh(2))
    t = 6.0 / 7.0
    assert_allclose(report.objective, -3.0 / 7.0, atol=1e-14)
    assert_allclose(report.minimizer.t, t, atol=1e-14)
    assert_allclose(report.minimizer.u.values, [t, -t], atol=1e-14)
    assert report.tie_count == 2
    assert report.sign_changes == 1
    assert report.iterations == 4
    assert report.converged
    assert report.stationarity <= 1e-12
    assert report.pontryagin_residual <= 1e-12
    assert report.nonvertex_cells == 0


def test_bruteforce_single_cell():
    report = solve_bruteforce(2.0, Mesh(1))
    assert_allclose(report.minimizer.t, 6.0 / 5.0, atol=1e-14)
    assert_allclose(report.objective, -6.0 / 5.0, atol=1e-14)


def test_bruteforce_four_cells():
    report = solve_bruteforce(1.0, Mesh(4))
    assert_allclose(report.objective, -12.0 / 25.0, atol=1e-13)
    assert_allclose(report.minimizer.t, 24.0 / 25.0, atol=1e-13)
    assert report.sign_changes == 3


def test_bruteforce_untilted_returns_the_apex():
    report = solve_bruteforce(0.0, Mesh(6))
    assert report.minimizer.t == 0.0
    assert np.all(report.minimizer.u.values == 0.0)
    assert report.objective == 0.0
    assert report.tie_count == 2**6
    assert report.sign_changes == 0


def test_bruteforce_against_exact_oracle():
    for n in (1, 2, 3, 4, 5, 6):
        for h in (Fraction(1), Fraction(7, 10)):
            sigma, t, f, ties = _oracle_bruteforce(n, h)
            report = solve_bruteforce(float(h), Mesh(n))
            assert_allclose(report.objective, float(f), atol=1e-12)
            assert_allclose(report.minimizer.t, float(t), atol=1e-12)
            assert_allclose(
                report.minimizer.u.values, float(t) * np.array(sigma), atol=1e-12
            )
            assert report.tie_count == ties


def test_bruteforce_size_guard():
    with pytest.raises(BruteForceSizeError):
        solve_bruteforce(1.0, Mesh(21))


def test_bangbang_two_and_four_cells():
    report = solve_bangbang(1.0, Mesh(2), all_plus_signs(2))
    t = 6.0 / 7.0
    assert_allclose(report.objective, -3.0 / 7.0, atol=1e-14)
    assert_allclose(report.minimizer.u.values, [t, -t], atol=1e-14)
    assert report.converged
    report4 = solve_bangbang(1.0, Mesh(4), all_plus_signs(4))
    assert_allclose(report4.objective, -12.0 / 25.0, atol=1e-13)
    assert_allclose(report4.minimizer.t, 24.0 / 25.0, atol=1e-13)
    assert report4.sign_changes == 3


def test_bangbang_untilted_returns_the_apex_immediately():
    report = solve_bangbang(0.0, Mesh(32), all_plus_signs(32))
    assert report.minimizer.t == 0.0
    assert report.objective == 0.0
    assert report.iterations == 0
    assert report.converged


def test_bangbang_start_validation():
    mesh = Mesh(3)
    with pytest.raises(ValueError):
        solve_bangbang(1.0, mesh, np.ones(2))
    with pytest.raises(ValueError):
        solve_bangbang(1.0, mesh, np.array([1.0, 0.0, -1.0]))


def test_bangbang_matches_bruteforce_from_all_plus():
    for n in range(1, 11):
        for h in (0.1, 0.5, 1.0):
            bb = solve_bangbang(h, Mesh(n), all_plus_signs(n))
            brute = solve_bruteforce(h, Mesh(n))
            assert abs(bb.objective - brute.objective) <= 1e-10
            assert bb.converged
            assert bb.stationarity <= 1e-10


def test_bangbang_reaches_the_global_pattern_from_adversarial_starts():
    # single flips alone stall on interior domain walls for n >= 5;
    # the pair moves and the plateau polish must dig out of them
    rng = np.random.default_rng(51)
    for n in (5, 7, 8, 11):
        brute = solve_bruteforce(1.0, Mesh(n))
        starts = [-np.ones(n), alternating_signs(n)]
        starts += [rng.choice([-1.0, 1.0], size=n) for _ in range(5)]
        for start in starts:
            bb = solve_bangbang(1.0, Mesh(n), start)
            assert abs(bb.objective - brute.objective) <= 1e-10
            # the plateau polish lands on the canonical alternating pattern
            assert np.array_equal(np.sign(bb.minimizer.u.values), alternating_signs(n))


def test_bangbang_canonicalizes_ties_to_alternating_from_plus():
    for n in (2, 3, 6, 9, 64, 255):
        report = solve_bangbang(0.3, Mesh(n), all_plus_signs(n))
        assert report.sign_changes == n - 1
        assert report.minimizer.u.values[0] > 0.0
        assert report.converged


def test_pgd_stationary_start():
    report = solve_pgd(0.0, Mesh(4), ConePoint.apex(Mesh(4)))
    assert report.converged
    assert report.iterations == 0
    assert report.objective == 0.0


def test_pgd_untilted_runs_to_the_apex():
    mesh = Mesh(8)
    start = ConePoint(0.5, GridFunction.constant(mesh, 0.3))
    report = solve_pgd(0.0, mesh, start)
    assert report.converged
    assert np.sqrt(report.minimizer.t ** 2) <= 1e-6
    assert report.objective <= 1e-12


def test_pgd_reaches_the_global_minimum_on_two_cells():
    mesh = Mesh(2)
    start = ConePoint(1.0, GridFunction(mesh, np.array([0.9, -0.9])))
    report = solve_pgd(1.0, mesh, start)
    assert report.converged
    assert abs(report.objective - (-3.0 / 7.0)) <= 1e-8
    assert abs(report.minimizer.t - 6.0 / 7.0) <= 1e-6


def test_pgd_canonical_start_finds_the_degenerate_interior_point():
    # from (h, 0) the first projected step lands on (h/2, 0), where the
    # gradient vanishes identically: a legitimate stationary point with
    # every cell strictly inside the box
    h, mesh = 1.0, Mesh(4)
    report = solve_pgd(h, mesh, ConePoint(h, GridFunction.zeros(mesh)))
    assert report.converged
    assert report.iterations == 1
    assert_allclose(report.minimizer.t, h / 2.0, rtol=1e-15)
    assert np.all(report.minimizer.u.values == 0.0)
    assert report.stationarity == 0.0
    assert report.pontryagin_residual == 0.0
    assert report.nonvertex_cells == mesh.n
    assert report.sign_changes == 0


def test_pgd_start_validation():
    mesh = Mesh(3)
    with pytest.raises(InfeasiblePointError):
        solve_pgd(1.0, mesh, ConePoint(0.5, GridFunction.constant(mesh, 1.0)))
    with pytest.raises(MeshMismatchError):
        solve_pgd(1.0, mesh, ConePoint.apex(Mesh(4)))


def test_pgd_monotone_descent():
    mesh = Mesh(4)
    rng = np.random.default_rng(52)
    start = random_feasible_point(mesh, rng)
    values = []
    for cap in range(1, 12):
        opts = SolverOptions(max_iterations=cap)
        report = solve_pgd(1.0, mesh, start, opts)
        values.append(report.objective)
        assert contains(report.minimizer)
    assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))


def test_pgd_fixed_step_rule():
    mesh = Mesh(4)
    rng = np.random.default_rng(53)
    opts = SolverOptions(step_rule="fixed", initial_step=0.3)
    report = solve_pgd(0.8, mesh, random_feasible_point(mesh, rng), opts)
    assert contains(report.minimizer)
    if report.converged:
        assert report.stationarity <= opts.tolerance


def test_converged_implies_stationarity_below_tolerance():
    rng = np.random.default_rng(54)
    for n in (2, 5, 9):
        mesh = Mesh(n)
        for h in (0.2, 1.0):
            reports = [
                solve_pgd(h, mesh, random_feasible_point(mesh, rng)),
                solve_bangbang(h, mesh, all_plus_signs(n)),
                solve_bruteforce(h, mesh),
            ]
            for report in reports:
                assert report.converged
                assert report.stationarity <= 1e-10
                assert report.pontryagin_residual <= 1e-9
                assert contains(report.minimizer)


def test_ray_optimum_brackets_the_one_dimensional_minimum():
    rng = np.random.default_rng(55)
    mesh = Mesh(6)
    h = 0.8
    for _ in range(10):
        sigma = rng.choice([-1.0, 1.0], size=6)
        report = solve_bangbang(h, mesh, sigma)
        t = report.minimizer.t
        best = value(h, report.minimizer)
        for factor in (0.99, 1.01):
            nudged = ConePoint(factor * t, GridFunction(mesh, factor * t * np.sign(report.minimizer.u.values)))
            assert best < value(h, nudged)


def test_pontryagin_check_values():
    mesh = Mesh(2)
    assert pontryagin_residual(ConePoint.apex(mesh)) == 0.0
    # the brute minimizer satisfies the endpoint conditions
    best = solve_bruteforce(1.0, mesh).minimizer
    assert pontryagin_residual(best) <= 1e-12
    # every vertex whose cells oppose their own reduced derivative passes
    ones = ConePoint(1.0, GridFunction.constant(mesh, 1.0))
    check = pontryagin_check(ones)
    assert check.residual == 0.0
    assert check.nonvertex_cells == 0
    # interior cells with a live derivative are charged their full gap
    inside = ConePoint(1.0, GridFunction(mesh, np.array([0.5, 0.0])))
    check = pontryagin_check(inside)
    assert_allclose(check.residual, 1.0, rtol=1e-14)
    assert check.nonvertex_cells == 2


def test_pontryagin_check_errors():
    mesh = Mesh(2)
    with pytest.raises(InfeasiblePointError):
        pontryagin_check(ConePoint(0.1, GridFunction.constant(mesh, 1.0)))


def test_count_sign_changes():
    assert count_sign_changes(np.array([1.0, -1.0, 1.0])) == 2
    assert count_sign_changes(np.array([1.0, 1.0])) == 0
    assert count_sign_changes(np.array([0.0, 0.0, 0.0])) == 0
    assert count_sign_changes(np.array([1.0, 0.0, -1.0])) == 0
    assert count_sign_changes(np.array([2.5])) == 0


def test_random_feasible_point_reproducibility():
    mesh = Mesh(12)
    a = random_feasible_point(mesh, np.random.default_rng(99))
    b = random_feasible_point(mesh, np.random.default_rng(99))
    assert a.t == b.t == 1.0
    assert np.array_equal(a.u.values, b.u.values)
    assert contains(a)


def test_report_serialization():
    report = solve_bangbang(1.0, Mesh(2), all_plus_signs(2))
    parsed = json.loads(report.to_json())
    assert parsed["method"] == "bangbang"
    assert parsed["tie_count"] is None
    assert len(parsed["minimizer"]["u"]) == 2
    assert parsed["converged"] is True
    brute = json.loads(solve_bruteforce(1.0, Mesh(2)).to_json())
    assert brute["tie_count"] == 2
