import math

import numpy as np
import pytest

from srj.chebyshev import amplification_eval
from srj.problems import laplace_2d_neumann, poisson_1d
from srj.schemes import MAX_LEVEL, generate_srj_scheme, scheme_for_level
from srj.solver import (Cjm, FixedM, Heuristic, Increasing, Jacobi, SolverState,
                        StoppingRule, asymptotic_rate, average_convergence_rate,
                        heuristic_next_level, run_cycle, solve)
from srj.sparse import SparseMatrix, dense_jacobi_eigenvalues, jacobi_iteration_matrix, matvec


def stopping(tol=1e-7, max_iters=100000, norm="absolute_l2"):
    return StoppingRule(norm=norm, tolerance=tol, max_iterations=max_iters)


# ------------------------------------------------------------------ run_cycle

def test_single_factor_cycle_is_one_weighted_sweep():
    p = poisson_1d(8)
    state = SolverState(x=p.x0.copy())
    new_state, stats = run_cycle(p.A, p.b, state, scheme_for_level(0))
    from srj.sparse import weighted_jacobi_sweep
    expected = weighted_jacobi_sweep(p.A, p.x0, p.b, 2.0 / 3.0)
    assert new_state.x == pytest.approx(expected)
    assert stats.M == 1 and stats.executed == 1
    assert new_state.total_iterations == 1


def test_cycle_error_matches_dense_product_prediction():
    p = poisson_1d(30)
    scheme = scheme_for_level(5)
    assert scheme.M == 10
    x_exact = np.linalg.solve(p.A.to_dense(), p.b)
    B = jacobi_iteration_matrix(p.A)
    prod = np.eye(30)
    for w in scheme.omegas:
        prod = ((1.0 - w) * np.eye(30) + w * B) @ prod
    predicted_err = prod @ (p.x0 - x_exact)
    state, _ = run_cycle(p.A, p.b, SolverState(x=p.x0.copy()), scheme)
    got_err = state.x - x_exact
    scale = max(np.max(np.abs(predicted_err)), 1e-30)
    assert np.max(np.abs(got_err - predicted_err)) / scale < 1e-9


def test_cycle_on_exact_solution_short_circuits():
    p = poisson_1d(6)
    x = np.linalg.solve(p.A.to_dense(), p.b)
    state = SolverState(x=x)
    new_state, stats = run_cycle(p.A, p.b, state, scheme_for_level(3),
                                 stopping=stopping(tol=1e-9))
    assert new_state.converged
    assert stats.executed == 0
    assert new_state.prev_residual_ratio is None


def test_cycle_does_not_mutate_input_state():
    p = poisson_1d(10)
    state = SolverState(x=p.x0.copy())
    x_before = state.x.copy()
    run_cycle(p.A, p.b, state, scheme_for_level(2))
    assert np.array_equal(state.x, x_before)
    assert state.total_iterations == 0


def test_cycle_respects_iteration_budget():
    p = poisson_1d(50)
    state = SolverState(x=p.x0.copy())
    rule = StoppingRule(norm="absolute_l2", tolerance=1e-30, max_iterations=3)
    new_state, stats = run_cycle(p.A, p.b, state, scheme_for_level(3), stopping=rule)
    assert stats.executed == 3
    assert not new_state.converged


# ------------------------------------------------------------------ heuristic

def test_heuristic_next_level_rules():
    assert heuristic_next_level(0.5, 3) == 4
    assert heuristic_next_level(0.3, 5) == 4
    assert heuristic_next_level(0.1, 5) == 5
    assert heuristic_next_level(0.3, 0) == 0
    assert heuristic_next_level(0.4, 7) == 7      # exact threshold keeps
    assert heuristic_next_level(0.9, MAX_LEVEL) == MAX_LEVEL
    with pytest.raises(ValueError):
        heuristic_next_level(-0.2, 3)


def test_heuristic_next_level_custom_thresholds():
    assert heuristic_next_level(0.35, 3, t_hi=0.3, t_lo=0.15) == 4
    assert heuristic_next_level(0.2, 3, t_hi=0.3, t_lo=0.15) == 2


# -------------------------------------------------------------------- metrics

def test_average_convergence_rate_values():
    assert average_convergence_rate(1.0, math.exp(-1.0), 1) == pytest.approx(1.0)
    assert average_convergence_rate(1.0, 1.0, 7) == 0.0
    assert average_convergence_rate(2.0, 1.0, 2) == pytest.approx(math.log(2.0) / 2.0)
    with pytest.raises(ValueError):
        average_convergence_rate(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        average_convergence_rate(1.0, -1.0, 1)


def test_asymptotic_rate_values():
    assert asymptotic_rate([0.0], 1) == pytest.approx(math.log(3.0))
    # eigenvalues exactly at the roots annihilate the error: sentinel
    scheme = generate_srj_scheme(3)
    roots = [1.0 - 1.0 / w for w in scheme.omegas]
    assert asymptotic_rate(roots, 3) == math.inf
    with pytest.raises(ValueError):
        asymptotic_rate([], 2)
    with pytest.raises(ValueError):
        asymptotic_rate([1.5], 2)


def test_asymptotic_rate_ranks_m63_fastest_for_n100():
    eigs = np.cos(np.arange(1, 101) * np.pi / 101.0)
    rates = {M: asymptotic_rate(eigs, M) for M in (35, 47, 63, 84)}
    assert max(rates, key=rates.get) == 63


# ---------------------------------------------------------------------- solve

def test_one_by_one_system_converges_fast():
    # n = 1 means B_J = 0: plain Jacobi nails it in one sweep; weighted
    # schemes contract by |1 - w| per sweep, so a couple of sweeps suffice
    # at this tolerance for every controller
    A = SparseMatrix.from_dense([[4.0]])
    from srj.problems import ProblemInstance
    from srj.schemes import generate_cjm_scheme
    p = ProblemInstance(A=A, b=np.array([8.0]), x0=np.array([0.0]),
                        stopping_norm="absolute_l2")
    controllers = (Heuristic(), Increasing(), FixedM(2), Jacobi(),
                   Cjm(generate_cjm_scheme(1, -0.5, 0.5)))
    for controller in controllers:
        rep = solve(p, controller, stopping(tol=2.5))
        assert rep.converged and rep.total_iterations <= 2
    rep = solve(p, Jacobi(), stopping(tol=1e-12))
    assert rep.converged and rep.total_iterations <= 2


def test_heuristic_reproduces_level_alternation():
    p = poisson_1d(100)
    rep = solve(p, Heuristic(), stopping(tol=1e-7))
    assert rep.converged
    assert rep.total_iterations <= 1500
    levels = [c.level for c in rep.cycles]
    tail = levels[len(levels) // 2:]
    assert set(tail) <= {10, 11}


def test_heuristic_beats_increasing_on_n100():
    p = poisson_1d(100)
    rep_h = solve(p, Heuristic(), stopping(tol=1e-7), record_history=False)
    rep_i = solve(p, Increasing(), stopping(tol=1e-7), record_history=False)
    assert rep_h.converged and rep_i.converged
    assert rep_i.total_iterations >= 2 * rep_h.total_iterations


def test_fixed_controller_ratio_approaches_spectral_radius():
    p = poisson_1d(24)
    M = 5
    rho = float(np.max(np.abs(amplification_eval(M, dense_jacobi_eigenvalues(p.A)))))
    rep = solve(p, FixedM(M), StoppingRule(norm="absolute_l2", tolerance=1e-300,
                                           max_iterations=14 * M))
    ratios = [c.ratio for c in rep.cycles]
    # after a transient the per-cycle ratio settles at rho(B_SRJ)
    assert ratios[-1] == pytest.approx(rho, rel=0.05)


def test_jacobi_controller_is_plain_jacobi():
    p = poisson_1d(12)
    rep = solve(p, Jacobi(), stopping(tol=1e-6))
    assert rep.converged
    assert all(c.M == 1 for c in rep.cycles)
    # matches a hand-rolled unweighted Jacobi loop
    x = p.x0.copy()
    for _ in range(rep.total_iterations):
        x = x + (p.b - matvec(p.A, x)) * p.A.inv_diag
    assert rep.x == pytest.approx(x, abs=1e-12)


def test_jacobi_monotone_after_transient():
    p = poisson_1d(30)
    rep = solve(p, Jacobi(), stopping(tol=1e-5))
    res = [r for _, r in rep.residual_history]
    tail = res[5:]
    assert all(b <= a * (1.0 + 1e-12) for a, b in zip(tail, tail[1:]))


def test_cjm_controller_uses_supplied_scheme():
    from srj.schemes import generate_cjm_scheme
    p = poisson_1d(40)
    lo, hi = p.cjm_bounds
    scheme = generate_cjm_scheme(20, lo, hi)
    rep = solve(p, Cjm(scheme), stopping(tol=1e-7))
    assert rep.converged
    assert all(c.M == 20 for c in rep.cycles)


def test_increasing_clamps_at_top_level():
    p = poisson_1d(4)
    rep = solve(p, Increasing(), StoppingRule(norm="absolute_l2", tolerance=1e-300,
                                              max_iterations=40))
    levels = [c.level for c in rep.cycles]
    assert levels[:5] == [0, 1, 2, 3, 4]
    assert not rep.converged  # budget exhausted, reported honestly


def test_max_iterations_reported_not_converged():
    p = poisson_1d(100)
    rep = solve(p, Jacobi(), stopping(tol=1e-7, max_iters=50))
    assert not rep.converged
    assert rep.total_iterations == 50


def test_solve_is_deterministic():
    p = poisson_1d(60)
    a = solve(p, Heuristic(), stopping(tol=1e-7))
    b = solve(p, Heuristic(), stopping(tol=1e-7))
    assert a.total_iterations == b.total_iterations
    assert a.x == pytest.approx(b.x, abs=0.0)
    assert [c.residual_after for c in a.cycles] == [c.residual_after for c in b.cycles]


def test_early_exit_never_reports_above_tolerance():
    p = poisson_1d(80)
    tol = 1e-6
    rep = solve(p, Heuristic(), stopping(tol=tol))
    assert rep.converged
    final_res = float(np.linalg.norm(p.b - matvec(p.A, rep.x)))
    assert final_res <= tol


def test_diff_norm_solve_tracks_iterate_changes():
    p = laplace_2d_neumann(8, seed=3)
    rule = StoppingRule(norm="solution_diff_inf", tolerance=1e-8, max_iterations=50000)
    rep = solve(p, Heuristic(), rule)
    assert rep.converged
    iters, residuals = zip(*rep.residual_history)
    assert len(set(iters)) == len(iters)
    assert residuals[-1] <= 1e-8


def test_relative_norm_uses_initial_residual_baseline():
    p = poisson_1d(20)
    rule = StoppingRule(norm="relative_l2", tolerance=1e-8, max_iterations=10000)
    rep = solve(p, Heuristic(), rule)
    assert rep.converged
    r_abs = float(np.linalg.norm(p.b - matvec(p.A, rep.x)))
    r0 = float(np.linalg.norm(p.b))
    assert r_abs / r0 <= 1e-8
