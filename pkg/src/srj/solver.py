"""Cycle execution, level-selection controllers, and convergence metrics.

A solve proceeds in cycles; each cycle applies one scheme's factors in its
stability order, with the stopping rule evaluated after every sweep so a long
cycle can stop the moment the tolerance is met.  The residual ratio across a
cycle feeds the data-driven controller: ratios above t_hi raise the scheme
level, ratios between t_lo and t_hi lower it, anything else keeps it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .chebyshev import amplification_eval
from .problems import ABSOLUTE_L2, RELATIVE_L2, SOLUTION_DIFF_INF, ProblemInstance
from .schemes import (MAX_LEVEL, ORDER_GRID_SIZE, SrjScheme, generate_srj_scheme,
                      scheme_for_level)
from .sparse import SparseMatrix

T_HI_DEFAULT = 0.4
T_LO_DEFAULT = 0.2

JACOBI_SCHEME = SrjScheme(M=1, omegas=(1.0,), application_order=(0,))


@dataclass(frozen=True)
class StoppingRule:
    norm: str
    tolerance: float
    max_iterations: int

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class SolverState:
    x: np.ndarray
    level: int = 0
    prev_residual_ratio: float | None = None
    cycle_index: int = 0
    total_iterations: int = 0
    residual_history: list[tuple[int, float]] = field(default_factory=list)
    # residual of the current x in the active norm, when already measured
    current_residual: float | None = None
    # cached b - A x matching x (L2 norms only)
    cached_r: np.ndarray | None = None
    # set by run_cycle when the stopping rule was met
    converged: bool = False


@dataclass(frozen=True)
class CycleStats:
    cycle: int
    level: int
    M: int
    executed: int
    residual_before: float
    residual_after: float
    average_rate: float

    @property
    def ratio(self) -> float:
        return self.residual_after / self.residual_before


@dataclass
class SolveReport:
    converged: bool
    total_iterations: int
    cycles: list[CycleStats]
    wall_time: float
    x: np.ndarray
    residual_history: list[tuple[int, float]]


class SolveDivergedError(RuntimeError):
    """A sweep produced non-finite values (application-order failure)."""

    def __init__(self, diagnostics: dict):
        super().__init__(f"solve diverged: {diagnostics}")
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# Controllers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Heuristic:
    t_hi: float = T_HI_DEFAULT
    t_lo: float = T_LO_DEFAULT


@dataclass(frozen=True)
class Increasing:
    pass


@dataclass(frozen=True)
class FixedM:
    M: int


@dataclass(frozen=True)
class Jacobi:
    pass


@dataclass(frozen=True)
class Cjm:
    scheme: SrjScheme


Controller = Heuristic | Increasing | FixedM | Jacobi | Cjm


def heuristic_next_level(ratio: float, level: int,
                         t_hi: float = T_HI_DEFAULT,
                         t_lo: float = T_LO_DEFAULT) -> int:
    """Next scheme level given the previous cycle's residual ratio.

    ratio > t_hi raises the level, t_lo < ratio < t_hi lowers it, and
    anything else (including ratio exactly t_hi) keeps it; the result is
    clamped to the table range.
    """
    if ratio < 0.0:
        raise ValueError("residual ratio must be nonnegative")
    if ratio > t_hi:
        level = level + 1
    elif t_lo < ratio < t_hi:
        level = level - 1
    return min(max(level, 0), MAX_LEVEL)


def average_convergence_rate(r_before: float, r_after: float, M: int) -> float:
    """Per-iteration convergence rate over a cycle: -log(r_after/r_before)/M."""
    if r_before <= 0.0 or r_after <= 0.0:
        raise ValueError("residuals must be positive")
    if M < 1:
        raise ValueError("M must be positive")
    return -math.log(r_after / r_before) / M


EXACT_ANNIHILATION_RHO = 1e-14


def asymptotic_rate(jacobi_eigs, M: int) -> float:
    """-log(max |G_M(lam)|)/M over the given Jacobi eigenvalues.

    Returns math.inf (the exact-annihilation sentinel) when every eigenvalue
    sits on a root of the polynomial: the spectral radius is then zero up to
    roundoff (below EXACT_ANNIHILATION_RHO) and the rate is unbounded.
    """
    eigs = np.asarray(jacobi_eigs, dtype=float)
    if eigs.size == 0:
        raise ValueError("need at least one eigenvalue")
    if np.any(np.abs(eigs) > 1.0 + 1e-12):
        raise ValueError("Jacobi eigenvalues must lie in [-1, 1]")
    rho = float(np.max(np.abs(amplification_eval(M, eigs))))
    if rho <= EXACT_ANNIHILATION_RHO:
        return math.inf
    return -math.log(rho) / M


# ---------------------------------------------------------------------------
# Cycle execution
# ---------------------------------------------------------------------------

def run_cycle(A: SparseMatrix, b: np.ndarray, state: SolverState, scheme: SrjScheme,
              stopping: StoppingRule | None = None, baseline: float = 1.0,
              norm: str = ABSOLUTE_L2, record_history: bool = True,
              ) -> tuple[SolverState, CycleStats]:
    """Apply one scheme cycle and return the advanced state plus its stats.

    The input state is not modified.  With a stopping rule, the cycle exits
    early once the measured residual reaches tolerance or the sweep budget is
    exhausted; `baseline` divides L2 residuals for the relative norm.
    """
    if stopping is not None and norm != stopping.norm:
        norm = stopping.norm
    diff_norm = norm == SOLUTION_DIFF_INF
    order = scheme.application_order
    omegas = scheme.omegas
    inv_diag = A.inv_diag
    csr = A.scipy_csr()

    x = state.x
    history = list(state.residual_history) if record_history else state.residual_history
    executed = 0
    converged = False

    if diff_norm:
        res_now = state.current_residual
        res_before = res_now
        r_cache = None
    else:
        if state.cached_r is not None:
            r = state.cached_r
            res_now = state.current_residual
        else:
            r = b - csr.dot(x)
            res_now = float(np.linalg.norm(r)) / baseline
        res_before = res_now
        r_cache = r
        if record_history and not history:
            history.append((state.total_iterations, res_now))

    for idx in order:
        if stopping is not None:
            if res_now is not None and res_now <= stopping.tolerance:
                converged = True
                break
            if state.total_iterations + executed >= stopping.max_iterations:
                break
        w = omegas[idx]
        if diff_norm:
            r = b - csr.dot(x)
            x_new = x + w * (inv_diag * r)
            res_now = float(np.max(np.abs(x_new - x)))
            x = x_new
            executed += 1
        else:
            x = x + w * (inv_diag * r_cache)
            executed += 1
            r_cache = b - csr.dot(x)
            res_now = float(np.linalg.norm(r_cache)) / baseline
        if not np.isfinite(res_now) or not np.all(np.isfinite(x)):
            raise SolveDivergedError({
                "cycle": state.cycle_index, "sweep": executed, "omega": w,
                "level": scheme.level, "M": scheme.M,
            })
        if record_history:
            history.append((state.total_iterations + executed, res_now))
        if diff_norm and res_before is None:
            res_before = res_now

    res_after = res_now if res_now is not None else float("nan")
    if res_before is None:
        res_before = res_after
    if stopping is not None and res_now is not None and res_now <= stopping.tolerance:
        converged = True

    if executed > 0 and res_before > 0.0 and res_after > 0.0:
        rate = average_convergence_rate(res_before, res_after, executed)
        ratio = res_after / res_before
    else:
        rate = math.inf if executed > 0 else 0.0
        ratio = state.prev_residual_ratio

    stats = CycleStats(
        cycle=state.cycle_index, level=scheme.level if scheme.level is not None else -1,
        M=scheme.M, executed=executed,
        residual_before=res_before, residual_after=res_after, average_rate=rate,
    )
    new_state = SolverState(
        x=x, level=scheme.level if scheme.level is not None else state.level,
        prev_residual_ratio=ratio if executed > 0 else state.prev_residual_ratio,
        cycle_index=state.cycle_index + 1,
        total_iterations=state.total_iterations + executed,
        residual_history=history,
        current_residual=res_now,
        cached_r=None if diff_norm else r_cache,
        converged=converged,
    )
    return new_state, stats


def _next_scheme(controller: Controller, state: SolverState,
                 order_grid: int) -> SrjScheme:
    if isinstance(controller, (Heuristic, Increasing)):
        return scheme_for_level(state.level, order_grid)
    if isinstance(controller, FixedM):
        return generate_srj_scheme(controller.M, order_grid)
    if isinstance(controller, Jacobi):
        return JACOBI_SCHEME
    if isinstance(controller, Cjm):
        return controller.scheme
    raise TypeError(f"unknown controller {controller!r}")


def solve(problem: ProblemInstance, controller: Controller, stopping: StoppingRule,
          order_grid: int = ORDER_GRID_SIZE, record_history: bool = True) -> SolveReport:
    """Run a full solve under the given controller and stopping rule.

    Heuristic and increasing controllers start at level 0.  Returns a report
    whether or not the tolerance was reached; `converged` distinguishes the
    two (the iteration budget is the only other way out).
    """
    t0 = time.perf_counter()
    A, b = problem.A, problem.b
    baseline = 1.0
    if stopping.norm == RELATIVE_L2:
        r0 = b - A.scipy_csr().dot(problem.x0)
        baseline = float(np.linalg.norm(r0))
        if baseline == 0.0:
            raise ValueError("initial residual is zero; relative norm undefined")
    state = SolverState(x=problem.x0.copy(), level=0)
    cycles: list[CycleStats] = []
    converged = False
    while True:
        scheme = _next_scheme(controller, state, order_grid)
        state, stats = run_cycle(A, b, state, scheme, stopping=stopping,
                                 baseline=baseline, norm=stopping.norm,
                                 record_history=record_history)
        if stats.executed > 0:
            cycles.append(stats)
        if state.converged:
            converged = True
            break
        if state.total_iterations >= stopping.max_iterations:
            break
        if isinstance(controller, Heuristic):
            ratio = state.prev_residual_ratio
            if ratio is not None and math.isfinite(ratio):
                state.level = heuristic_next_level(ratio, state.level,
                                                   controller.t_hi, controller.t_lo)
        elif isinstance(controller, Increasing):
            state.level = min(state.level + 1, MAX_LEVEL)
    return SolveReport(
        converged=converged, total_iterations=state.total_iterations,
        cycles=cycles, wall_time=time.perf_counter() - t0,
        x=state.x, residual_history=state.residual_history,
    )
