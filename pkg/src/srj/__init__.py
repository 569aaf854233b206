"""Scheduled Relaxation Jacobi solver toolkit.

Chebyshev-derived relaxation schedules for symmetric linear systems, an
adaptive data-driven scheme-level controller, problem generators for the
benchmark suite, and tooling to re-collect the convergence data the
controller's thresholds come from.
"""

from .chebyshev import (AmplificationPolynomial, amplification_eval, amplification_poly,
                        cheb_eval, cheb_roots, lambda_max, lambda_star)
from .problems import (Mesh, ProblemInstance, assemble_fem_poisson, laplace_2d_neumann,
                       perturbed_mesh, poisson_1d, poisson_3d, random_tridiagonal,
                       read_mesh, write_mesh)
from .schemes import (LEVEL_TABLE_M, MAX_LEVEL, SchemeLevelTable, SrjScheme,
                      build_level_table, generate_cjm_scheme, generate_srj_scheme,
                      order_for_stability, scheme_for_level, stiffness_slope)
from .solver import (Cjm, Controller, FixedM, Heuristic, Increasing, Jacobi,
                     SolveDivergedError, SolveReport, SolverState, StoppingRule,
                     asymptotic_rate, average_convergence_rate, heuristic_next_level,
                     run_cycle, solve)
from .sparse import (SparseMatrix, dense_jacobi_eigenvalues, diff_inf, matvec,
                     read_matrix_market, relative_residual_l2, residual_l2,
                     weighted_jacobi_sweep, write_matrix_market)

__version__ = "0.1.0"
