"""Command-line front end: scheme generation, solves, benchmarks, data
collection, and threshold fitting, all emitting versioned CSV.

Exit codes: 0 success (solves: converged), 2 solve hit the iteration budget,
1 usage or I/O error.  `SRJ_SEED` provides the seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import datacollect
from .csvio import fmt, write_csv
from .problems import (ProblemInstance, assemble_fem_poisson, laplace_2d_neumann,
                       poisson_1d, poisson_3d, random_tridiagonal, read_mesh)
from .schemes import (LEVEL_TABLE_M, MAX_LEVEL, generate_cjm_scheme,
                      generate_srj_scheme, scheme_for_level)
from .solver import (Cjm, FixedM, Heuristic, Increasing, Jacobi, SolveDivergedError,
                     SolveReport, StoppingRule, solve)

REPORT_HEADER = ["cycle", "level", "M", "res_before", "res_after", "avg_rate", "cum_iters"]
BENCH_HEADER = ["size", "controller", "rep", "iterations", "converged", "seconds"]


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def default_seed(value) -> int:
    if value is not None:
        return value
    return int(os.environ.get("SRJ_SEED", "0"))


def parse_problem(spec: str, seed: int) -> ProblemInstance:
    family, _, arg = spec.partition(":")
    if not arg:
        raise CliError(f"problem '{spec}' needs a size or path, e.g. poisson1d:100")
    try:
        if family == "poisson1d":
            return poisson_1d(int(arg))
        if family == "tridiag":
            return random_tridiagonal(int(arg), seed)
        if family == "laplace2d":
            return laplace_2d_neumann(int(arg), seed)
        if family == "poisson3d":
            return poisson_3d(int(arg))
        if family == "mesh":
            return assemble_fem_poisson(read_mesh(arg))
    except (ValueError, OSError) as exc:
        raise CliError(f"cannot build problem '{spec}': {exc}") from exc
    raise CliError(f"unknown problem family '{family}'")


def parse_controller(spec: str, problem: ProblemInstance, thresholds=None):
    name, _, arg = spec.partition(":")
    if name == "heuristic":
        if thresholds is not None:
            return Heuristic(t_hi=thresholds[0], t_lo=thresholds[1])
        return Heuristic()
    if name == "increasing":
        return Increasing()
    if name == "jacobi":
        return Jacobi()
    if name == "fixed":
        if not arg:
            raise CliError("controller fixed needs a length, e.g. fixed:47")
        return FixedM(int(arg))
    if name == "cjm":
        if not arg:
            raise CliError("controller cjm needs a length, e.g. cjm:64")
        if problem.cjm_bounds is None:
            raise CliError("problem supplies no eigenvalue bounds for a cjm scheme")
        lo, hi = problem.cjm_bounds
        return Cjm(generate_cjm_scheme(int(arg), lo, hi))
    raise CliError(f"unknown controller '{spec}'")


def write_report_csv(fh, report: SolveReport) -> None:
    rows = []
    cum = 0
    for stats in report.cycles:
        cum += stats.executed
        rows.append([stats.cycle, stats.level, stats.M, stats.residual_before,
                     stats.residual_after, stats.average_rate, cum])
    rows.append(["total", "", "", "", "", "", report.total_iterations])
    write_csv(fh, REPORT_HEADER, rows,
              comments=[f"converged={1 if report.converged else 0}"])


def write_trace_csv(fh, report: SolveReport) -> None:
    write_csv(fh, ["iteration", "residual"], report.residual_history)


# ---------------------------------------------------------------- subcommands

def cmd_scheme(args) -> int:
    if (args.M is None) == (args.level is None):
        raise CliError("pass exactly one of M or --level")
    if args.level is not None:
        if not 0 <= args.level <= MAX_LEVEL:
            raise CliError(f"level must be in 0..{MAX_LEVEL}")
        scheme = scheme_for_level(args.level, args.grid)
    else:
        if args.M < 1:
            raise CliError("M must be a positive integer")
        scheme = generate_srj_scheme(args.M, args.grid)
    position = {j: k for k, j in enumerate(scheme.application_order)}
    rows = [[j, w, position[j]] for j, w in enumerate(scheme.omegas)]
    write_csv(sys.stdout, ["index", "omega", "order_position"], rows)
    return 0


def cmd_levels(args) -> int:
    write_csv(sys.stdout, ["level", "M"], list(enumerate(LEVEL_TABLE_M)))
    return 0


def cmd_solve(args) -> int:
    seed = default_seed(args.seed)
    problem = parse_problem(args.problem, seed)
    thresholds = None
    if args.thresholds:
        thresholds = datacollect.read_thresholds(args.thresholds)
    controller = parse_controller(args.controller, problem, thresholds)
    norm = args.norm or problem.stopping_norm
    rule = StoppingRule(norm=norm, tolerance=args.tol, max_iterations=args.max_iters)
    try:
        report = solve(problem, controller, rule)
    except SolveDivergedError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    write_report_csv(sys.stdout, report)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            write_trace_csv(fh, report)
    return 0 if report.converged else 2


def _bench_one(task):
    label, size, controller_spec, problem_spec, tol, norm, max_iters, seed = task
    problem = parse_problem(problem_spec, seed)
    if not isinstance(size, (int, float)):
        size = problem.n  # mesh problems are sized by their DOF count
    controller = parse_controller(controller_spec, problem)
    rule = StoppingRule(norm=norm or problem.stopping_norm, tolerance=tol,
                        max_iterations=max_iters)
    t0 = time.perf_counter()
    try:
        report = solve(problem, controller, rule, record_history=False)
        return (size, controller_spec, label, report.total_iterations,
                report.converged, time.perf_counter() - t0)
    except SolveDivergedError:
        return (size, controller_spec, label, max_iters, False, time.perf_counter() - t0)


def cmd_bench(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read bench spec: {exc}") from exc
    controllers = spec.get("controllers", [])
    if not controllers:
        raise CliError("bench spec needs a nonempty 'controllers' list")
    family = spec.get("problem")
    if family == "mesh":
        addresses = [(f"mesh:{path}", path) for path in spec.get("meshes", [])]
    else:
        addresses = [(f"{family}:{size}", size) for size in spec.get("sizes", [])]
    if not addresses:
        raise CliError("bench spec needs 'sizes' (or 'meshes' for problem=mesh)")
    tol = float(spec.get("tol", 1e-7))
    max_iters = int(spec.get("max_iters", 200_000))
    reps = int(spec.get("reps", 1))
    seed = int(spec.get("seed", default_seed(None)))
    norm = spec.get("norm")
    tasks = []
    for address, size in addresses:
        for controller_spec in controllers:
            for rep in range(reps):
                tasks.append((rep, size, controller_spec, address, tol, norm,
                              max_iters, seed + rep))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]
    results.sort(key=lambda r: (str(r[0]), r[1], r[2]))
    rows = [[size, ctrl, rep, iters, conv, secs]
            for size, ctrl, rep, iters, conv, secs in results]
    out = spec.get("out")
    if args.output:
        out = args.output
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            write_csv(fh, BENCH_HEADER, rows)
    else:
        write_csv(sys.stdout, BENCH_HEADER, rows)
    return 0


def cmd_collect(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if not sizes:
        raise CliError("--sizes needs a comma-separated list, e.g. 10,50,100")
    seed = default_seed(args.seed)
    if args.points is not None:
        points = datacollect.collect_until(sizes, args.points, args.tol, seed)
    else:
        points = datacollect.collect(sizes, args.trials_per_size, args.tol, seed)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            datacollect.write_points_csv(fh, points)
    else:
        datacollect.write_points_csv(sys.stdout, points)
    return 0


def cmd_fit(args) -> int:
    try:
        points = datacollect.read_points_csv(args.points)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read points: {exc}") from exc
    if not points:
        raise CliError("no data points to fit")
    clusters = datacollect.aggregate(points, n_set=args.n_set, confidence=args.confidence)
    if args.clusters:
        with open(args.clusters, "w", encoding="utf-8") as fh:
            datacollect.write_clusters_csv(fh, clusters)
    try:
        t_hi, t_lo = datacollect.fit_thresholds(clusters)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.output:
        datacollect.write_thresholds(args.output, t_hi, t_lo)
    else:
        sys.stdout.write(f"t_hi={fmt(t_hi)}\nt_lo={fmt(t_lo)}\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="srj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scheme", help="print the relaxation factors of one scheme")
    p.add_argument("M", nargs="?", type=int, default=None)
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--grid", type=int, default=512)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("levels", help="print the level ladder")
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("solve", help="solve one problem instance")
    p.add_argument("--problem", required=True)
    p.add_argument("--controller", default="heuristic")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--norm", choices=["absolute_l2", "relative_l2", "solution_diff_inf"],
                   default=None)
    p.add_argument("--thresholds", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark spec (JSON)")
    p.add_argument("spec")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("collect", help="collect convergence data points")
    p.add_argument("--sizes", default="10,50,100")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--trials-per-size", type=int, default=10)
    p.add_argument("--tol", type=float, default=datacollect.DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("fit", help="fit level-selection thresholds from points")
    p.add_argument("points")
    p.add_argument("--n-set", type=int, default=datacollect.DEFAULT_N_SET)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--clusters", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
