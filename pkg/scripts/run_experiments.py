#!/usr/bin/env python3
"""Desk-scale reproduction of the benchmark experiments.

Writes the CSV inputs for every figure analogue under results/:

  convergence_*.csv      per-iteration residual traces (one per controller)
  scaling_*.csv          iterations vs problem size per controller
  points.csv             raw convergence data from the random-action walks
  clusters.csv           aggregated best-action clusters
  thresholds.txt         fitted level-selection thresholds

Run `python scripts/run_experiments.py` (add --quick to shrink the data
collection pass).  Figures render from these files with the plotkit package:
`plot convergence results/convergence_poisson1d_100_*.csv -o fig_convergence.png`.
"""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from srj.cli import main as srj_main  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parent.parent
RESULTS = ROOT / "results"


def run(*argv) -> int:
    print("  $ srj " + " ".join(argv), file=sys.stderr)
    code = srj_main(list(argv))
    if code not in (0, 2):  # 2 = budget exhausted, expected for capped jacobi
        raise SystemExit(f"command failed with exit {code}")
    return code


def convergence_traces():
    print("== convergence traces: 1D Poisson N=100")
    for controller in ("heuristic", "increasing", "jacobi", "cjm:63"):
        name = controller.replace(":", "")
        trace = RESULTS / f"convergence_poisson1d_100_{name}.csv"
        with open(RESULTS / f"report_poisson1d_100_{name}.csv", "w") as fh:
            stdout, sys.stdout = sys.stdout, fh
            try:
                run("solve", "--problem", "poisson1d:100", "--controller", controller,
                    "--tol", "1e-7", "--max-iters", "60000", "--trace", str(trace))
            finally:
                sys.stdout = stdout

    print("== convergence trace: 2D Laplace 64^2 (heuristic)")
    trace = RESULTS / "convergence_laplace2d_64_heuristic.csv"
    with open(RESULTS / "report_laplace2d_64_heuristic.csv", "w") as fh:
        stdout, sys.stdout = sys.stdout, fh
        try:
            run("solve", "--problem", "laplace2d:64", "--controller", "heuristic",
                "--tol", "1e-10", "--seed", "1", "--trace", str(trace))
        finally:
            sys.stdout = stdout


def scaling_benches(quick: bool):
    print("== scaling: 1D Poisson")
    spec = {
        "problem": "poisson1d",
        "sizes": [25, 50, 100, 200, 400] if quick else [25, 50, 100, 200, 400, 800],
        "controllers": ["heuristic", "increasing", "jacobi"],
        "tol": 1e-7, "max_iters": 1_000_000, "reps": 1, "seed": 0,
    }
    spec_path = RESULTS / "bench_poisson1d.json"
    spec_path.write_text(json.dumps(spec, indent=1))
    run("bench", str(spec_path), "-o", str(RESULTS / "scaling_poisson1d.csv"))

    print("== scaling: random tridiagonal (5 reps)")
    spec = {
        "problem": "tridiag",
        "sizes": [100, 200, 500] if quick else [100, 200, 500, 1000],
        "controllers": ["heuristic", "increasing", "jacobi"],
        "tol": 1e-7, "max_iters": 1_000_000, "reps": 5, "seed": 0,
    }
    spec_path = RESULTS / "bench_tridiag.json"
    spec_path.write_text(json.dumps(spec, indent=1))
    run("bench", str(spec_path), "-o", str(RESULTS / "scaling_tridiag.csv"))

    print("== scaling: FEM meshes")
    meshes = [str(ROOT / "assets" / f"{geom}{suffix}.mesh")
              for geom in ("disk", "plate_hole", "airfoil")
              for suffix in ("", "_med", "_fine")]
    spec = {
        "problem": "mesh", "meshes": meshes,
        "controllers": ["heuristic", "jacobi"],
        "tol": 1e-9, "max_iters": 1_000_000, "reps": 1, "seed": 0,
    }
    spec_path = RESULTS / "bench_meshes.json"
    spec_path.write_text(json.dumps(spec, indent=1))
    run("bench", str(spec_path), "-o", str(RESULTS / "scaling_meshes.csv"))

    print("== 3D Poisson 32^3: heuristic vs jacobi")
    spec = {
        "problem": "poisson3d", "sizes": [16, 24, 32],
        "controllers": ["heuristic", "jacobi"],
        "tol": 1e-8, "norm": "relative_l2", "max_iters": 1_000_000, "reps": 1, "seed": 0,
    }
    spec_path = RESULTS / "bench_poisson3d.json"
    spec_path.write_text(json.dumps(spec, indent=1))
    run("bench", str(spec_path), "-o", str(RESULTS / "scaling_poisson3d.csv"))


def data_collection(quick: bool):
    print("== data collection and threshold fit")
    points = str(RESULTS / "points.csv")
    target = "40000" if quick else "300000"
    run("collect", "--sizes", "10,50,100", "--points", target, "--seed", "7",
        "-o", points)
    run("fit", points, "--n-set", "500" if quick else "2000",
        "--clusters", str(RESULTS / "clusters.csv"),
        "-o", str(RESULTS / "thresholds.txt"))
    print("  thresholds:", (RESULTS / "thresholds.txt").read_text().strip().split())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes and data volumes")
    args = parser.parse_args()
    RESULTS.mkdir(exist_ok=True)
    convergence_traces()
    scaling_benches(args.quick)
    data_collection(args.quick)
    print(f"all outputs in {RESULTS}")


if __name__ == "__main__":
    main()
