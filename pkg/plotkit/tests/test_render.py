import math

import pytest

from plotkit.cli import main
from plotkit.render import MissingColumnError, PlotJob, read_table, render


def write_trace(path, n=40, decay=0.7, label=1.0):
    lines = ["# schema=1", "iteration,residual"]
    for i in range(1, n + 1):
        lines.append(f"{i},{label * decay**i:.17g}")
    path.write_text("\n".join(lines) + "\n")


def write_bench(path):
    lines = ["# schema=1", "size,controller,rep,iterations,converged,seconds"]
    for size in (50, 100, 200):
        for controller, factor in (("heuristic", 3), ("jacobi", 40)):
            for rep in (0, 1):
                iters = int(factor * math.sqrt(size) * (1 + 0.1 * rep))
                lines.append(f"{size},{controller},{rep},{iters},1,0.01")
    path.write_text("\n".join(lines) + "\n")


def write_clusters(path):
    lines = ["# schema=1",
             "level,mean_ratio,best_action,increase_mean,increase_ci,increase_count,"
             "keep_mean,keep_ci,keep_count,decrease_mean,decrease_ci,decrease_count"]
    rows = [(0, 0.9, "increase"), (1, 0.85, "increase"), (2, 0.3, "decrease"),
            (3, 0.1, "keep"), (4, 0.5, "inconclusive"), (5, 0.15, "keep")]
    for level, ratio, action in rows:
        lines.append(f"{level},{ratio},{action},1,0.1,10,0.5,0.1,10,0.4,0.1,10")
    path.write_text("\n".join(lines) + "\n")


def test_convergence_plot(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace(a, decay=0.7)
    write_trace(b, decay=0.9)
    out = tmp_path / "conv.png"
    render(PlotJob(kind="convergence", inputs=[str(a), str(b)], output=str(out)))
    assert out.exists() and out.stat().st_size > 1000


def test_scaling_plot_two_series(tmp_path):
    bench = tmp_path / "bench.csv"
    write_bench(bench)
    out = tmp_path / "scaling.png"
    render(PlotJob(kind="scaling", inputs=[str(bench)], output=str(out)))
    assert out.exists() and out.stat().st_size > 1000


def test_action_map_plot(tmp_path):
    clusters = tmp_path / "clusters.csv"
    write_clusters(clusters)
    out = tmp_path / "map.png"
    render(PlotJob(kind="action_map", inputs=[str(clusters)], output=str(out)))
    assert out.exists() and out.stat().st_size > 1000


def test_missing_column_is_reported(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=1\niteration,value\n1,0.5\n")
    with pytest.raises(MissingColumnError, match="residual"):
        render(PlotJob(kind="convergence", inputs=[str(bad)], output=str(tmp_path / "x.png")))


def test_schema_marker_enforced(tmp_path):
    bad = tmp_path / "noschema.csv"
    bad.write_text("iteration,residual\n1,0.5\n")
    with pytest.raises(ValueError, match="schema"):
        read_table(str(bad))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="kind"):
        PlotJob(kind="pie", inputs=["x.csv"], output="out.png")


def test_cli_renders_and_exit_codes(tmp_path):
    trace = tmp_path / "t.csv"
    write_trace(trace)
    out = tmp_path / "out.png"
    assert main(["convergence", str(trace), "-o", str(out)]) == 0
    assert out.exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=1\niteration,value\n1,0.5\n")
    assert main(["convergence", str(bad), "-o", str(tmp_path / "y.png")]) == 3
    assert main(["convergence", str(tmp_path / "absent.csv"),
                 "-o", str(tmp_path / "z.png")]) == 1
    assert main(["nope", str(trace), "-o", str(out)]) == 1


def test_cli_custom_labels(tmp_path):
    a = tmp_path / "a.csv"
    write_trace(a)
    out = tmp_path / "labeled.png"
    assert main(["convergence", str(a), "-o", str(out), "--labels", "run-1",
                 "--title", "residual history"]) == 0
    assert out.exists()
