"""Render figure analogues from the solver toolkit's schema=1 CSV files.

Three plot kinds: residual-vs-iteration convergence curves (log y),
iterations-vs-size scaling curves (log-log), and the best-action map in
previous-ratio vs level space.  Files in, raster image out; no coupling to
the solver package beyond the documented CSV columns.
"""

from __future__ import annotations

import pathlib
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SCHEMA_LINE = "# schema=1"

PLOT_KINDS = ("convergence", "scaling", "action_map")

ACTION_COLORS = {"increase": "tab:red", "keep": "tab:blue", "decrease": "tab:green"}


class MissingColumnError(ValueError):
    def __init__(self, path: str, column: str):
        super().__init__(f"{path}: missing column '{column}'")
        self.column = column


@dataclass
class PlotJob:
    kind: str
    inputs: list[str]
    output: str
    title: str = ""
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind '{self.kind}'")
        if not self.inputs:
            raise ValueError("need at least one input CSV")


def read_table(path: str) -> dict[str, list[str]]:
    """Read a schema=1 CSV into named columns of raw strings."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise ValueError(f"{path}: missing '{SCHEMA_LINE}' marker")
    body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    if not body:
        raise ValueError(f"{path}: no header line")
    header = body[0].split(",")
    columns: dict[str, list[str]] = {name: [] for name in header}
    for ln in body[1:]:
        for name, value in zip(header, ln.split(",")):
            columns[name].append(value)
    return columns


def column(table: dict, path: str, name: str) -> list[str]:
    if name not in table:
        raise MissingColumnError(path, name)
    return table[name]


def _series_label(job: PlotJob, index: int, fallback: str) -> str:
    if index < len(job.labels):
        return job.labels[index]
    return fallback


def render(job: PlotJob) -> str:
    """Render the job and return the written image path."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if job.kind == "convergence":
        _render_convergence(job, ax)
    elif job.kind == "scaling":
        _render_scaling(job, ax)
    else:
        _render_action_map(job, ax)
    if job.title:
        ax.set_title(job.title)
    fig.tight_layout()
    fig.savefig(job.output, dpi=130)
    plt.close(fig)
    return job.output


def _render_convergence(job: PlotJob, ax) -> None:
    for i, path in enumerate(job.inputs):
        table = read_table(path)
        iterations = [int(v) for v in column(table, path, "iteration")]
        residuals = [float(v) for v in column(table, path, "residual")]
        ax.semilogy(iterations, residuals,
                    label=_series_label(job, i, pathlib.Path(path).stem))
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)


def _render_scaling(job: PlotJob, ax) -> None:
    series: dict[str, dict[float, list[float]]] = {}
    for path in job.inputs:
        table = read_table(path)
        sizes = column(table, path, "size")
        controllers = column(table, path, "controller")
        iterations = column(table, path, "iterations")
        for size, controller, iters in zip(sizes, controllers, iterations):
            series.setdefault(controller, {}).setdefault(float(size), []).append(
                float(iters))
    for i, (controller, by_size) in enumerate(sorted(series.items())):
        xs = sorted(by_size)
        ys = [sum(by_size[x]) / len(by_size[x]) for x in xs]  # mean over reps
        ax.loglog(xs, ys, marker="o", label=_series_label(job, i, controller))
    ax.set_xlabel("problem size N")
    ax.set_ylabel("iterations to converge")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)


def _render_action_map(job: PlotJob, ax) -> None:
    plotted = set()
    for path in job.inputs:
        table = read_table(path)
        levels = column(table, path, "level")
        ratios = column(table, path, "mean_ratio")
        actions = column(table, path, "best_action")
        for action in ACTION_COLORS:
            xs = [float(r) for r, a in zip(ratios, actions) if a == action]
            ys = [int(lv) for lv, a in zip(levels, actions) if a == action]
            if xs:
                ax.scatter(xs, ys, s=22, color=ACTION_COLORS[action],
                           label=action if action not in plotted else None)
                plotted.add(action)
    ax.set_xlabel("previous residual ratio")
    ax.set_ylabel("scheme level")
    ax.legend()
    ax.grid(True, alpha=0.3)
