"""Convergence-data collection and the threshold fit behind the controller.

Trials solve the 1D Dirichlet Poisson problem under a random level-selection
policy.  At every step each admissible action's cycle is executed from a
snapshot of the same state, so all candidate rates share one (level,
previous-ratio) observation; the walk then follows one action chosen
uniformly at random.  Clustering the points by level and sorted previous
ratio, and keeping only clusters whose best action is separated at the
confidence level, recovers the two ratio thresholds used by the controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from .csvio import fmt, read_csv, write_csv
from .problems import poisson_1d
from .rng import SplitMix64, derive_seed
from .schemes import MAX_LEVEL, scheme_for_level
from .solver import SolverState, run_cycle

ACTIONS = ("increase", "keep", "decrease")
_ACTION_DELTA = {"increase": +1, "keep": 0, "decrease": -1}

DEFAULT_SIZES = (2, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400)
DEFAULT_TOL = 1e-8
DEFAULT_N_SET = 10_000
INCONCLUSIVE = "inconclusive"

_MAX_STEPS_PER_TRIAL = 10_000


@dataclass(frozen=True)
class DataPoint:
    action: str
    avg_rate: float
    level: int
    prev_ratio: float
    trial: int = 0
    step: int = 0
    # residuals retained so the rate can be recomputed independently
    res_before: float = math.nan
    res_after: float = math.nan


@dataclass(frozen=True)
class ActionStats:
    mean: float
    ci_halfwidth: float
    count: int


@dataclass(frozen=True)
class ClusterSummary:
    level_bucket: int
    mean_ratio: float
    best_action: str
    actions: dict[str, ActionStats]


class ThresholdFitError(ValueError):
    def __init__(self, message: str, violations: list[ClusterSummary]):
        super().__init__(message)
        self.violations = violations


def _admissible(level: int) -> tuple[str, ...]:
    acts = []
    if level < MAX_LEVEL:
        acts.append("increase")
    acts.append("keep")
    if level > 0:
        acts.append("decrease")
    return tuple(acts)


def _run_trial(N: int, trial: int, seed: int, target_tol: float) -> list[DataPoint]:
    problem = poisson_1d(N)
    A, b = problem.A, problem.b
    rng = SplitMix64(seed)
    state = SolverState(x=problem.x0.copy())
    state, _ = run_cycle(A, b, state, scheme_for_level(0), record_history=False)
    level = 0
    points: list[DataPoint] = []
    for step in range(1, _MAX_STEPS_PER_TRIAL + 1):
        if state.current_residual is not None and state.current_residual < target_tol:
            break
        prev_ratio = state.prev_residual_ratio
        if prev_ratio is None or not math.isfinite(prev_ratio):
            break
        actions = _admissible(level)
        outcomes = {}
        finite = True
        for action in actions:
            cand_level = level + _ACTION_DELTA[action]
            cand_state, stats = run_cycle(A, b, state, scheme_for_level(cand_level),
                                          record_history=False)
            if not math.isfinite(stats.average_rate):
                finite = False
                break
            outcomes[action] = (cand_state, stats)
            points.append(DataPoint(
                action=action, avg_rate=stats.average_rate, level=level,
                prev_ratio=prev_ratio, trial=trial, step=step,
                res_before=stats.residual_before, res_after=stats.residual_after,
            ))
        if not finite:
            # residual hit machine zero inside a candidate cycle; drop the
            # partially recorded step and stop the trial
            points = [p for p in points if not (p.trial == trial and p.step == step)]
            break
        chosen = actions[rng.randint(len(actions))]
        state, _ = outcomes[chosen]
        level = level + _ACTION_DELTA[chosen]
    return points


def collect(sizes, trials_per_size: int, target_tol: float = DEFAULT_TOL,
            seed: int = 0) -> list[DataPoint]:
    """Run `trials_per_size` random-policy trials on each problem size."""
    if not sizes:
        raise ValueError("need at least one problem size")
    points: list[DataPoint] = []
    trial = 0
    for si, N in enumerate(sizes):
        for t in range(trials_per_size):
            trial += 1
            points.extend(_run_trial(N, trial, derive_seed(seed, si, t), target_tol))
    return points


def collect_until(sizes, min_points: int, target_tol: float = DEFAULT_TOL,
                  seed: int = 0) -> list[DataPoint]:
    """Round-robin trials over the sizes until at least `min_points` exist."""
    if not sizes:
        raise ValueError("need at least one problem size")
    points: list[DataPoint] = []
    trial = 0
    round_idx = 0
    while len(points) < min_points:
        for si, N in enumerate(sizes):
            trial += 1
            points.extend(_run_trial(N, trial, derive_seed(seed, si, round_idx), target_tol))
        round_idx += 1
    return points


def _z_value(confidence: float) -> float:
    if confidence == 0.95:
        return 1.96
    return NormalDist().inv_cdf(0.5 * (1.0 + confidence))


def aggregate(points: list[DataPoint], n_set: int = DEFAULT_N_SET,
              confidence: float = 0.95) -> list[ClusterSummary]:
    """Cluster points by level and sorted previous ratio; pick best actions.

    Each level's points are sorted by previous ratio and chunked into
    consecutive clusters of `n_set` (a final partial chunk survives if it
    holds at least n_set/10 points).  A cluster's best action is the one with
    the highest mean rate, provided its confidence interval does not overlap
    any other action's; otherwise the cluster is inconclusive.
    """
    if not points:
        raise ValueError("no data points to aggregate")
    z = _z_value(confidence)
    clusters: list[ClusterSummary] = []
    levels = sorted({p.level for p in points})
    for level in levels:
        group = [p for p in points if p.level == level]
        # total order on points keeps chunking permutation-invariant
        group.sort(key=lambda p: (p.prev_ratio, p.avg_rate, p.action, p.trial, p.step))
        for start in range(0, len(group), n_set):
            chunk = group[start:start + n_set]
            if len(chunk) < n_set and len(chunk) < n_set / 10:
                continue
            clusters.append(_summarize(chunk, level, z))
    return clusters


def _summarize(chunk: list[DataPoint], level: int, z: float) -> ClusterSummary:
    stats: dict[str, ActionStats] = {}
    for action in ACTIONS:
        rates = [p.avg_rate for p in chunk if p.action == action]
        if not rates:
            continue
        k = len(rates)
        mean = sum(rates) / k
        if k >= 2:
            var = sum((r - mean) ** 2 for r in rates) / (k - 1)
            ci = z * math.sqrt(var / k)
        else:
            ci = math.inf
        stats[action] = ActionStats(mean=mean, ci_halfwidth=ci, count=k)
    mean_ratio = sum(p.prev_ratio for p in chunk) / len(chunk)
    best = INCONCLUSIVE
    if len(stats) >= 2:
        top = max(stats, key=lambda a: stats[a].mean)
        lo = stats[top].mean - stats[top].ci_halfwidth
        if all(lo > s.mean + s.ci_halfwidth for a, s in stats.items() if a != top):
            best = top
    return ClusterSummary(level_bucket=level, mean_ratio=mean_ratio,
                          best_action=best, actions=stats)


MAX_MISBANDED_FRACTION = 0.25


def fit_thresholds(clusters: list[ClusterSummary]) -> tuple[float, float]:
    """Midpoint thresholds between the ratio bands of conclusive clusters.

    The conclusive clusters must be ratio-ordered keep < decrease < increase.
    Convergence data contains a minority of clusters that genuinely defy the
    banding (a stiff transient can make raising the level pay off once even
    at a low ratio), so the band boundaries are placed to minimize the number
    of clusters on the wrong side; more than a quarter misbanded means the
    bands are not separable and is an error.  t_hi is the midpoint between
    the largest in-band decrease cluster and the smallest in-band increase
    cluster, t_lo the midpoint between the largest in-band keep and the
    smallest in-band decrease, which for perfectly ordered bands reduces to
    the midpoints of the two gaps.
    """
    conclusive = [c for c in clusters if c.best_action != INCONCLUSIVE]
    by_action = {a: [c for c in conclusive if c.best_action == a] for a in ACTIONS}
    for action, cs in by_action.items():
        if not cs:
            raise ValueError(f"no conclusive cluster labeled '{action}'")
    ordered = sorted(conclusive, key=lambda c: (c.mean_ratio, c.level_bucket))
    n = len(ordered)
    bands = {"keep": 0, "decrease": 1, "increase": 2}
    labels = [bands[c.best_action] for c in ordered]
    best = None
    best_any = None
    for i in range(n + 1):
        for j in range(i, n + 1):
            mis = (sum(1 for k in range(0, i) if labels[k] != 0)
                   + sum(1 for k in range(i, j) if labels[k] != 1)
                   + sum(1 for k in range(j, n) if labels[k] != 2))
            if best_any is None or (mis, i, j) < best_any:
                best_any = (mis, i, j)
            keeps = [c.mean_ratio for c in ordered[:i] if c.best_action == "keep"]
            decs = [c.mean_ratio for c in ordered[i:j] if c.best_action == "decrease"]
            incs = [c.mean_ratio for c in ordered[j:] if c.best_action == "increase"]
            if not (keeps and decs and incs):
                continue
            t_lo = 0.5 * (max(keeps) + min(decs))
            t_hi = 0.5 * (max(decs) + min(incs))
            margin = (min(decs) - max(keeps)) + (min(incs) - max(decs))
            cand = (mis, -margin, i, j, t_hi, t_lo)
            if best is None or cand < best:
                best = cand
    if best is None or best[0] > MAX_MISBANDED_FRACTION * n:
        mis, i, j = best_any if best is None else (best[0], best[2], best[3])
        misfits = ([c for c in ordered[:i] if c.best_action != "keep"]
                   + [c for c in ordered[i:j] if c.best_action != "decrease"]
                   + [c for c in ordered[j:] if c.best_action != "increase"])
        detail = ", ".join(
            f"(level={c.level_bucket}, ratio={c.mean_ratio:.4g}, best={c.best_action})"
            for c in misfits)
        raise ThresholdFitError(
            f"action bands are not ratio-ordered keep < decrease < increase "
            f"({mis}/{n} clusters misbanded): {detail}", misfits)
    return best[4], best[5]


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

POINTS_HEADER = ["trial", "step", "action", "avg_rate", "level", "prev_ratio"]
CLUSTERS_HEADER = ["level", "mean_ratio", "best_action"] + [
    f"{a}_{f}" for a in ACTIONS for f in ("mean", "ci", "count")]


def write_points_csv(fh, points: list[DataPoint]) -> None:
    rows = ((p.trial, p.step, p.action, p.avg_rate, p.level, p.prev_ratio)
            for p in points)
    write_csv(fh, POINTS_HEADER, rows)


def read_points_csv(path: str) -> list[DataPoint]:
    header, rows = read_csv(path)
    if header != POINTS_HEADER:
        raise ValueError(f"{path}: unexpected columns {header}")
    return [DataPoint(trial=int(r[0]), step=int(r[1]), action=r[2],
                      avg_rate=float(r[3]), level=int(r[4]), prev_ratio=float(r[5]))
            for r in rows]


def write_clusters_csv(fh, clusters: list[ClusterSummary]) -> None:
    rows = []
    for c in clusters:
        row = [c.level_bucket, c.mean_ratio, c.best_action]
        for action in ACTIONS:
            s = c.actions.get(action)
            row.extend([s.mean, s.ci_halfwidth, s.count] if s else ["", "", 0])
        rows.append(row)
    write_csv(fh, CLUSTERS_HEADER, rows)


def write_thresholds(path: str, t_hi: float, t_lo: float) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"t_hi={fmt(t_hi)}\n")
        fh.write(f"t_lo={fmt(t_lo)}\n")


def read_thresholds(path: str) -> tuple[float, float]:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            values[key.strip()] = float(val)
    if "t_hi" not in values or "t_lo" not in values:
        raise ValueError(f"{path}: expected t_hi= and t_lo= lines")
    return values["t_hi"], values["t_lo"]
