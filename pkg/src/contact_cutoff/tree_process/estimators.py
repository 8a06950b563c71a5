"""Monte Carlo estimators for the tree growth rate and survival probability."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import EstimationError, PreconditionError
from ..parallel import map_replicas
from ..seeding import replica_rng
from .lazy_tree import (
    DEFAULT_MAX_NODES,
    FULL,
    SEVERED,
    ST_THRESHOLD,
    LazyTreeState,
    run_tree,
    tree_grid,
)

DEFAULT_BOOTSTRAP = 200


@dataclass(frozen=True)
class GrowthEstimate:
    c_hat: float
    c_se: float
    window: tuple
    r2: float
    replicas: int
    intercept: float

    def as_dict(self) -> dict:
        d = asdict(self)
        d["c_se"] = self.c_se
        d["window"] = list(self.window)
        return d


@dataclass(frozen=True)
class SurvivalEstimate:
    p_hat: float
    p_se: float
    threshold: int
    t_cap: float
    replicas: int

    def as_dict(self) -> dict:
        return asdict(self)


def _series_job(args):
    seed, experiment, index, d, lam, horizon, mode, grid_step, max_nodes = args
    run = run_tree(d, lam, horizon, mode, replica_rng(seed, experiment, index), grid_step, max_nodes)
    row = np.zeros(len(tree_grid(horizon, grid_step)), dtype=np.float64)
    row[: len(run.infected)] = run.infected
    return row


def tree_series(d, lam, replicas, horizon, *, mode=FULL, seed=0, grid_step=0.1,
                workers=1, max_nodes=DEFAULT_MAX_NODES, experiment="tree-series"):
    """Per-replica ``|xi_t|`` on the grid, shape ``(replicas, grid)``."""
    jobs = [(seed, experiment, i, d, lam, horizon, mode, grid_step, max_nodes) for i in range(replicas)]
    rows = map_replicas(_series_job, jobs, workers)
    return tree_grid(horizon, grid_step), np.array(rows)


def fit_log_mean(times: np.ndarray, mean: np.ndarray, window) -> tuple[float, float, float]:
    """Least-squares line through ``log(mean)`` on the window: ``(slope, intercept, r2)``."""
    lo, hi = window
    sel = (times >= lo - 1e-9) & (times <= hi + 1e-9)
    if sel.sum() < 2:
        raise EstimationError("fit window holds fewer than two grid points")
    m = mean[sel]
    if np.any(m <= 0):
        raise EstimationError("mean population is zero inside the fit window")
    t = times[sel]
    y = np.log(m)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))


def growth_from_series(times, series, window, *, bootstrap=DEFAULT_BOOTSTRAP, seed=0) -> GrowthEstimate:
    """Fit the growth rate from stored per-replica series; bootstrap the SE over replicas."""
    series = np.asarray(series, dtype=np.float64)
    R = series.shape[0]
    slope, intercept, r2 = fit_log_mean(times, series.mean(axis=0), window)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB007]))
    slopes = []
    for _ in range(bootstrap):
        w = rng.multinomial(R, np.full(R, 1.0 / R))
        try:
            slopes.append(fit_log_mean(times, w @ series / R, window)[0])
        except EstimationError:
            continue
    se = float(np.std(slopes, ddof=1)) if len(slopes) > 1 else float("nan")
    return GrowthEstimate(slope, se, (float(window[0]), float(window[1])), r2, R, intercept)


def estimate_growth_rate(d: int, lam: float, replicas: int, horizon: float, window=None, *,
                         mode: str = FULL, seed: int = 0, grid_step: float = 0.1,
                         workers: int = 1, bootstrap: int = DEFAULT_BOOTSTRAP,
                         max_nodes: int = DEFAULT_MAX_NODES) -> GrowthEstimate:
    """Slope of ``log E|xi_t|`` over ``window`` (default ``[horizon/2, horizon]``).

    Extinct replicas enter the mean as zeros.
    """
    if window is None:
        window = (horizon / 2.0, horizon)
    if not (0 <= window[0] < window[1] <= horizon + 1e-9):
        raise PreconditionError(f"window {window} not inside [0, {horizon}]")
    times, series = tree_series(d, lam, replicas, horizon, mode=mode, seed=seed,
                                grid_step=grid_step, workers=workers, max_nodes=max_nodes,
                                experiment=f"growth-{mode}")
    return growth_from_series(times, series, window, bootstrap=bootstrap, seed=seed)


def _survival_job(args):
    seed, experiment, index, d, lam, M, t_cap, mode, max_nodes = args
    state = LazyTreeState(d, mode, max_nodes=max_nodes)
    status, _ = state.advance(t_cap, lam, replica_rng(seed, experiment, index), stop_count=M)
    return status == ST_THRESHOLD


def survival_indicators(d, lam, replicas, threshold=1000, t_cap=50.0, *, mode=FULL, seed=0,
                        workers=1, max_nodes=DEFAULT_MAX_NODES, experiment=None) -> np.ndarray:
    if threshold < 1:
        raise PreconditionError("survival threshold must be at least 1")
    experiment = experiment or f"survival-{mode}"
    jobs = [(seed, experiment, i, d, lam, int(threshold), float(t_cap), mode, max_nodes)
            for i in range(replicas)]
    return np.array(map_replicas(_survival_job, jobs, workers), dtype=bool)


def estimate_survival_prob(d: int, lam: float, replicas: int, threshold: int = 1000,
                           t_cap: float = 50.0, *, mode: str = FULL, seed: int = 0,
                           workers: int = 1, max_nodes: int = DEFAULT_MAX_NODES) -> SurvivalEstimate:
    """Fraction of replicas whose infected count reaches ``threshold`` before
    extinction or ``t_cap``."""
    hits = survival_indicators(d, lam, replicas, threshold, t_cap, mode=mode, seed=seed,
                               workers=workers, max_nodes=max_nodes)
    p = float(hits.mean()) if replicas else 0.0
    se = float(np.sqrt(p * (1 - p) / replicas)) if replicas else float("nan")
    return SurvivalEstimate(p, se, int(threshold), float(t_cap), int(replicas))


@dataclass(frozen=True)
class TailCheck:
    times: np.ndarray
    frequency: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    se: np.ndarray
    thresholds: np.ndarray
    replicas: int


def wilson_interval(k, n, z=1.959963984540054):
    k = np.asarray(k, dtype=float)
    p = k / n
    denom = 1 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    # clamp rounding so the interval always contains p and stays in [0, 1]
    return np.clip(np.minimum(centre - half, p), 0, 1), np.clip(np.maximum(centre + half, p), 0, 1)


def _tail_job(args):
    seed, experiment, index, d, lam, times, max_nodes = args
    state = LazyTreeState(d, SEVERED, max_nodes=max_nodes)
    _, out = state.advance(float(times[-1]), lam, replica_rng(seed, experiment, index), grid=times)
    ever = np.full(len(times), out[-1, 1] if len(out) else 1, dtype=np.int64)
    ever[: len(out)] = out[:, 1]
    return ever


def tail_check(d: int, lam: float, replicas: int, times, delta: float, c_hat: float, *,
               seed: int = 0, workers: int = 1, max_nodes: int = DEFAULT_MAX_NODES) -> TailCheck:
    """Frequency of ``|union of eta_s, s <= t| >= exp((1+delta) c_hat t)`` on a grid of ``t``."""
    times = np.asarray(sorted(times), dtype=np.float64)
    jobs = [(seed, "tail-check", i, d, lam, times, max_nodes) for i in range(replicas)]
    ever = np.array(map_replicas(_tail_job, jobs, workers))
    thresholds = np.exp((1.0 + delta) * c_hat * times)
    exceed = (ever >= thresholds[None, :] - 1e-9).sum(axis=0)
    freq = exceed / replicas
    lo, hi = wilson_interval(exceed, replicas)
    se = np.sqrt(freq * (1 - freq) / replicas)
    return TailCheck(times, freq, lo, hi, se, thresholds, int(replicas))
