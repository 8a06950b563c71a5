"""Small statistical helpers shared by the experiment drivers."""
from __future__ import annotations

import numpy as np

from ..tree_process.estimators import wilson_interval

Z95 = 1.959963984540054


def proportion(k: int, n: int) -> dict:
    """Estimate, binomial SE and Wilson 95% interval of ``k`` successes in ``n``."""
    if n == 0:
        return {"estimate": float("nan"), "se": float("nan"), "ci": [float("nan")] * 2, "count": 0, "n": 0}
    p = k / n
    lo, hi = wilson_interval(k, n, Z95)
    return {
        "estimate": float(p),
        "se": float(np.sqrt(p * (1 - p) / n)),
        "ci": [float(lo), float(hi)],
        "count": int(k),
        "n": int(n),
    }


def mean_ci(x) -> dict:
    x = np.asarray(x, dtype=float)
    m = float(x.mean()) if x.size else float("nan")
    se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else float("nan")
    return {"mean": m, "se": se, "ci": [m - Z95 * se, m + Z95 * se], "n": int(x.size)}


def quantiles(x, qs=(0.1, 0.25, 0.5, 0.75, 0.9)) -> dict:
    """Empirical quantiles without interpolation, so infinite entries are allowed."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return {f"q{int(round(q * 100)):02d}": None for q in qs}
    vals = np.quantile(x, qs, method="inverted_cdf")
    vals = np.maximum.accumulate(vals)
    return {f"q{int(round(q * 100)):02d}": (float(v) if np.isfinite(v) else None) for q, v in zip(qs, vals)}


def iqr(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float("nan")
    q1, q3 = np.quantile(x, [0.25, 0.75])
    return float(q3 - q1)


def bootstrap_se(x, stat, rng: np.random.Generator, B: int = 200) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float("nan")
    vals = [stat(x[rng.integers(0, x.size, x.size)]) for _ in range(B)]
    return float(np.std(vals, ddof=1))
