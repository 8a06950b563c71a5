"""Good-pair and good-vertex census on one fixed small graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..contact_engine import ensemble_snapshots
from ..errors import ConfigError
from ..parallel import map_replicas
from ..regular_graph import Multigraph
from ..seeding import replica_rng
from .common import sample_graph
from .config import ExperimentConfig

EXPERIMENT = "census"
MAX_CENSUS_N = 200


def _source_job(args):
    seed, n, d, partner, lam, horizon, u, R = args
    g = Multigraph(n, d, partner)
    snaps = ensemble_snapshots(g, lam, [u], [horizon], R, replica_rng(seed, f"{EXPERIMENT}-{n}", u))
    return snaps[:, 0, :]


def classify(P: np.ndarray, threshold: float, g: float) -> tuple[float, float]:
    """Good-pair and good-vertex fractions for hit-probability matrix ``P``.

    A pair ``u != v`` is good when ``P[u, v] >= threshold`` and some hit was
    observed; a vertex is good when at least ``(1 - g**0.25)(n-1)`` of its
    pairs are good.
    """
    n = P.shape[0]
    off = ~np.eye(n, dtype=bool)
    good = (P >= threshold) & (P > 0) & off
    pair_frac = good.sum() / (n * (n - 1))
    per_u = good.sum(axis=1)
    vert_frac = float(np.mean(per_u >= (1 - g**0.25) * (n - 1) - 1e-9))
    return float(pair_frac), vert_frac


@dataclass
class CensusReport:
    n: int
    t_plus: float
    replicas: int
    rows: list
    hit_matrix: np.ndarray
    survival: np.ndarray
    config: dict

    def monotone(self) -> bool:
        """Good-pair fraction is non-increasing in the threshold level."""
        rows = sorted(self.rows, key=lambda r: r["threshold"])
        fr = [r["good_pair_fraction"] for r in rows]
        return all(b <= a + 1e-12 for a, b in zip(fr, fr[1:]))

    def as_dict(self) -> dict:
        return {"config": self.config, "n": self.n, "t_plus": self.t_plus,
                "replicas": self.replicas, "thresholds": self.rows,
                "mean_survival": float(self.survival.mean()), "monotone": self.monotone()}


def good_pair_census(cfg: ExperimentConfig, n: int | None = None, horizon: float | None = None) -> CensusReport:
    n = int(cfg.n[0] if n is None else n)
    if n > MAX_CENSUS_N:
        raise ConfigError(f"census sweeps all pairs; n must be <= {MAX_CENSUS_N}")
    if horizon is None:
        cfg.require_constants()
        horizon = cfg.t_plus(n)
    p_hat = cfg.p_hat if cfg.p_hat is not None else 0.0
    G = sample_graph(n, cfg.d, replica_rng(cfg.seed, f"{EXPERIMENT}-graph", n), cfg.simple)
    R = cfg.census_replicas
    jobs = [(cfg.seed, n, cfg.d, G.partner, cfg.lam, float(horizon), u, R) for u in range(n)]
    snaps = np.stack(map_replicas(_source_job, jobs, cfg.workers))  # (n, R, n)
    P = snaps.mean(axis=1)
    survival = snaps.any(axis=2).mean(axis=1)
    brng = np.random.default_rng(np.random.SeedSequence([cfg.seed, n, 0xCE]))
    boots = []
    for _ in range(cfg.bootstrap):
        idx = brng.integers(0, R, R)
        boots.append(snaps[:, idx, :].mean(axis=1))
    rows = []
    for g in sorted(cfg.census_g):
        thr = (1 - g) * p_hat**2
        pf, vf = classify(P, thr, g)
        bp = np.array([classify(B, thr, g) for B in boots])
        rows.append({
            "g": g, "threshold": thr,
            "good_pair_fraction": pf, "good_vertex_fraction": vf,
            "good_pair_ci": [float(np.quantile(bp[:, 0], 0.025)), float(np.quantile(bp[:, 0], 0.975))],
            "good_vertex_ci": [float(np.quantile(bp[:, 1], 0.025)), float(np.quantile(bp[:, 1], 0.975))],
        })
    return CensusReport(n, float(horizon), R, rows, P, survival, cfg.to_dict())
