"""Infection density at ``t+`` from full occupancy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..contact_engine import InfectionState, run_until
from ..parallel import map_replicas
from ..regular_graph import Multigraph
from ..seeding import replica_rng
from .common import sample_graph
from .config import QUENCHED, ExperimentConfig
from .stats import mean_ci, proportion, quantiles

EXPERIMENT = "density"


def _density_job(args):
    seed, n, index, d, lam, horizon, simple, partner = args
    rng = replica_rng(seed, f"{EXPERIMENT}-{n}", index)
    g = Multigraph(n, d, partner) if partner is not None else sample_graph(n, d, rng, simple)
    res = run_until(g, lam, (), horizon, rng=rng, grid_step=0, state=InfectionState.full(n))
    return {"n": n, "replica": index, "infected": res.state.count, "density": res.state.count / n}


@dataclass
class DensityReport:
    rows: list
    replicas: list
    config: dict

    def summary_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            flat = {k: v for k, v in r.items() if not isinstance(v, dict)}
            flat["density_mean"] = r["density"]["mean"]
            flat["density_se"] = r["density"]["se"]
            flat["density_ci_lo"], flat["density_ci_hi"] = r["density"]["ci"]
            if "within_delta" in r:
                flat["within_delta_frac"] = r["within_delta"]["estimate"]
                flat["within_delta_se"] = r["within_delta"]["se"]
            out.append(flat)
        return out

    def as_dict(self) -> dict:
        return {"config": self.config, "per_n": self.rows}


def density_experiment(cfg: ExperimentConfig, horizon: float | None = None) -> DensityReport:
    """Density ``|xi_{t+}| / n`` started from every vertex infected.

    ``horizon`` overrides ``t+`` (which needs ``c_hat``).
    """
    if horizon is None:
        cfg.require_constants()
    rows, per_replica = [], []
    for n in cfg.n:
        tp = cfg.t_plus(n) if horizon is None else float(horizon)
        partner = None
        if cfg.mode == QUENCHED:
            partner = sample_graph(n, cfg.d, replica_rng(cfg.seed, f"{EXPERIMENT}-graph", n), cfg.simple).partner
        jobs = [(cfg.seed, n, i, cfg.d, cfg.lam, tp, cfg.simple, partner) for i in range(cfg.replicas)]
        res = map_replicas(_density_job, jobs, cfg.workers)
        per_replica.extend(res)
        dens = np.array([r["density"] for r in res])
        alive = dens > 0
        row = {"n": n, "t_plus": tp, "replicas": len(res), "mode": cfg.mode,
               "density": mean_ci(dens), "density_quantiles": quantiles(dens),
               "survived": proportion(int(alive.sum()), len(res)),
               "density_given_survival": mean_ci(dens[alive]) if alive.any() else None}
        if cfg.p_hat is not None:
            row["p_hat"] = cfg.p_hat
            row["delta"] = cfg.delta
            row["within_delta"] = proportion(int((np.abs(dens - cfg.p_hat) <= cfg.delta).sum()), len(res))
        rows.append(row)
    return DensityReport(rows, per_replica, cfg.to_dict())
