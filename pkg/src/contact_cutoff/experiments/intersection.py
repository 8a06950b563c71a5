"""Two independent processes on one graph: do they meet?

The process from ``u`` runs to ``t2`` and the one from ``v`` to ``t1``; both
are cover-tree constructions labeled from a shared half-edge pool.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grow_explore import run_independent_pair
from ..parallel import map_replicas
from ..seeding import replica_rng
from .common import distinct_pair
from .config import ExperimentConfig
from .stats import proportion

EXPERIMENT = "intersect"


def _pair_job(args):
    seed, n, index, d, lam, t1, t2, order = args
    rng = replica_rng(seed, f"{EXPERIMENT}-{n}", index)
    u, v = distinct_pair(n, rng)
    pr = run_independent_pair(n, d, lam, u, v, t2, t1, rng, order=order, grid_step=0, complete=False)
    return {
        "n": n, "replica": index, "u": u, "v": v,
        "alive_u": pr.alive_u, "alive_v": pr.alive_v, "intersect": pr.intersect,
        "size_u": int(pr.final_u.size), "size_v": int(pr.final_v.size),
        "duplicate_label": pr.duplicate_label, "label_overlap": pr.label_overlap,
    }


def pair_samples(cfg: ExperimentConfig, n: int, t1: float, t2: float, order: str = "uv",
                 replicas: int | None = None) -> list[dict]:
    R = cfg.replicas if replicas is None else replicas
    jobs = [(cfg.seed, n, i, cfg.d, cfg.lam, float(t1), float(t2), order) for i in range(R)]
    return map_replicas(_pair_job, jobs, cfg.workers)


@dataclass
class IntersectionReport:
    rows: list
    replicas: list
    config: dict

    def summary_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            flat = {k: v for k, v in r.items() if not isinstance(v, dict)}
            for key in ("intersect", "both_alive", "intersect_given_alive", "good_labeling"):
                if r.get(key) is not None:
                    flat[f"{key}_p"] = r[key]["estimate"]
                    flat[f"{key}_se"] = r[key]["se"]
            out.append(flat)
        return out

    def as_dict(self) -> dict:
        return {"config": self.config, "per_n": self.rows}


def summarize_pairs(n, res, t1, t2, p_hat) -> dict:
    R = len(res)
    inter = np.array([r["intersect"] for r in res], dtype=bool)
    alive = np.array([r["alive_u"] and r["alive_v"] for r in res], dtype=bool)
    good = np.array([not (r["duplicate_label"] or r["label_overlap"]) for r in res], dtype=bool)
    row = {
        "n": n, "t1": t1, "t2": t2, "replicas": R,
        "intersect": proportion(int(inter.sum()), R),
        "both_alive": proportion(int(alive.sum()), R),
        "intersect_given_alive": proportion(int(inter[alive].sum()), int(alive.sum())) if alive.any() else None,
        "good_labeling": proportion(int(good.sum()), R),
    }
    if p_hat is not None:
        row["p_hat_squared"] = p_hat**2
    return row


def intersection_experiment(cfg: ExperimentConfig) -> IntersectionReport:
    cfg.require_cutoff_eps()
    cfg.require_constants()
    rows, per_replica = [], []
    for n in cfg.n:
        t1, t2 = cfg.t_pair(n)
        res = pair_samples(cfg, n, t1, t2)
        per_replica.extend(res)
        rows.append(summarize_pairs(n, res, t1, t2, cfg.p_hat))
    return IntersectionReport(rows, per_replica, cfg.to_dict())
