"""Hitting-time cutoff on random regular graphs.

For each ``n`` a uniform pair ``(u, v)`` is drawn per replica and the
process from ``u`` is followed to ``t+ = (1+eps) log n / c_hat``.  We record
the first time ``v`` is infected and whether ``v`` is infected at ``t+``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..contact_engine import run_until
from ..grow_explore import run_vanilla
from ..parallel import map_replicas
from ..regular_graph import Multigraph
from ..seeding import replica_rng
from .common import distinct_pair, sample_graph
from .config import QUENCHED, ExperimentConfig
from .stats import bootstrap_se, iqr, proportion, quantiles

EXPERIMENT = "cutoff"


def _hit(outcome) -> float:
    return outcome.hit_time if outcome.hit else np.inf


def _full_graph_pair(g, lam, u, v, horizon, rng):
    res = run_until(g, lam, [u], horizon, targets=[v], rng=rng, grid_step=0, stop_on_hit=False)
    return _hit(res.outcome), bool(res.state.is_infected[v])


def _cutoff_job(args):
    seed, n, index, d, lam, horizon, simple, engine_full, duality, partner = args
    rng = replica_rng(seed, f"{EXPERIMENT}-{n}", index)
    g = None if partner is None else Multigraph(n, d, partner)
    if g is None and engine_full:
        g = sample_graph(n, d, rng, simple)
    u, v = distinct_pair(n, rng)
    if g is not None:
        hit, occ = _full_graph_pair(g, lam, u, v, horizon, rng)
    else:
        run = run_vanilla(n, d, lam, [u], horizon, rng, targets=[v], grid_step=0,
                          condition_simple=simple)
        hit, occ = _hit(run.outcome), bool(run.state.infection.is_infected[v])
        g = run.graph
    row = {"n": n, "replica": index, "u": u, "v": v, "hit_time": hit, "occupied": occ}
    if duality:
        row["hit_time_swapped"], row["occupied_swapped"] = _full_graph_pair(g, lam, v, u, horizon, rng)
    return row


@dataclass
class CutoffReport:
    rows: list
    replicas: list
    config: dict

    def summary_rows(self) -> list[dict]:
        """One flat row per ``n`` for CSV output."""
        out = []
        for r in self.rows:
            flat = {k: v for k, v in r.items() if not isinstance(v, dict)}
            for key in ("hit_lower", "occupied_plus", "hit_plus"):
                flat[f"{key}_p"] = r[key]["estimate"]
                flat[f"{key}_se"] = r[key]["se"]
                flat[f"{key}_ci_lo"], flat[f"{key}_ci_hi"] = r[key]["ci"]
            for q, val in r["hit_quantiles"].items():
                flat[f"hit_{q}"] = val
            out.append(flat)
        return out

    def iqr_trend_ok(self, slack_sigma: float = 2.0) -> bool:
        """Normalized IQR non-increasing along the ``n`` grid, up to the slack."""
        rows = sorted(self.rows, key=lambda r: r["n"])
        for a, b in zip(rows, rows[1:]):
            s = np.hypot(a["normalized_iqr_se"], b["normalized_iqr_se"])
            if not b["normalized_iqr"] <= a["normalized_iqr"] + slack_sigma * s:
                return False
        return True

    def as_dict(self) -> dict:
        return {"config": self.config, "per_n": self.rows, "iqr_trend_ok": self.iqr_trend_ok()}


def cutoff_experiment(cfg: ExperimentConfig) -> CutoffReport:
    cfg.require_cutoff_eps()
    cfg.require_constants()
    rows, per_replica = [], []
    for n in cfg.n:
        tp, tm = cfg.t_plus(n), cfg.t_minus(n)
        engine_full = n <= cfg.engine_threshold or cfg.mode == QUENCHED
        partner = None
        if cfg.mode == QUENCHED:
            partner = sample_graph(n, cfg.d, replica_rng(cfg.seed, f"{EXPERIMENT}-graph", n), cfg.simple).partner
        jobs = [(cfg.seed, n, i, cfg.d, cfg.lam, tp, cfg.simple, engine_full, cfg.duality, partner)
                for i in range(cfg.replicas)]
        res = map_replicas(_cutoff_job, jobs, cfg.workers)
        per_replica.extend(res)
        rows.append(summarize_cutoff(n, res, cfg, tm, tp, "full" if engine_full else "grow_explore"))
    return CutoffReport(rows, per_replica, cfg.to_dict())


def summarize_cutoff(n, res, cfg: ExperimentConfig, tm, tp, engine) -> dict:
    R = len(res)
    hit = np.array([r["hit_time"] for r in res], dtype=float)
    occ = np.array([r["occupied"] for r in res], dtype=bool)
    scale = np.log(n) / cfg.c_hat
    hit_norm = hit[hit <= tp] / scale
    brng = np.random.default_rng(np.random.SeedSequence([cfg.seed, n, 0x10B]))
    row = {
        "n": n,
        "engine": engine,
        "mode": cfg.mode,
        "t_lower": tm,
        "t_plus": tp,
        "replicas": R,
        "hit_lower": proportion(int((hit <= tm).sum()), R),
        "hit_plus": proportion(int((hit <= tp).sum()), R),
        "occupied_plus": proportion(int(occ.sum()), R),
        "hit_quantiles": quantiles(hit),
        "normalized_iqr": iqr(hit_norm),
        "normalized_iqr_se": bootstrap_se(hit_norm, iqr, brng, cfg.bootstrap),
        "p_hat_squared": cfg.p_hat**2,
    }
    # upper-bound invariant: P(v in xi^u at t+) <= (p + 2 sigma_p)^2 + MC error
    bound = (cfg.p_hat + 2 * cfg.p_se) ** 2
    row["upper_bound"] = bound
    row["upper_bound_ok"] = bool(row["occupied_plus"]["estimate"] <= bound + 2 * row["occupied_plus"]["se"])
    if cfg.duality and R:
        hs = np.array([r["hit_time_swapped"] for r in res], dtype=float)
        os_ = np.array([r["occupied_swapped"] for r in res], dtype=bool)
        a, b = row["hit_lower"], proportion(int((hs <= tm).sum()), R)
        c, e = row["occupied_plus"], proportion(int(os_.sum()), R)
        row["hit_lower_swapped"] = b
        row["occupied_plus_swapped"] = e
        row["duality_ok"] = bool(
            abs(a["estimate"] - b["estimate"]) <= 3 * np.hypot(a["se"], b["se"]) + 1e-12
            and abs(c["estimate"] - e["estimate"]) <= 3 * np.hypot(c["se"], e["se"]) + 1e-12
        )
    return row
