"""Grow-and-explore: the contact process and the configuration model built together.

Edges are revealed only when an infection attempt first crosses an unmatched
half-edge; the far end is then drawn uniformly from the remaining pool.  At
the horizon the leftover pool is paired uniformly, so the finished graph is
a configuration-model sample and the process is a contact process on it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..contact_engine.gillespie import (
    INFECT,
    RECOVER,
    WASTED,
    HitOutcome,
    InfectionState,
    _insert,
    _remove,
    make_grid,
)
from ..errors import ExhaustionError
from ..regular_graph import Multigraph, SimpleRegularGraph, _check_nd, is_simple
from ..seeding import as_generator
from .events import EventLog, _log_append, empty_log, make_log
from .pool import UNMATCHED, HalfEdgePool, _match_fresh


@njit(cache=True)
def _vanilla(d, lam, items, pos, size, partner, members, ipos, is_inf, ever, sf, si,
             horizon, grid, out_inf, out_ever, target_mask, stop_on_hit, log_on, rng):
    inf = np.inf
    hit_time = inf
    ext_time = inf
    G = grid.shape[0]
    g = 0
    buf = np.zeros((64 if log_on else 0, 5))
    nlog = 0
    for i in range(si[0]):
        if target_mask[members[i]]:
            hit_time = sf[0]
    if hit_time < inf and stop_on_hit:
        return hit_time, ext_time, g, buf, nlog
    total = 1.0 + lam * d
    while True:
        m = si[0]
        if m == 0:
            ext_time = sf[0]
            while g < G and grid[g] <= horizon:
                out_inf[g] = 0
                out_ever[g] = si[1]
                g += 1
            return hit_time, ext_time, g, buf, nlog
        t_next = sf[0] + rng.exponential(1.0 / (m * total))
        while g < G and grid[g] < t_next and grid[g] <= horizon:
            out_inf[g] = m
            out_ever[g] = si[1]
            g += 1
        if t_next > horizon:
            sf[0] = horizon
            return hit_time, ext_time, g, buf, nlog
        sf[0] = t_next
        si[2] += 1
        k = rng.integers(0, m)
        x = members[k]
        if rng.random() * total < 1.0:
            _remove(members, ipos, is_inf, si, k)
            if log_on:
                buf = _log_append(buf, nlog, t_next, RECOVER, x, x, False)
                nlog += 1
            continue
        h = x * d + rng.integers(0, d)
        new_edge = False
        if partner[h] == UNMATCHED:
            c = _match_fresh(items, pos, size, partner, h, rng)
            new_edge = True
        else:
            c = partner[h]
        y = c // d
        if is_inf[y]:
            if log_on:
                buf = _log_append(buf, nlog, t_next, WASTED, x, y, new_edge)
                nlog += 1
            continue
        _insert(members, ipos, is_inf, ever, si, y)
        if log_on:
            buf = _log_append(buf, nlog, t_next, INFECT, x, y, new_edge)
            nlog += 1
        if target_mask[y] and hit_time == inf:
            hit_time = t_next
            if stop_on_hit:
                return hit_time, ext_time, g, buf, nlog


@dataclass
class ExploreState:
    """Partially revealed graph together with the infection state on it."""

    pool: HalfEdgePool
    infection: InfectionState
    log: EventLog

    @property
    def explored_edges(self) -> int:
        return self.pool.matched_pairs


@dataclass
class VanillaRun:
    graph: Multigraph
    times: np.ndarray
    infected: np.ndarray
    ever_infected: np.ndarray
    outcome: HitOutcome
    explored_edges: int
    state: ExploreState
    attempts: int = 1


def explore(n: int, d: int, lam: float, init, horizon: float, rng: np.random.Generator,
            targets=None, grid_step: float = 0.1, stop_on_hit: bool = False,
            log: bool = False, pool: HalfEdgePool | None = None):
    """Run the exploration up to ``horizon`` without completing the graph."""
    _check_nd(n, d)
    pool = HalfEdgePool(n, d) if pool is None else pool
    state = InfectionState(n, init)
    mask = np.zeros(n, dtype=np.bool_)
    if targets is not None:
        mask[np.asarray(list(targets), dtype=np.int64)] = True
    grid = make_grid(horizon, grid_step) if grid_step else np.empty(0)
    out_inf = np.zeros(grid.shape[0], dtype=np.int64)
    out_ever = np.zeros(grid.shape[0], dtype=np.int64)
    if horizon > 0:
        hit_t, ext_t, k, buf, nlog = _vanilla(
            d, float(lam), pool.items, pool.pos, pool.size_arr, pool.partner,
            *state.arrays(), float(horizon), grid, out_inf, out_ever, mask,
            bool(stop_on_hit), bool(log), rng,
        )
    else:
        # nothing happens before time 0; keep the rng untouched
        hit_t = 0.0 if mask[state.members[: state.count]].any() else np.inf
        ext_t = 0.0 if state.count == 0 else np.inf
        k = min(1, grid.shape[0])
        out_inf[:k] = state.count
        out_ever[:k] = state.ever_count
        buf, nlog = np.zeros((0, 5)), 0
    outcome = HitOutcome(
        hit=bool(np.isfinite(hit_t)),
        hit_time=float(hit_t) if np.isfinite(hit_t) else None,
        extinction_time=float(ext_t) if np.isfinite(ext_t) else None,
        final_infected_count=state.count,
    )
    ev = make_log(buf, nlog) if log else empty_log()
    return ExploreState(pool, state, ev), grid[:k], out_inf[:k], out_ever[:k], outcome


def run_vanilla(n: int, d: int, lam: float, init, horizon: float, rng=None, *,
                targets=None, grid_step: float = 0.1, stop_on_hit: bool = False,
                condition_simple: bool = False, max_attempts: int = 10_000,
                log: bool = False) -> VanillaRun:
    """Grow-and-explore up to ``horizon`` then complete the graph.

    With ``condition_simple`` the whole replica (graph and process) is
    resampled until the completed graph is simple.
    """
    rng = as_generator(rng)
    for attempt in range(1, max_attempts + 1):
        st, times, inf, ever, outcome = explore(
            n, d, lam, init, horizon, rng, targets, grid_step, stop_on_hit, log)
        g = st.pool.complete(rng)
        if not condition_simple:
            return VanillaRun(g, times, inf, ever, outcome, st.explored_edges, st, attempt)
        if is_simple(g):
            g = SimpleRegularGraph(g.n, g.d, g.partner, attempts=attempt)
            return VanillaRun(g, times, inf, ever, outcome, st.explored_edges, st, attempt)
    raise ExhaustionError(f"no simple graph after {max_attempts} replica attempts", max_attempts)
