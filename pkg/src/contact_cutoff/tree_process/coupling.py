"""Coupled constructions on ``T_d``.

``run_brw_coupled`` builds the discrete-time branching random walk where,
every ``T`` time units, each particle starts an independent contact process
from its location; several particles may share a vertex.  A contact process
is threaded through it: each of its infected vertices is carried by one
designated particle copy and uses that copy's clocks, so every contact
process infection sits on a live copy and ``|xi_{nT}| <= |BRW_{nT}|``.

``run_severed_coupled`` drives the full process ``xi`` and the severed
process ``eta`` with the same clocks, so ``eta_t`` is contained in ``xi_t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, types
from numba.typed import Dict

from ..errors import CapacityError, PreconditionError


@njit(cache=True)
def _grown(a, new, fill):
    b = np.full(new, fill, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _brw_kernel(d, lam, T, generations, pop_cap, rng):
    KB = np.int64(1) << np.int64(32)
    cap = 1024
    child = np.full(cap * d, -1, dtype=np.int64)
    nn = 1
    ckeys = np.empty(1024, dtype=np.int64)
    where = Dict.empty(key_type=types.int64, value_type=types.int64)
    cp_inf = np.zeros(cap, dtype=np.bool_)
    cp_key = np.full(cap, -1, dtype=np.int64)
    cp_members = np.empty(cap, dtype=np.int64)
    cp_pos = np.full(cap, -1, dtype=np.int64)
    brw = np.zeros(generations + 1, dtype=np.int64)
    cp = np.zeros(generations + 1, dtype=np.int64)

    ncopies = 1
    ckeys[0] = 0
    where[0] = 0
    cp_inf[0] = True
    cp_key[0] = 0
    cp_members[0] = 0
    cp_pos[0] = 0
    ncp = 1
    next_proc = 1
    brw[0] = 1
    cp[0] = 1
    total = 1.0 + lam * d
    clock = 0.0
    for gen in range(generations):
        t_end = (gen + 1) * T
        while ncopies > 0:
            dt = rng.exponential(1.0 / (ncopies * total))
            if clock + dt > t_end:
                clock = t_end
                break
            clock += dt
            k = rng.integers(0, ncopies)
            key = ckeys[k]
            proc = key // KB
            x = key - proc * KB
            designated = cp_inf[x] and cp_key[x] == key
            if rng.random() * total < 1.0:
                last = ckeys[ncopies - 1]
                ckeys[k] = last
                where[last] = k
                del where[key]
                ncopies -= 1
                if designated:
                    j = cp_pos[x]
                    lastx = cp_members[ncp - 1]
                    cp_members[j] = lastx
                    cp_pos[lastx] = j
                    cp_pos[x] = -1
                    cp_inf[x] = False
                    cp_key[x] = -1
                    ncp -= 1
                continue
            s = rng.integers(0, d)
            y = child[x * d + s]
            if y == -1:
                if nn >= cap:
                    cap *= 2
                    child = _grown(child, cap * d, -1)
                    cp_inf = _grown(cp_inf, cap, False)
                    cp_key = _grown(cp_key, cap, -1)
                    cp_members = _grown(cp_members, cap, -1)
                    cp_pos = _grown(cp_pos, cap, -1)
                y = nn
                nn += 1
                child[x * d + s] = y
                child[y * d] = x
            ykey = proc * KB + y
            if ykey not in where:
                if ncopies >= pop_cap:
                    return brw, cp, gen, clock, False
                if ncopies >= ckeys.shape[0]:
                    ckeys = _grown(ckeys, 2 * ckeys.shape[0], -1)
                ckeys[ncopies] = ykey
                where[ykey] = ncopies
                ncopies += 1
            if designated and not cp_inf[y]:
                cp_inf[y] = True
                cp_key[y] = ykey
                cp_members[ncp] = y
                cp_pos[y] = ncp
                ncp += 1
        clock = t_end
        brw[gen + 1] = ncopies
        cp[gen + 1] = ncp
        # every live copy becomes a particle that starts its own process
        remap = Dict.empty(key_type=types.int64, value_type=types.int64)
        for i in range(ncopies):
            old = ckeys[i]
            x = old % KB
            new = next_proc * KB + x
            next_proc += 1
            remap[old] = new
            ckeys[i] = new
        where = Dict.empty(key_type=types.int64, value_type=types.int64)
        for i in range(ncopies):
            where[ckeys[i]] = i
        for i in range(ncp):
            x = cp_members[i]
            cp_key[x] = remap[cp_key[x]]
    return brw, cp, generations, clock, True


@dataclass
class BRWRun:
    brw_sizes: np.ndarray
    cp_sizes: np.ndarray
    period: float


def run_brw_coupled(d: int, lam: float, T: float, generations: int,
                    rng: np.random.Generator, pop_cap: int = 10**7) -> BRWRun:
    """Branching random walk sizes and the coupled contact process sizes at ``nT``."""
    if T <= 0:
        raise PreconditionError("period T must be positive")
    if generations < 0:
        raise PreconditionError("generations must be non-negative")
    brw, cp, gen, clock, ok = _brw_kernel(int(d), float(lam), float(T), int(generations), int(pop_cap), rng)
    if not ok:
        raise CapacityError(
            f"branching random walk population exceeded {pop_cap} in generation {gen + 1}",
            time_reached=float(clock), partial=brw[: gen + 1],
        )
    return BRWRun(brw, cp, float(T))


def run_brw(d: int, lam: float, T: float, generations: int,
            rng: np.random.Generator, pop_cap: int = 10**7) -> np.ndarray:
    """``|BRW_{nT}|`` for ``n = 0..generations``."""
    return run_brw_coupled(d, lam, T, generations, rng, pop_cap).brw_sizes


@njit(cache=True)
def _severed_kernel(d, lam, horizon, grid, rng):
    cap = 1024
    child = np.full(cap * d, -1, dtype=np.int64)
    inf = np.zeros(cap, dtype=np.bool_)
    members = np.empty(cap, dtype=np.int64)
    pos = np.full(cap, -1, dtype=np.int64)
    e_inf = np.zeros(cap, dtype=np.bool_)
    e_ever = np.zeros(cap, dtype=np.bool_)
    nn = 1
    m = 1
    me = 1
    ever_e = 1
    inf[0] = True
    members[0] = 0
    pos[0] = 0
    e_inf[0] = True
    e_ever[0] = True
    G = grid.shape[0]
    out = np.zeros((G, 4), dtype=np.int64)
    ok = True
    g = 0
    clock = 0.0
    total = 1.0 + lam * d
    while g < G:
        if m == 0:
            t_next = np.inf
        else:
            t_next = clock + rng.exponential(1.0 / (m * total))
        while g < G and grid[g] < t_next:
            out[g, 0] = m
            out[g, 1] = nn
            out[g, 2] = me
            out[g, 3] = ever_e
            # explicit containment scan
            for x in range(nn):
                if (e_inf[x] and not inf[x]):
                    ok = False
            g += 1
        if t_next > horizon:
            break
        clock = t_next
        k = rng.integers(0, m)
        x = members[k]
        if rng.random() * total < 1.0:
            last = members[m - 1]
            members[k] = last
            pos[last] = k
            inf[x] = False
            m -= 1
            if e_inf[x]:
                e_inf[x] = False
                me -= 1
            continue
        s = rng.integers(0, d)
        y = child[x * d + s]
        if y == -1:
            if nn >= cap:
                cap *= 2
                child = _grown(child, cap * d, -1)
                inf = _grown(inf, cap, False)
                members = _grown(members, cap, -1)
                pos = _grown(pos, cap, -1)
                e_inf = _grown(e_inf, cap, False)
                e_ever = _grown(e_ever, cap, False)
            y = nn
            nn += 1
            child[x * d + s] = y
            child[y * d] = x
        if not inf[y]:
            inf[y] = True
            members[m] = y
            pos[y] = m
            m += 1
        # the severed copy ignores the d-1 removed root edges
        if e_inf[x] and not (x == 0 and s != 0) and not e_inf[y]:
            e_inf[y] = True
            me += 1
            if not e_ever[y]:
                e_ever[y] = True
                ever_e += 1
    return out, ok


@dataclass
class SeveredCoupledRun:
    times: np.ndarray
    full_infected: np.ndarray
    full_ever: np.ndarray
    severed_infected: np.ndarray
    severed_ever: np.ndarray
    contained: bool

    @property
    def dominated(self) -> bool:
        return bool(
            self.contained
            and np.all(self.severed_infected <= self.full_infected)
            and np.all(self.severed_ever <= self.full_ever)
        )


def run_severed_coupled(d: int, lam: float, horizon: float, rng: np.random.Generator,
                        grid_step: float = 0.1) -> SeveredCoupledRun:
    from .lazy_tree import tree_grid

    grid = tree_grid(horizon, grid_step)
    out, ok = _severed_kernel(int(d), float(lam), float(horizon), grid, rng)
    return SeveredCoupledRun(grid, out[:, 0], out[:, 1], out[:, 2], out[:, 3], bool(ok))
