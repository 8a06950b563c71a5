"""Aggregate-rate Gillespie dynamics for the contact process on a finite graph.

Every infected vertex carries a rate ``1 + lam*d`` clock.  When it rings the
vertex recovers with probability ``1/(1 + lam*d)``; otherwise one of its
``d`` half-edges is chosen uniformly and the vertex at the far end becomes
infected if it is healthy.  An attempt on an infected vertex (or along a
self-loop) is wasted, which gives rate ``lam`` per half-edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from ..errors import ContractViolation, PreconditionError

RECOVER = 0
INFECT = 1
WASTED = 2
EVENT_KINDS = {RECOVER: "recover", INFECT: "infect", WASTED: "wasted"}


class InfectionState:
    """Infected set, ever-infected set and clock of one replica.

    The infected set is a dense index array with a position map, so uniform
    sampling, insertion and deletion are O(1).  ``sf`` holds the clock and
    ``si`` holds ``(infected, ever_infected, events)`` counts so numba
    kernels can update them in place.
    """

    def __init__(self, n: int, init=(), clock: float = 0.0):
        self.n = int(n)
        self.members = np.zeros(self.n, dtype=np.int64)
        self.pos = np.full(self.n, -1, dtype=np.int64)
        self.is_infected = np.zeros(self.n, dtype=np.bool_)
        self.ever = np.zeros(self.n, dtype=np.bool_)
        self.sf = np.array([float(clock)])
        self.si = np.zeros(3, dtype=np.int64)
        for v in np.unique(np.asarray(list(init), dtype=np.int64)):
            if v < 0 or v >= self.n:
                raise PreconditionError(f"initial vertex {v} outside [0, {self.n})")
            self._add(int(v))

    @classmethod
    def full(cls, n: int) -> "InfectionState":
        s = cls(n)
        s.members[:] = np.arange(n)
        s.pos[:] = np.arange(n)
        s.is_infected[:] = True
        s.ever[:] = True
        s.si[0] = s.si[1] = n
        return s

    def _add(self, v: int) -> None:
        if self.is_infected[v]:
            return
        m = self.si[0]
        self.members[m] = v
        self.pos[v] = m
        self.is_infected[v] = True
        self.si[0] = m + 1
        if not self.ever[v]:
            self.ever[v] = True
            self.si[1] += 1

    @property
    def clock(self) -> float:
        return float(self.sf[0])

    @property
    def count(self) -> int:
        return int(self.si[0])

    @property
    def ever_count(self) -> int:
        return int(self.si[1])

    @property
    def event_count(self) -> int:
        return int(self.si[2])

    @property
    def extinct(self) -> bool:
        return self.si[0] == 0

    @property
    def infected(self) -> frozenset:
        return frozenset(int(v) for v in self.members[: self.si[0]])

    @property
    def ever_infected(self) -> frozenset:
        return frozenset(int(v) for v in np.flatnonzero(self.ever))

    def __contains__(self, v) -> bool:
        return bool(self.is_infected[v])

    def arrays(self):
        return self.members, self.pos, self.is_infected, self.ever, self.sf, self.si

    def copy(self) -> "InfectionState":
        c = InfectionState.__new__(InfectionState)
        c.n = self.n
        for name in ("members", "pos", "is_infected", "ever", "sf", "si"):
            setattr(c, name, getattr(self, name).copy())
        return c


class Event(NamedTuple):
    time: float
    kind: str
    source: int
    target: int


@dataclass(frozen=True)
class HitOutcome:
    hit: bool
    hit_time: float | None
    extinction_time: float | None
    final_infected_count: int

    def as_dict(self) -> dict:
        return {
            "hit": self.hit,
            "hit_time": self.hit_time,
            "extinction_time": self.extinction_time,
            "final_infected_count": self.final_infected_count,
        }


@njit(cache=True)
def _remove(members, pos, is_inf, si, k):
    x = members[k]
    last = members[si[0] - 1]
    members[k] = last
    pos[last] = k
    pos[x] = -1
    is_inf[x] = False
    si[0] -= 1


@njit(cache=True)
def _insert(members, pos, is_inf, ever, si, y):
    members[si[0]] = y
    pos[y] = si[0]
    is_inf[y] = True
    si[0] += 1
    if not ever[y]:
        ever[y] = True
        si[1] += 1


@njit(cache=True)
def _step(targets, d, lam, members, pos, is_inf, ever, sf, si, rng):
    """One event.  Returns ``(kind, source, target)``; the clock is advanced."""
    m = si[0]
    total = 1.0 + lam * d
    sf[0] += rng.exponential(1.0 / (m * total))
    si[2] += 1
    k = rng.integers(0, m)
    x = members[k]
    if rng.random() * total < 1.0:
        _remove(members, pos, is_inf, si, k)
        return RECOVER, x, x
    y = targets[x * d + rng.integers(0, d)]
    if is_inf[y]:
        return WASTED, x, y
    _insert(members, pos, is_inf, ever, si, y)
    return INFECT, x, y


@njit(cache=True)
def _run(targets, d, lam, members, pos, is_inf, ever, sf, si, horizon, grid,
         out_inf, out_ever, target_mask, stop_on_hit, rng):
    """Advance until extinction, ``horizon`` or (optionally) the first target hit.

    Grid values follow last-event-before-gridpoint semantics.  Returns
    ``(hit_time, extinction_time, grid_points_written)`` with ``inf`` for
    events that did not happen.
    """
    inf = np.inf
    hit_time = inf
    ext_time = inf
    G = grid.shape[0]
    g = 0
    while g < G and grid[g] < sf[0]:
        g += 1
    for i in range(si[0]):
        if target_mask[members[i]]:
            hit_time = sf[0]
            break
    if hit_time < inf and stop_on_hit:
        return hit_time, ext_time, g
    total = 1.0 + lam * d
    while True:
        m = si[0]
        if m == 0:
            ext_time = sf[0]
            while g < G and grid[g] <= horizon:
                out_inf[g] = 0
                out_ever[g] = si[1]
                g += 1
            return hit_time, ext_time, g
        t_next = sf[0] + rng.exponential(1.0 / (m * total))
        while g < G and grid[g] < t_next and grid[g] <= horizon:
            out_inf[g] = m
            out_ever[g] = si[1]
            g += 1
        if t_next > horizon:
            sf[0] = horizon
            return hit_time, ext_time, g
        sf[0] = t_next
        si[2] += 1
        k = rng.integers(0, m)
        x = members[k]
        if rng.random() * total < 1.0:
            _remove(members, pos, is_inf, si, k)
            continue
        y = targets[x * d + rng.integers(0, d)]
        if is_inf[y]:
            continue
        _insert(members, pos, is_inf, ever, si, y)
        if target_mask[y] and hit_time == inf:
            hit_time = t_next
            if stop_on_hit:
                return hit_time, ext_time, g


def gillespie_step(state: InfectionState, g, lam: float, rng: np.random.Generator) -> Event:
    """Apply one event to ``state`` in place and describe it."""
    if state.extinct:
        raise ContractViolation("gillespie_step called on an extinct state")
    kind, x, y = _step(g.targets, g.d, float(lam), *state.arrays(), rng)
    return Event(state.clock, EVENT_KINDS[int(kind)], int(x), int(y))


@dataclass
class RunResult:
    outcome: HitOutcome
    times: np.ndarray
    infected: np.ndarray
    ever_infected: np.ndarray
    state: InfectionState


def make_grid(horizon: float, step: float) -> np.ndarray:
    if step <= 0:
        raise PreconditionError("grid step must be positive")
    k = int(np.floor(horizon / step + 1e-9))
    return np.arange(k + 1) * step


def run_until(
    g,
    lam: float,
    init,
    horizon: float,
    targets=None,
    rng: np.random.Generator | None = None,
    grid_step: float = 0.1,
    stop_on_hit: bool = True,
    state: InfectionState | None = None,
) -> RunResult:
    """Run Gillespie dynamics from ``init`` (or a prepared ``state``).

    Stops at extinction, at ``horizon``, or at the first time a vertex of
    ``targets`` is infected when ``stop_on_hit`` is set.  The returned series
    covers the grid points reached before stopping.
    """
    if rng is None:
        rng = np.random.default_rng()
    if state is None:
        state = InfectionState(g.n, init)
    mask = np.zeros(g.n, dtype=np.bool_)
    if targets is not None:
        mask[np.asarray(list(targets), dtype=np.int64)] = True
    grid = make_grid(horizon, grid_step) if grid_step else np.empty(0)
    out_inf = np.zeros(grid.shape[0], dtype=np.int64)
    out_ever = np.zeros(grid.shape[0], dtype=np.int64)
    hit_t, ext_t, k = _run(
        g.targets, g.d, float(lam), *state.arrays(), float(horizon), grid,
        out_inf, out_ever, mask, bool(stop_on_hit), rng,
    )
    outcome = HitOutcome(
        hit=bool(np.isfinite(hit_t)),
        hit_time=float(hit_t) if np.isfinite(hit_t) else None,
        extinction_time=float(ext_t) if np.isfinite(ext_t) else None,
        final_infected_count=state.count,
    )
    return RunResult(outcome, grid[:k], out_inf[:k], out_ever[:k], state)


@njit(cache=True)
def _ensemble(targets, n, d, lam, init, times, replicas, rng):
    out = np.zeros((replicas, times.shape[0], n), dtype=np.bool_)
    members = np.zeros(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    is_inf = np.zeros(n, dtype=np.bool_)
    ever = np.zeros(n, dtype=np.bool_)
    si = np.zeros(3, dtype=np.int64)
    total = 1.0 + lam * d
    T = times.shape[0]
    for r in range(replicas):
        is_inf[:] = False
        ever[:] = False
        si[:] = 0
        for v in init:
            if not is_inf[v]:
                _insert(members, pos, is_inf, ever, si, v)
        clock = 0.0
        g = 0
        while g < T:
            m = si[0]
            t_next = np.inf if m == 0 else clock + rng.exponential(1.0 / (m * total))
            while g < T and times[g] < t_next:
                out[r, g, :] = is_inf
                g += 1
            if g >= T:
                break
            clock = t_next
            k = rng.integers(0, m)
            x = members[k]
            if rng.random() * total < 1.0:
                _remove(members, pos, is_inf, si, k)
                continue
            y = targets[x * d + rng.integers(0, d)]
            if not is_inf[y]:
                _insert(members, pos, is_inf, ever, si, y)
    return out


def ensemble_snapshots(g, lam: float, init, times, replicas: int,
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Infected indicators of ``replicas`` independent runs at sorted ``times``.

    Shape ``(replicas, len(times), n)``; one kernel call, so it suits
    many short runs on small graphs.
    """
    if rng is None:
        rng = np.random.default_rng()
    times = np.asarray(times, dtype=np.float64)
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise PreconditionError("times must be sorted and non-negative")
    init = np.unique(np.asarray(list(init), dtype=np.int64))
    if np.any(init < 0) or np.any(init >= g.n):
        raise PreconditionError("initial vertices out of range")
    return _ensemble(g.targets, g.n, g.d, float(lam), init, times, int(replicas), rng)
