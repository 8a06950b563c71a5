"""Contact process on the infinite d-regular tree, grown lazily.

Tree vertices live in an arena and are allocated when first infected, so
the allocated set *is* the ever-infected set and is always a connected
subtree containing the root.  Each vertex has ``d`` neighbor slots; slot 0
of a non-root vertex is its parent.  In severed mode root slots
``1..d-1`` are blocked: infection never crosses them.

Pioneer and border counts are maintained incrementally.  ``free[x]`` is the
number of neighbor slots of ``x`` never infected (blocked slots included);
since the ever-infected set is connected, ``x`` is a border point of it iff
``free[x] > 0``, and a pioneer point iff it is also infected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import CapacityError, PreconditionError

FULL = "full"
SEVERED = "severed"
DEFAULT_MAX_NODES = 10**8

UNALLOCATED = -1
BLOCKED = -2

# status codes returned by the kernel
ST_HORIZON = 0
ST_EXTINCT = 1
ST_CAPACITY = 2
ST_THRESHOLD = 3

# si layout
I_INF, I_NODES, I_PIONEER, I_BORDER, I_EVENTS = range(5)


@njit(cache=True)
def _advance(d, lam, child, parent, pslot, depth, inf, members, pos, free, sf, si,
             grid, out, g, stop_count, t_end, rng):
    """Advance in place.  Returns ``(status, next_grid_index)``.

    ``out[k] = (infected, ever, pioneers, borders)`` at ``grid[k]``.
    """
    cap = parent.shape[0]
    total = 1.0 + lam * d
    G = grid.shape[0]
    while True:
        m = si[I_INF]
        if m == 0:
            while g < G and grid[g] <= t_end:
                out[g, 0] = 0
                out[g, 1] = si[I_NODES]
                out[g, 2] = 0
                out[g, 3] = si[I_BORDER]
                g += 1
            return ST_EXTINCT, g
        if m >= stop_count:
            return ST_THRESHOLD, g
        if si[I_NODES] >= cap:
            return ST_CAPACITY, g
        t_next = sf[0] + rng.exponential(1.0 / (m * total))
        while g < G and grid[g] < t_next and grid[g] <= t_end:
            out[g, 0] = m
            out[g, 1] = si[I_NODES]
            out[g, 2] = si[I_PIONEER]
            out[g, 3] = si[I_BORDER]
            g += 1
        if t_next > t_end:
            sf[0] = t_end
            return ST_HORIZON, g
        sf[0] = t_next
        si[I_EVENTS] += 1
        # one uniform picks the member, then recovery vs. the infected slot
        w = rng.random() * m
        k = min(int(w), m - 1)
        r = (w - k) * total
        x = members[k]
        if r < 1.0:
            last = members[m - 1]
            members[k] = last
            pos[last] = k
            inf[x] = False
            si[I_INF] = m - 1
            if free[x] > 0:
                si[I_PIONEER] -= 1
            continue
        s = min(int((r - 1.0) / lam), d - 1)
        y = child[x * d + s]
        if y == BLOCKED:
            continue
        if y == UNALLOCATED:
            y = si[I_NODES]
            si[I_NODES] = y + 1
            child[x * d + s] = y
            parent[y] = x
            pslot[y] = s
            depth[y] = depth[x] + 1
            child[y * d] = x
            for j in range(1, d):
                child[y * d + j] = UNALLOCATED
            free[y] = d - 1
            if d > 1:
                si[I_BORDER] += 1
            free[x] -= 1
            if free[x] == 0:
                si[I_BORDER] -= 1
                si[I_PIONEER] -= 1
        if inf[y]:
            continue
        inf[y] = True
        members[m] = y
        pos[y] = m
        si[I_INF] = m + 1
        if free[y] > 0:
            si[I_PIONEER] += 1


class LazyTreeState:
    """Arena-backed contact process on ``T_d`` started from the root."""

    def __init__(self, d: int, mode: str = FULL, capacity: int = 1024,
                 max_nodes: int = DEFAULT_MAX_NODES):
        if d < 2:
            raise PreconditionError("tree degree must be at least 2")
        if mode not in (FULL, SEVERED):
            raise PreconditionError(f"mode must be {FULL!r} or {SEVERED!r}")
        self.d = int(d)
        self.mode = mode
        self.max_nodes = int(max_nodes)
        cap = max(2, min(int(capacity), self.max_nodes))
        self._alloc(cap)
        self.child[: self.d] = UNALLOCATED
        if mode == SEVERED:
            self.child[1: self.d] = BLOCKED
        self.parent[0] = -1
        self.pslot[0] = -1
        self.depth[0] = 0
        self.free[0] = self.d
        self.inf[0] = True
        self.members[0] = 0
        self.pos[0] = 0
        self.sf = np.zeros(1)
        self.si = np.zeros(5, dtype=np.int64)
        self.si[I_INF] = 1
        self.si[I_NODES] = 1
        self.si[I_PIONEER] = 1
        self.si[I_BORDER] = 1
        self.extinction_time = None

    def _alloc(self, cap):
        d = self.d
        self.child = np.full(cap * d, UNALLOCATED, dtype=np.int64)
        self.parent = np.empty(cap, dtype=np.int64)
        self.pslot = np.empty(cap, dtype=np.int64)
        self.depth = np.empty(cap, dtype=np.int64)
        self.inf = np.zeros(cap, dtype=np.bool_)
        self.members = np.empty(cap, dtype=np.int64)
        self.pos = np.empty(cap, dtype=np.int64)
        self.free = np.empty(cap, dtype=np.int64)

    def _grow(self):
        old = self.capacity
        if old >= self.max_nodes:
            raise CapacityError(
                f"tree arena exceeded {self.max_nodes} nodes at t={self.clock:.4f}",
                time_reached=self.clock,
            )
        new = min(2 * old, self.max_nodes)
        for name in ("parent", "pslot", "depth", "inf", "members", "pos", "free"):
            a = getattr(self, name)
            b = np.zeros(new, dtype=a.dtype)
            b[:old] = a
            setattr(self, name, b)
        c = np.full(new * self.d, UNALLOCATED, dtype=np.int64)
        c[: old * self.d] = self.child
        self.child = c

    @property
    def capacity(self) -> int:
        return self.parent.shape[0]

    @property
    def clock(self) -> float:
        return float(self.sf[0])

    @property
    def infected_count(self) -> int:
        return int(self.si[I_INF])

    @property
    def ever_count(self) -> int:
        return int(self.si[I_NODES])

    @property
    def pioneer_count(self) -> int:
        return int(self.si[I_PIONEER])

    @property
    def border_count(self) -> int:
        return int(self.si[I_BORDER])

    @property
    def event_count(self) -> int:
        return int(self.si[I_EVENTS])

    @property
    def extinct(self) -> bool:
        return self.si[I_INF] == 0

    def infected_nodes(self) -> np.ndarray:
        return np.sort(self.members[: self.infected_count])

    def ever_nodes(self) -> np.ndarray:
        return np.arange(self.ever_count)

    def neighbor_slots(self) -> np.ndarray:
        """``(ever, d)`` view of neighbor ids (-1 never infected, -2 blocked)."""
        return self.child[: self.ever_count * self.d].reshape(self.ever_count, self.d)

    def word(self, node: int) -> tuple:
        """Address of ``node``: slot indices followed from the root."""
        path = []
        while node != 0:
            path.append(int(self.pslot[node]))
            node = int(self.parent[node])
        return tuple(reversed(path))

    def advance(self, t_end: float, lam: float, rng: np.random.Generator,
                grid: np.ndarray | None = None, stop_count: int | None = None):
        """Run until ``t_end``, extinction or ``stop_count`` infected.

        Returns ``(status, out)`` where ``out`` has one row
        ``(infected, ever, pioneers, borders)`` per grid point reached.
        """
        grid = np.empty(0) if grid is None else np.asarray(grid, dtype=np.float64)
        out = np.zeros((grid.shape[0], 4), dtype=np.int64)
        stop = np.iinfo(np.int64).max if stop_count is None else int(stop_count)
        g = 0
        while grid.shape[0] and g < grid.shape[0] and grid[g] < self.clock:
            g += 1
        while True:
            status, g = _advance(
                self.d, float(lam), self.child, self.parent, self.pslot, self.depth,
                self.inf, self.members, self.pos, self.free, self.sf, self.si,
                grid, out, g, stop, float(t_end), rng,
            )
            if status != ST_CAPACITY:
                break
            try:
                self._grow()
            except CapacityError as exc:
                exc.partial = out[:g]
                raise
        if status == ST_EXTINCT and self.extinction_time is None:
            self.extinction_time = self.clock
        return int(status), out[:g]


@dataclass
class TreeRun:
    times: np.ndarray
    infected: np.ndarray
    ever: np.ndarray
    pioneers: np.ndarray
    borders: np.ndarray
    state: LazyTreeState

    @property
    def extinction_time(self):
        return self.state.extinction_time


def tree_grid(horizon: float, step: float) -> np.ndarray:
    k = int(np.floor(horizon / step + 1e-9))
    return np.arange(k + 1) * step


def run_tree(d: int, lam: float, horizon: float, mode: str = FULL,
             rng: np.random.Generator | None = None, grid_step: float = 0.1,
             max_nodes: int = DEFAULT_MAX_NODES) -> TreeRun:
    """Contact process on ``T_d`` from the root up to ``horizon``."""
    if horizon < 0:
        raise PreconditionError("horizon must be non-negative")
    if rng is None:
        rng = np.random.default_rng()
    state = LazyTreeState(d, mode, max_nodes=max_nodes)
    grid = tree_grid(horizon, grid_step)
    _, out = state.advance(horizon, lam, rng, grid)
    return TreeRun(grid[: len(out)], out[:, 0], out[:, 1], out[:, 2], out[:, 3], state)
