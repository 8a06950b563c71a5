"""Cover-tree grow-and-explore.

A contact process runs on one copy of ``T_d`` per source while a labeling
``phi`` maps tree vertices to ``[n]`` and reveals the finite graph.  Each
infected tree vertex is BLUE or RED, and the BLUE part projects through
``phi`` onto a contact process on the finite graph.

Each labeled tree vertex ``x~`` with label ``x`` associates its slots with
distinct half-edges of ``x``.  An attempt from a BLUE ``x~`` picks slot
``j`` uniformly.  If ``j`` is associated, the target keeps its label.
Otherwise ``j`` gets a uniform unassociated half-edge ``h`` of ``x``.  If
``h`` is already matched, the target is labeled by its partner's vertex;
if not, ``h`` is matched from the pool first.  Either way the projected
attempt uses a uniform half-edge of ``x``.

Colors are set when a vertex becomes infected: RED if the infector is RED
or the label already has a BLUE copy, BLUE otherwise.  A BLUE attempt
that hits a RED copy whose label has no BLUE copy recolors it BLUE, so
the projected infection is not lost.  RED vertices never extend ``phi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..contact_engine.gillespie import INFECT, RECOVER, WASTED, HitOutcome, make_grid
from ..errors import ContractViolation, PreconditionError
from ..regular_graph import Multigraph, _check_nd
from ..seeding import as_generator
from .events import EventLog, _log_append, empty_log, make_log
from .pool import UNMATCHED, HalfEdgePool, _match_fresh

HEALTHY = 0
BLUE = 1
RED = 2
COLOR_NAMES = {HEALTHY: "healthy", BLUE: "blue", RED: "red"}

ERR_NONE = 0
ERR_NO_FREE_HALF_EDGE = 1
ERR_UNASSOCIATED_LABEL = 2


@njit(cache=True)
def _grow_i64(a, new, fill):
    b = np.full(new, fill, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _cover(n, d, lam, sources, horizon, items, pos, size, partner, blue_at, grid,
           target_mask, stop_on_hit, log_on, rng):
    k = sources.shape[0]
    cap = 1024
    while cap < 2 * k:
        cap *= 2
    child = np.full(cap * d, -1, dtype=np.int64)
    she = np.full(cap * d, -1, dtype=np.int64)
    label = np.full(cap, -1, dtype=np.int64)
    color = np.zeros(cap, dtype=np.int64)
    tree_of = np.zeros(cap, dtype=np.int64)
    members = np.zeros(cap, dtype=np.int64)
    tpos = np.full(cap, -1, dtype=np.int64)
    first_tree = np.full(n, -1, dtype=np.int64)
    t_inf = np.zeros(k, dtype=np.int64)
    t_ever = np.zeros(k, dtype=np.int64)
    G = grid.shape[0]
    out = np.zeros((G, 3 + 2 * k), dtype=np.int64)
    buf = np.zeros((64 if log_on else 0, 5))
    nlog = 0
    dup = False
    overlap = False
    err = ERR_NONE
    hit_time = np.inf
    ext_time = np.inf
    nn = 0
    m = 0
    nblue = 0
    nlabeled = 0
    for i in range(k):
        s = sources[i]
        x = nn
        nn += 1
        tree_of[x] = i
        label[x] = s
        nlabeled += 1
        first_tree[s] = i
        color[x] = BLUE
        blue_at[s] = x
        members[m] = x
        tpos[x] = m
        m += 1
        nblue += 1
        t_inf[i] += 1
        t_ever[i] += 1
        if target_mask[s]:
            hit_time = 0.0
    clock = 0.0
    total = 1.0 + lam * d
    g = 0
    free_idx = np.zeros(d, dtype=np.int64)
    done = hit_time == 0.0 and stop_on_hit
    while not done:
        if m == 0:
            ext_time = clock
            t_next = np.inf
        else:
            t_next = clock + rng.exponential(1.0 / (m * total))
        while g < G and grid[g] < t_next and grid[g] <= horizon:
            out[g, 0] = nblue
            out[g, 1] = m
            out[g, 2] = nn
            for i in range(k):
                out[g, 3 + i] = t_inf[i]
                out[g, 3 + k + i] = t_ever[i]
            g += 1
        if t_next > horizon:
            if m > 0:
                clock = horizon
            break
        clock = t_next
        r = rng.integers(0, m)
        x = members[r]
        cx = color[x]
        tr = tree_of[x]
        if rng.random() * total < 1.0:
            last = members[m - 1]
            members[r] = last
            tpos[last] = r
            tpos[x] = -1
            m -= 1
            color[x] = HEALTHY
            t_inf[tr] -= 1
            if cx == BLUE:
                blue_at[label[x]] = -1
                nblue -= 1
                if log_on:
                    buf = _log_append(buf, nlog, clock, RECOVER, label[x], label[x], False)
                    nlog += 1
            continue
        j = rng.integers(0, d)
        c = x * d + j
        y = child[c]
        new_edge = False
        if cx == BLUE:
            lx = label[x]
            if she[c] == -1:
                if y >= 0 and label[y] >= 0:
                    err = ERR_UNASSOCIATED_LABEL
                    break
                # uniform unassociated half-edge of lx at this tree vertex
                nf = 0
                for i in range(d):
                    hh = lx * d + i
                    used = False
                    for jj in range(d):
                        if she[x * d + jj] == hh:
                            used = True
                            break
                    if not used:
                        free_idx[nf] = hh
                        nf += 1
                if nf == 0:
                    err = ERR_NO_FREE_HALF_EDGE
                    break
                h = free_idx[rng.integers(0, nf)]
                if partner[h] == UNMATCHED:
                    hp = _match_fresh(items, pos, size, partner, h, rng)
                    new_edge = True
                else:
                    hp = partner[h]
                she[c] = h
                w = hp // d
                if y < 0:
                    if nn >= cap:
                        cap *= 2
                        child = _grow_i64(child, cap * d, -1)
                        she = _grow_i64(she, cap * d, -1)
                        label = _grow_i64(label, cap, -1)
                        color = _grow_i64(color, cap, 0)
                        tree_of = _grow_i64(tree_of, cap, 0)
                        members = _grow_i64(members, cap, 0)
                        tpos = _grow_i64(tpos, cap, -1)
                    y = nn
                    nn += 1
                    child[c] = y
                    child[y * d] = x
                    tree_of[y] = tr
                    t_ever[tr] += 1
                label[y] = w
                she[y * d] = hp
                nlabeled += 1
                ft = first_tree[w]
                if ft == -1:
                    first_tree[w] = tr
                elif ft == tr:
                    dup = True
                else:
                    overlap = True
            yl = label[y]
            if color[y] == HEALTHY:
                members[m] = y
                tpos[y] = m
                m += 1
                t_inf[tr] += 1
                if blue_at[yl] == -1:
                    color[y] = BLUE
                    blue_at[yl] = y
                    nblue += 1
                    kind = INFECT
                else:
                    color[y] = RED
                    kind = WASTED
            elif color[y] == RED and blue_at[yl] == -1:
                color[y] = BLUE
                blue_at[yl] = y
                nblue += 1
                kind = INFECT
            else:
                kind = WASTED
            if log_on:
                buf = _log_append(buf, nlog, clock, kind, lx, yl, new_edge)
                nlog += 1
            if kind == INFECT and target_mask[yl] and hit_time == np.inf:
                hit_time = clock
                if stop_on_hit:
                    break
            continue
        # RED attempt: plain tree dynamics, no labeling
        if y < 0:
            if nn >= cap:
                cap *= 2
                child = _grow_i64(child, cap * d, -1)
                she = _grow_i64(she, cap * d, -1)
                label = _grow_i64(label, cap, -1)
                color = _grow_i64(color, cap, 0)
                tree_of = _grow_i64(tree_of, cap, 0)
                members = _grow_i64(members, cap, 0)
                tpos = _grow_i64(tpos, cap, -1)
            y = nn
            nn += 1
            child[c] = y
            child[y * d] = x
            tree_of[y] = tr
            t_ever[tr] += 1
        if color[y] == HEALTHY:
            color[y] = RED
            members[m] = y
            tpos[y] = m
            m += 1
            t_inf[tr] += 1
    return (hit_time, ext_time, clock, g, out, nn, child[: nn * d], label[:nn], color[:nn],
            tree_of[:nn], nlabeled, dup, overlap, err, buf, nlog)


@dataclass
class CoverTreeState:
    """Final forest of one cover-tree run.

    ``child`` is the ``(nodes, d)`` neighbor table (slot 0 is the parent of
    every non-root); ``label`` is ``phi`` (-1 where unlabeled); ``color``
    uses HEALTHY/BLUE/RED codes; ``tree`` gives the source index.
    """

    d: int
    sources: np.ndarray
    child: np.ndarray
    label: np.ndarray
    color: np.ndarray
    tree: np.ndarray
    blue_at: np.ndarray
    pool: HalfEdgePool
    clock: float

    @property
    def nodes(self) -> int:
        return int(self.label.shape[0])

    def projected(self) -> np.ndarray:
        """``phi`` of the BLUE infected tree vertices, sorted."""
        return np.flatnonzero(self.blue_at >= 0)

    def labeled_vertices(self, source_index: int | None = None) -> np.ndarray:
        sel = self.label >= 0
        if source_index is not None:
            sel &= self.tree == source_index
        return np.unique(self.label[sel])

    def check(self) -> None:
        blue = np.flatnonzero(self.color == BLUE)
        if np.unique(self.label[blue]).size != blue.size:
            raise ContractViolation("a finite vertex carries two BLUE infections")
        if np.any(self.label[blue] < 0):
            raise ContractViolation("an unlabeled tree vertex is BLUE")
        if not np.array_equal(np.sort(self.label[blue]), self.projected()):
            raise ContractViolation("blue_at disagrees with the colored forest")
        for i, s in enumerate(self.sources):
            if self.label[i] != s:
                raise ContractViolation("root label differs from its source")


@dataclass
class CoverTreeRun:
    times: np.ndarray
    projected: np.ndarray
    tree_infected: np.ndarray
    tree_ever: np.ndarray
    source_infected: np.ndarray
    source_ever: np.ndarray
    outcome: HitOutcome
    state: CoverTreeState
    labels_assigned: int
    duplicate_label: bool
    label_overlap: bool
    log: EventLog
    graph: Multigraph | None = None


def _as_sources(n, sources) -> np.ndarray:
    src = np.asarray(list(sources), dtype=np.int64)
    if src.size == 0:
        raise PreconditionError("at least one source is required")
    if np.unique(src).size != src.size:
        raise PreconditionError("sources must be distinct")
    if np.any(src < 0) or np.any(src >= n):
        raise PreconditionError(f"sources must lie in [0, {n})")
    return src


def explore_cover_tree(n: int, d: int, lam: float, sources, horizon: float,
                       rng: np.random.Generator, pool: HalfEdgePool | None = None, *,
                       targets=None, grid_step: float = 0.1, stop_on_hit: bool = False,
                       log: bool = False) -> CoverTreeRun:
    """Run the cover-tree construction on ``pool`` without completing the graph."""
    _check_nd(n, d)
    src = _as_sources(n, sources)
    pool = HalfEdgePool(n, d) if pool is None else pool
    if pool.n != n or pool.d != d:
        raise PreconditionError("pool does not match (n, d)")
    mask = np.zeros(n, dtype=np.bool_)
    if targets is not None:
        mask[np.asarray(list(targets), dtype=np.int64)] = True
    grid = make_grid(horizon, grid_step) if grid_step else np.empty(0)
    blue_at = np.full(n, -1, dtype=np.int64)
    (hit_t, ext_t, clock, g, out, nn, child, label, color, tree, nlabeled, dup, overlap,
     err, buf, nlog) = _cover(n, d, float(lam), src, float(horizon), pool.items, pool.pos,
                              pool.size_arr, pool.partner, blue_at, grid, mask,
                              bool(stop_on_hit), bool(log), rng)
    if err == ERR_NO_FREE_HALF_EDGE:
        raise ContractViolation("more associated slots than half-edges (l + k > d)")
    if err == ERR_UNASSOCIATED_LABEL:
        raise ContractViolation("labeled tree neighbor without a half-edge association")
    k = src.size
    state = CoverTreeState(d, src, child.reshape(nn, d), label, color, tree, blue_at, pool, float(clock))
    outcome = HitOutcome(
        hit=bool(np.isfinite(hit_t)),
        hit_time=float(hit_t) if np.isfinite(hit_t) else None,
        extinction_time=float(ext_t) if np.isfinite(ext_t) else None,
        final_infected_count=int((blue_at >= 0).sum()),
    )
    out = out[:g]
    return CoverTreeRun(
        times=grid[:g], projected=out[:, 0], tree_infected=out[:, 1], tree_ever=out[:, 2],
        source_infected=out[:, 3:3 + k], source_ever=out[:, 3 + k:3 + 2 * k],
        outcome=outcome, state=state, labels_assigned=int(nlabeled),
        duplicate_label=bool(dup), label_overlap=bool(overlap),
        log=make_log(buf, nlog) if log else empty_log(),
    )


def run_cover_tree(n: int, d: int, lam: float, sources, horizon: float, rng=None, *,
                   targets=None, grid_step: float = 0.1, stop_on_hit: bool = False,
                   log: bool = False) -> CoverTreeRun:
    """Cover-tree construction from ``sources``, then uniform completion of the graph."""
    rng = as_generator(rng)
    run = explore_cover_tree(n, d, lam, sources, horizon, rng, None, targets=targets,
                             grid_step=grid_step, stop_on_hit=stop_on_hit, log=log)
    run.graph = run.state.pool.complete(rng)
    return run


@dataclass
class PairRun:
    """Two cover-tree processes sharing one revealed graph."""

    u: int
    v: int
    run_u: CoverTreeRun
    run_v: CoverTreeRun
    graph: Multigraph
    order: tuple

    @property
    def final_u(self) -> np.ndarray:
        return self.run_u.state.projected()

    @property
    def final_v(self) -> np.ndarray:
        return self.run_v.state.projected()

    @property
    def alive_u(self) -> bool:
        return self.final_u.size > 0

    @property
    def alive_v(self) -> bool:
        return self.final_v.size > 0

    @property
    def intersect(self) -> bool:
        """Projected infected sets share a vertex at their end times."""
        return bool(np.intersect1d(self.final_u, self.final_v).size)

    @property
    def label_overlap(self) -> bool:
        """The two runs assigned a common label somewhere."""
        return bool(np.intersect1d(self.run_u.state.labeled_vertices(),
                                   self.run_v.state.labeled_vertices()).size)

    @property
    def duplicate_label(self) -> bool:
        return self.run_u.duplicate_label or self.run_v.duplicate_label

    @property
    def good_labeling(self) -> bool:
        """No label assigned twice within a run and no label shared between runs."""
        return not (self.duplicate_label or self.label_overlap)


def run_independent_pair(n: int, d: int, lam: float, u: int, v: int, horizon_u: float,
                         horizon_v: float, rng=None, *, order: str = "uv",
                         grid_step: float = 0.1, complete: bool = True) -> PairRun:
    """Independent tree processes from ``u`` and ``v`` labeled on one shared pool.

    ``order`` chooses which process is labeled first.  The tree-level
    randomness of each process is independent of the other.
    """
    if u == v:
        raise PreconditionError("u and v must differ")
    if order not in ("uv", "vu"):
        raise PreconditionError("order must be 'uv' or 'vu'")
    rng = as_generator(rng)
    pool = HalfEdgePool(n, d)
    plan = [(u, horizon_u), (v, horizon_v)]
    if order == "vu":
        plan.reverse()
    runs = {}
    for s, h in plan:
        runs[s] = explore_cover_tree(n, d, lam, [s], h, rng, pool, grid_step=grid_step)
    graph = pool.complete(rng) if complete else None
    return PairRun(int(u), int(v), runs[u], runs[v], graph, tuple(order))
