"""Harris graphical representation on a finite (multi)graph.

Each vertex carries a rate-1 Poisson process of recovery marks and each
directed half-edge ``h`` carries a rate-``lam`` Poisson process of arrows
from ``h // d`` to ``partner[h] // d``.  Infection paths run forward in
time, are cut by recovery marks and jump along arrows.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from ..errors import PreconditionError

REC = 0
ARROW = 1


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


def _segments_sorted(owner_count: int, counts: np.ndarray, times: np.ndarray):
    """CSR pointers plus times sorted within each owner's segment."""
    ptr = np.zeros(owner_count + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    owner = np.repeat(np.arange(owner_count), counts)
    order = np.lexsort((times, owner))
    return ptr, times[order]


@dataclass(frozen=True, eq=False)
class GraphicalRecord:
    n: int
    d: int
    partner: np.ndarray
    horizon: float
    recovery_ptr: np.ndarray
    recovery_times: np.ndarray
    arrow_ptr: np.ndarray
    arrow_times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "partner", _frozen(self.partner, np.int64))
        for name in ("recovery_ptr", "arrow_ptr"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))
        for name in ("recovery_times", "arrow_times"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.float64))

    def recoveries(self, v: int) -> np.ndarray:
        return self.recovery_times[self.recovery_ptr[v]: self.recovery_ptr[v + 1]]

    def arrows(self, h: int) -> np.ndarray:
        return self.arrow_times[self.arrow_ptr[h]: self.arrow_ptr[h + 1]]

    @cached_property
    def events(self):
        """All marks merged in time order as ``(time, kind, a, b)`` arrays.

        A recovery has ``a == b`` the vertex; an arrow runs ``a -> b``.
        """
        d = self.d
        rc = np.diff(self.recovery_ptr)
        ac = np.diff(self.arrow_ptr)
        rv = np.repeat(np.arange(self.n), rc)
        ah = np.repeat(np.arange(self.n * d), ac)
        t = np.concatenate([self.recovery_times, self.arrow_times])
        kind = np.concatenate([np.full(rv.size, REC), np.full(ah.size, ARROW)]).astype(np.int8)
        a = np.concatenate([rv, ah // d])
        b = np.concatenate([rv, self.partner[ah] // d])
        order = np.argsort(t, kind="stable")
        return t[order], kind[order], a[order], b[order]

    def same_marks(self, other: "GraphicalRecord") -> bool:
        return (
            self.n == other.n and self.d == other.d and self.horizon == other.horizon
            and np.array_equal(self.partner, other.partner)
            and np.array_equal(self.recovery_ptr, other.recovery_ptr)
            and np.array_equal(self.arrow_ptr, other.arrow_ptr)
            and np.allclose(self.recovery_times, other.recovery_times, rtol=0, atol=1e-12)
            and np.allclose(self.arrow_times, other.arrow_times, rtol=0, atol=1e-12)
        )


def empty_record(g, horizon: float = 0.0) -> GraphicalRecord:
    n, d = g.n, g.d
    return GraphicalRecord(
        n, d, g.partner, float(horizon),
        np.zeros(n + 1, np.int64), np.empty(0), np.zeros(n * d + 1, np.int64), np.empty(0),
    )


def record_from_marks(g, horizon: float, recoveries: dict, arrows: dict) -> GraphicalRecord:
    """Hand-build a record: ``recoveries[v]`` and ``arrows[h]`` are lists of times."""
    n, d = g.n, g.d
    rc = np.array([len(recoveries.get(v, ())) for v in range(n)], dtype=np.int64)
    rt = np.array([t for v in range(n) for t in sorted(recoveries.get(v, ()))], dtype=np.float64)
    ac = np.array([len(arrows.get(h, ())) for h in range(n * d)], dtype=np.int64)
    at = np.array([t for h in range(n * d) for t in sorted(arrows.get(h, ()))], dtype=np.float64)
    for t in np.concatenate([rt, at]):
        if not 0.0 <= t <= horizon:
            raise PreconditionError(f"mark time {t} outside [0, {horizon}]")
    rp = np.concatenate([[0], np.cumsum(rc)])
    ap = np.concatenate([[0], np.cumsum(ac)])
    return GraphicalRecord(n, d, g.partner, float(horizon), rp, rt, ap, at)


def sample_graphical(g, lam: float, horizon: float, rng: np.random.Generator) -> GraphicalRecord:
    if horizon < 0:
        raise PreconditionError("horizon must be non-negative")
    n, d = g.n, g.d
    rc = rng.poisson(horizon, size=n).astype(np.int64)
    rt = rng.uniform(0.0, horizon, size=int(rc.sum()))
    ac = rng.poisson(lam * horizon, size=n * d).astype(np.int64)
    at = rng.uniform(0.0, horizon, size=int(ac.sum()))
    rp, rt = _segments_sorted(n, rc, rt)
    ap, at = _segments_sorted(n * d, ac, at)
    return GraphicalRecord(n, d, g.partner, float(horizon), rp, rt, ap, at)


def reverse(rec: GraphicalRecord) -> GraphicalRecord:
    """Time-reversed record: ``t -> horizon - t`` and every arrow flipped.

    The arrow on half-edge ``h`` moves to ``partner[h]``, so it points the
    other way along the same edge.
    """
    H = rec.horizon
    n, d = rec.n, rec.d
    rc = np.diff(rec.recovery_ptr)
    rt = np.concatenate([H - rec.recoveries(v)[::-1] for v in range(n)]) if n else np.empty(0)
    src = rec.partner  # new half-edge h takes the arrows of partner[h]
    ac = np.diff(rec.arrow_ptr)[src]
    parts = [H - rec.arrows(int(src[h]))[::-1] for h in range(n * d)]
    at = np.concatenate(parts) if parts else np.empty(0)
    rp = np.concatenate([[0], np.cumsum(rc)])
    ap = np.concatenate([[0], np.cumsum(ac)])
    return GraphicalRecord(n, d, rec.partner, H, rp, rt, ap, at)


@njit(cache=True)
def _sweep(t, kind, a, b, reached, query_time):
    """Propagate ``reached`` through the marks up to ``query_time``.

    Returns the time the reached set became empty, or ``inf``.
    """
    alive = 0
    for v in range(reached.shape[0]):
        if reached[v]:
            alive += 1
    if alive == 0:
        return 0.0
    for e in range(t.shape[0]):
        if t[e] > query_time:
            break
        if kind[e] == REC:
            if reached[a[e]]:
                reached[a[e]] = False
                alive -= 1
                if alive == 0:
                    return t[e]
        elif reached[a[e]] and not reached[b[e]]:
            reached[b[e]] = True
            alive += 1
    return np.inf


@njit(cache=True)
def _sweep_all(t, kind, a, b, reach, query_time):
    """Row ``u`` of ``reach[v, u]`` is true when v is reachable from source u."""
    for e in range(t.shape[0]):
        if t[e] > query_time:
            break
        x = a[e]
        if kind[e] == REC:
            for u in range(reach.shape[1]):
                reach[x, u] = False
        else:
            y = b[e]
            for u in range(reach.shape[1]):
                if reach[x, u]:
                    reach[y, u] = True


def _init_mask(n, init):
    mask = np.zeros(n, dtype=np.bool_)
    idx = np.asarray(list(init), dtype=np.int64)
    mask[idx] = True
    return mask


def percolate_mask(rec: GraphicalRecord, init, query_time: float) -> np.ndarray:
    if query_time > rec.horizon + 1e-12:
        raise PreconditionError(f"query_time {query_time} beyond horizon {rec.horizon}")
    reached = _init_mask(rec.n, init)
    _sweep(*rec.events, reached, float(query_time))
    return reached


def percolate(rec: GraphicalRecord, init, query_time: float) -> frozenset:
    """Vertices joined to ``init`` at time 0 by an active path ending at ``query_time``."""
    return frozenset(int(v) for v in np.flatnonzero(percolate_mask(rec, init, query_time)))


def extinction_time(rec: GraphicalRecord, init) -> float:
    """First time the process driven by ``rec`` from ``init`` is empty (``inf`` if never)."""
    reached = _init_mask(rec.n, init)
    return float(_sweep(*rec.events, reached, rec.horizon))


def reach_matrix(rec: GraphicalRecord, query_time: float | None = None) -> np.ndarray:
    """``R[u, v]`` is true when ``v`` is in ``percolate(rec, {u}, query_time)``."""
    q = rec.horizon if query_time is None else float(query_time)
    reach = np.eye(rec.n, dtype=np.bool_)
    _sweep_all(*rec.events, reach, q)
    return np.ascontiguousarray(reach.T)
