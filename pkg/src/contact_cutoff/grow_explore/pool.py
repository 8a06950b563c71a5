"""Pool of unmatched half-edges with O(1) uniform draw and delete."""
from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import ContractViolation, PreconditionError
from ..regular_graph import Multigraph, _check_nd, pair_shuffled

UNMATCHED = -1


@njit(cache=True)
def _pool_remove(items, pos, size, h):
    k = pos[h]
    last = items[size[0] - 1]
    items[k] = last
    pos[last] = k
    pos[h] = -1
    size[0] -= 1


@njit(cache=True)
def _pool_draw_other(items, size, h, rng):
    """Uniform draw from the pool minus ``h`` by rejection (pool must hold >= 2)."""
    while True:
        c = items[rng.integers(0, size[0])]
        if c != h:
            return c


@njit(cache=True)
def _match_fresh(items, pos, size, partner, h, rng):
    """Match unmatched ``h`` with a uniform other pool half-edge; return it."""
    c = _pool_draw_other(items, size, h, rng)
    partner[h] = c
    partner[c] = h
    _pool_remove(items, pos, size, h)
    _pool_remove(items, pos, size, c)
    return c


class HalfEdgePool:
    """Unmatched half-edges plus the partial partner map.

    ``items[:size]`` lists the pool; ``pos[h]`` is the index of ``h`` in it,
    or -1 once ``h`` is matched.  ``partner[h]`` is -1 while ``h`` is unmatched.
    """

    def __init__(self, n: int, d: int):
        _check_nd(n, d)
        self.n, self.d = int(n), int(d)
        m = self.n * self.d
        self.items = np.arange(m, dtype=np.int64)
        self.pos = np.arange(m, dtype=np.int64)
        self.size_arr = np.array([m], dtype=np.int64)
        self.partner = np.full(m, UNMATCHED, dtype=np.int64)

    @property
    def size(self) -> int:
        return int(self.size_arr[0])

    @property
    def matched_pairs(self) -> int:
        return (self.n * self.d - self.size) // 2

    def __len__(self) -> int:
        return self.size

    def __contains__(self, h) -> bool:
        return self.pos[int(h)] >= 0

    def unmatched(self) -> np.ndarray:
        return self.items[: self.size].copy()

    def match(self, h: int, rng: np.random.Generator) -> int:
        """Match ``h`` with a uniform draw from the rest of the pool."""
        if self.pos[h] < 0:
            raise PreconditionError(f"half-edge {h} is already matched")
        if self.size < 2:
            raise ContractViolation("pool holds fewer than two half-edges")
        return int(_match_fresh(self.items, self.pos, self.size_arr, self.partner, int(h), rng))

    def check(self) -> None:
        """Conservation and involution of the partial matching."""
        m = self.n * self.d
        in_pool = self.pos >= 0
        if in_pool.sum() != self.size or np.any(self.partner[in_pool] != UNMATCHED):
            raise ContractViolation("pool and partner map disagree")
        matched = ~in_pool
        p = self.partner[matched]
        if np.any(p < 0) or np.any(self.partner[p] != np.flatnonzero(matched)):
            raise ContractViolation("partial partner map is not an involution")
        if self.size + 2 * self.matched_pairs != m:
            raise ContractViolation("pool conservation violated")

    def complete(self, rng: np.random.Generator) -> Multigraph:
        """Pair the remaining pool uniformly and return the finished multigraph."""
        partner = self.partner.copy()
        if self.size:
            pair_shuffled(self.items[: self.size], partner, rng)
        return Multigraph(self.n, self.d, partner)

    def copy(self) -> "HalfEdgePool":
        c = HalfEdgePool.__new__(HalfEdgePool)
        c.n, c.d = self.n, self.d
        c.items, c.pos = self.items.copy(), self.pos.copy()
        c.size_arr, c.partner = self.size_arr.copy(), self.partner.copy()
        return c
