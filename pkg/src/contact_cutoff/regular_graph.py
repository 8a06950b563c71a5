"""Random d-regular (multi)graphs from the configuration model.

A graph on ``n`` vertices of degree ``d`` is stored as an involution on
the ``n*d`` half-edges.  Half-edge ``(vertex, slot)`` has id
``vertex * d + slot``; ``partner[h]`` is the half-edge matched to ``h``.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ExhaustionError,
    GraphFormatError,
    GraphValidationError,
    PreconditionError,
)

DEFAULT_MAX_ATTEMPTS = 1000


def half_edge_id(vertex: int, slot: int, d: int) -> int:
    return vertex * d + slot


def half_edge_of(h: int, d: int) -> tuple[int, int]:
    return divmod(h, d)


@dataclass(frozen=True, eq=False)
class Multigraph:
    """A d-regular multigraph given by a perfect matching of half-edges.

    Self-loops and parallel edges are allowed.  A self-loop uses two
    slots of the same vertex and contributes 2 to its degree.
    """

    n: int
    d: int
    partner: np.ndarray
    attempts: int = field(default=1, compare=False)

    def __post_init__(self):
        p = np.asarray(self.partner, dtype=np.int64)
        p.flags.writeable = False
        object.__setattr__(self, "partner", p)

    @cached_property
    def targets(self) -> np.ndarray:
        """Vertex reached through each half-edge, shape ``(n*d,)``."""
        t = self.partner // self.d
        t.flags.writeable = False
        return t

    @property
    def neighbors(self) -> np.ndarray:
        """Neighbor multiset per vertex in slot order, shape ``(n, d)``."""
        return self.targets.reshape(self.n, self.d)

    def edges(self) -> np.ndarray:
        """One row ``(u, v)`` per matched pair, ``u`` owning the smaller half-edge."""
        h = np.arange(self.n * self.d)
        keep = h < self.partner
        return np.stack([h[keep] // self.d, self.partner[keep] // self.d], axis=1)

    def check(self) -> None:
        """Raise if ``partner`` is not a fixed-point-free involution."""
        p = self.partner
        m = self.n * self.d
        if p.shape != (m,):
            raise GraphValidationError(f"partner has shape {p.shape}, expected ({m},)")
        if p.min(initial=0) < 0 or p.max(initial=0) >= m:
            raise GraphValidationError("partner entry out of range")
        h = np.arange(m)
        if np.any(p[p] != h):
            raise GraphValidationError("partner is not an involution")
        if np.any(p == h):
            raise GraphValidationError("partner has a fixed point")

    def label_key(self) -> bytes:
        """Canonical key of the labeled (multi)graph, independent of slot order."""
        e = np.sort(self.edges(), axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        return e.astype(np.int64).tobytes()


@dataclass(frozen=True, eq=False)
class SimpleRegularGraph(Multigraph):
    """A simple d-regular graph; ``adjacency[v]`` is sorted ascending."""

    adjacency: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        super().__post_init__()
        if self.adjacency is None:
            adj = np.sort(self.neighbors, axis=1)
        else:
            adj = np.asarray(self.adjacency, dtype=np.int64)
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_multigraph(cls, g: Multigraph) -> "SimpleRegularGraph":
        if not is_simple(g):
            raise GraphValidationError("graph has a self-loop or a multi-edge")
        return cls(g.n, g.d, g.partner, attempts=g.attempts)

    @classmethod
    def from_adjacency(cls, adjacency) -> "SimpleRegularGraph":
        """Build from per-vertex neighbor lists, validating simplicity and regularity."""
        adj = np.asarray(adjacency, dtype=np.int64)
        if adj.ndim != 2:
            raise GraphValidationError("adjacency must be an (n, d) array")
        n, d = adj.shape
        adj = np.sort(adj, axis=1)
        if np.any(adj < 0) or np.any(adj >= n):
            raise GraphValidationError("neighbor id out of range")
        if np.any(adj == np.arange(n)[:, None]):
            raise GraphValidationError("self-loop")
        if d > 1 and np.any(adj[:, 1:] == adj[:, :-1]):
            raise GraphValidationError("repeated neighbor")
        # slot i of u is its i-th smallest neighbor; pair it with the slot of u in v's list
        partner = np.empty(n * d, dtype=np.int64)
        for u in range(n):
            for i, v in enumerate(adj[u]):
                j = np.searchsorted(adj[v], u)
                if j >= d or adj[v, j] != u:
                    raise GraphValidationError(f"edge {u}-{v} is not symmetric")
                partner[u * d + i] = v * d + j
        return cls(n, d, partner, adjacency=adj)


def _check_nd(n: int, d: int) -> None:
    if n < 1 or d < 1:
        raise PreconditionError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if (n * d) % 2:
        raise PreconditionError(f"n*d must be even, got n={n}, d={d}")


def pair_shuffled(halfedges: np.ndarray, partner: np.ndarray, rng: np.random.Generator) -> None:
    """Uniformly match the given half-edges among themselves, in place on ``partner``."""
    perm = rng.permutation(halfedges)
    a, b = perm[0::2], perm[1::2]
    partner[a] = b
    partner[b] = a


def sample_matching(n: int, d: int, rng: np.random.Generator) -> Multigraph:
    """Configuration model: a uniform perfect matching of the ``n*d`` half-edges."""
    _check_nd(n, d)
    partner = np.empty(n * d, dtype=np.int64)
    pair_shuffled(np.arange(n * d, dtype=np.int64), partner, rng)
    return Multigraph(n, d, partner)


def is_simple(g: Multigraph) -> bool:
    e = g.edges()
    if np.any(e[:, 0] == e[:, 1]):
        return False
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keys = np.sort(lo * g.n + hi)
    return not np.any(keys[1:] == keys[:-1])


def simple_exists(n: int, d: int) -> bool:
    return (n * d) % 2 == 0 and 0 <= d < n


def sample_simple(
    n: int, d: int, rng: np.random.Generator, max_attempts: int = DEFAULT_MAX_ATTEMPTS
) -> SimpleRegularGraph:
    """Uniform simple d-regular graph by rejection from the configuration model."""
    _check_nd(n, d)
    if not simple_exists(n, d):
        raise PreconditionError(f"no simple {d}-regular graph on {n} vertices")
    for attempt in range(1, max_attempts + 1):
        g = sample_matching(n, d, rng)
        if is_simple(g):
            return SimpleRegularGraph(n, d, g.partner, attempts=attempt)
    raise ExhaustionError(
        f"no simple graph after {max_attempts} configuration-model draws (n={n}, d={d})",
        attempts=max_attempts,
    )


def write_graph(g: Multigraph, sink) -> None:
    """Write ``g`` as text: a header ``n d`` then one sorted neighbor line per vertex.

    A multigraph is written in the same layout (a self-loop lists the vertex
    twice); only simple graphs read back through ``read_graph``.
    """
    if isinstance(g, SimpleRegularGraph):
        rows = g.adjacency
    else:
        rows = np.sort(g.neighbors, axis=1)
    buf = io.StringIO()
    buf.write(f"{g.n} {g.d}\n")
    for row in rows:
        buf.write(" ".join(str(int(x)) for x in row))
        buf.write("\n")
    text = buf.getvalue()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def read_graph(source) -> SimpleRegularGraph:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    else:
        lines = source.read().splitlines()
    if not lines:
        raise GraphFormatError("empty file", line=1)
    header = lines[0].split()
    try:
        n, d = (int(x) for x in header)
    except ValueError:
        raise GraphFormatError(f"expected header 'n d', got {lines[0]!r}", line=1) from None
    if n < 1 or d < 0:
        raise GraphFormatError(f"invalid header values n={n}, d={d}", line=1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise GraphFormatError(f"expected {n} adjacency lines, found {len(body)}", line=len(body) + 2)
    adj = []
    for i, raw in enumerate(body):
        lineno = i + 2
        try:
            row = [int(x) for x in raw.split()]
        except ValueError:
            raise GraphFormatError(f"non-integer neighbor id in {raw!r}", line=lineno) from None
        for x in row:
            if x < 0 or x >= n:
                raise GraphFormatError(f"neighbor id {x} outside [0, {n})", line=lineno)
        if len(row) != d:
            raise GraphValidationError(f"vertex {i} has degree {len(row)}, expected {d} (line {lineno})")
        if row != sorted(row):
            raise GraphFormatError("neighbor ids must be sorted ascending", line=lineno)
        adj.append(row)
    return SimpleRegularGraph.from_adjacency(np.array(adj, dtype=np.int64).reshape(n, d))
