"""Border points and pioneer points of finite subsets of ``T_d``.

A vertex ``v`` of a finite set ``S`` is a border point when one of the
``d`` components of ``T_d`` minus ``v`` holds no other vertex of ``S``.
Every finite ``S`` satisfies ``|B(S)| >= (1 - 1/(d-1)) |S|``.

Vertices of ``T_d`` are addressed by words: the root is ``()``, the root's
neighbors are ``(0,)..(d-1,)`` and a non-root vertex ``w`` has children
``w + (j,)`` for ``j`` in ``1..d-1`` (slot 0 being the parent).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ContractViolation
from .lazy_tree import BLOCKED, UNALLOCATED, LazyTreeState


def cheeger_constant(d: int) -> float:
    return 1.0 - 1.0 / (d - 1)


def cheeger_bound(d: int, size: int) -> int:
    """Smallest integer border count allowed for a set of ``size`` vertices."""
    return math.ceil(cheeger_constant(d) * size - 1e-12)


def _child_labels(word: tuple, d: int) -> range:
    return range(d) if not word else range(1, d)


def border_points(S, d: int) -> set:
    """Border points of a finite connected ``S`` containing the root.

    Component counts are computed from prefix counts, so the result does not
    rely on connectivity; connectivity is still checked because it is a
    precondition of the callers' fast rules.
    """
    S = {tuple(w) for w in S}
    if () not in S:
        raise ContractViolation("S must contain the root")
    for w in S:
        if w[:-1] not in S:
            raise ContractViolation(f"S is not connected: {w} has no parent in S")
        if w and not (0 <= w[0] < d and all(1 <= j < d for j in w[1:])):
            raise ContractViolation(f"invalid address {w} for d={d}")
    below = {}
    for w in S:
        for k in range(len(w) + 1):
            below[w[:k]] = below.get(w[:k], 0) + 1
    total = len(S)
    out = set()
    for v in S:
        # component through the parent holds everything outside v's subtree
        if v and total - below[v] == 0:
            out.add(v)
            continue
        if any(below.get(v + (j,), 0) == 0 for j in _child_labels(v, d)):
            out.add(v)
    return out


def count_border_points(S, d: int) -> int:
    return len(border_points(S, d))


@njit(cache=True)
def _component_border(child, d, nodes, in_s):
    """Border flag per arena node for ``S = {x : in_s[x]}``.

    Allocation order is a topological order (parents first), so a reverse
    sweep accumulates subtree counts of ``S``.
    """
    below = np.zeros(nodes, dtype=np.int64)
    for x in range(nodes - 1, -1, -1):
        c = 1 if in_s[x] else 0
        for j in range(d):
            y = child[x * d + j]
            if y > x:
                c += below[y]
        below[x] = c
    total = below[0]
    border = np.zeros(nodes, dtype=np.bool_)
    for x in range(nodes):
        if not in_s[x]:
            continue
        for j in range(d):
            y = child[x * d + j]
            if y == UNALLOCATED or y == BLOCKED:
                cnt = 0
            elif y > x:
                cnt = below[y]
            else:
                cnt = total - below[x]
            if cnt == 0:
                border[x] = True
                break
    return border


def border_mask_bruteforce(state: LazyTreeState, in_s: np.ndarray | None = None) -> np.ndarray:
    """Border flags of ``S`` (default: the ever-infected set) by component counts."""
    nodes = state.ever_count
    if in_s is None:
        in_s = np.ones(nodes, dtype=np.bool_)
    return _component_border(state.child, state.d, nodes, np.asarray(in_s, dtype=np.bool_))


def pioneer_mask(state: LazyTreeState) -> np.ndarray:
    """Fast rule: infected and with a never-infected neighbor."""
    nodes = state.ever_count
    return state.inf[:nodes] & (state.free[:nodes] > 0)


def pioneer_mask_bruteforce(state: LazyTreeState) -> np.ndarray:
    return state.inf[: state.ever_count] & border_mask_bruteforce(state)


@dataclass(frozen=True)
class PioneerReport:
    pioneer_count: int
    border_count: int
    infected_count: int
    ever_count: int
    time: float


def pioneer_points(state: LazyTreeState) -> PioneerReport:
    """Pioneer points of the current state.

    In severed mode these are the points called psi_t; the removed root
    edges count as never-infected neighbors.
    """
    return PioneerReport(
        pioneer_count=state.pioneer_count,
        border_count=state.border_count,
        infected_count=state.infected_count,
        ever_count=state.ever_count,
        time=state.clock,
    )


def state_words(state: LazyTreeState, nodes=None) -> list:
    if nodes is None:
        nodes = range(state.ever_count)
    return [state.word(int(x)) for x in nodes]
