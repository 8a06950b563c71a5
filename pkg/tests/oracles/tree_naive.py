"""Pure-Python contact process on ``T_d`` with vertices as address words.

Deliberately naive: explicit neighbor lists per word and a full rate scan
per step.  Used only as an independent reference for the arena simulator.
"""
from __future__ import annotations

import numpy as np


def tree_neighbors(w: tuple, d: int, severed: bool) -> list:
    if not w:
        return [(0,)] if severed else [(j,) for j in range(d)]
    return [w[:-1]] + [w + (j,) for j in range(1, d)]


def simulate(d: int, lam: float, horizon: float, rng, severed: bool = False):
    """Return ``(infected, ever)`` sets of words at ``horizon``."""
    infected = {()}
    ever = {()}
    t = 0.0
    while infected:
        inf = sorted(infected)
        rates = []
        for w in inf:
            rates.append(("rec", w, w, 1.0))
            for y in tree_neighbors(w, d, severed):
                rates.append(("inf", w, y, lam))
        total = sum(r[3] for r in rates)
        t += rng.exponential(1.0 / total)
        if t > horizon:
            break
        u = rng.random() * total
        acc = 0.0
        for kind, x, y, r in rates:
            acc += r
            if u < acc:
                break
        if kind == "rec":
            infected.discard(x)
        else:
            infected.add(y)
            ever.add(y)
    return infected, ever
