"""Graph sampling and report plumbing shared by the experiment drivers."""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from ..regular_graph import Multigraph, sample_matching, sample_simple


def sample_graph(n: int, d: int, rng: np.random.Generator, simple: bool = True) -> Multigraph:
    return sample_simple(n, d, rng) if simple else sample_matching(n, d, rng)


def distinct_pair(n: int, rng: np.random.Generator) -> tuple[int, int]:
    u, v = rng.choice(n, size=2, replace=False)
    return int(u), int(v)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def write_json(path, payload: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return str(path)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if np.isfinite(v) else ("inf" if v > 0 else "nan" if np.isnan(v) else "-inf")
    return v


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
    return str(path)


def write_dat(path, columns: list[str], rows) -> str:
    """Whitespace-separated data with a ``#`` header, readable by gnuplot."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for r in rows:
            fh.write(" ".join(str(_cell(v)) for v in r) + "\n")
    return str(path)
