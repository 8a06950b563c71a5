"""Event logs of grow-and-explore runs, written as JSON lines."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..contact_engine.gillespie import EVENT_KINDS


@njit(cache=True)
def _log_append(buf, count, t, kind, source, target, new_edge):
    """Append a row to a ``(cap, 5)`` float buffer, doubling it when full."""
    if count >= buf.shape[0]:
        nb = np.zeros((2 * buf.shape[0] + 16, 5))
        nb[:count] = buf[:count]
        buf = nb
    buf[count, 0] = t
    buf[count, 1] = kind
    buf[count, 2] = source
    buf[count, 3] = target
    buf[count, 4] = 1.0 if new_edge else 0.0
    return buf


@dataclass(frozen=True)
class EventLog:
    """One row per event: time, kind code, source, target, new-edge flag."""

    time: np.ndarray
    kind: np.ndarray
    source: np.ndarray
    target: np.ndarray
    new_edge: np.ndarray

    def __len__(self) -> int:
        return int(self.time.shape[0])

    def records(self):
        for i in range(len(self)):
            yield {
                "time": float(self.time[i]),
                "kind": EVENT_KINDS[int(self.kind[i])],
                "source": int(self.source[i]),
                "target": int(self.target[i]),
                "new_edge": bool(self.new_edge[i]),
            }

    def write_jsonl(self, sink) -> None:
        if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
            with open(sink, "w", encoding="utf-8", newline="\n") as fh:
                self.write_jsonl(fh)
            return
        for rec in self.records():
            sink.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(source) -> list[dict]:
    with open(source, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def empty_log() -> EventLog:
    z = np.zeros(0, dtype=np.int64)
    return EventLog(np.zeros(0), z.astype(np.int8), z, z, z.astype(np.bool_))


def make_log(buf: np.ndarray, count: int) -> EventLog:
    b = buf[:count]
    return EventLog(b[:, 0].copy(), b[:, 1].astype(np.int8), b[:, 2].astype(np.int64),
                    b[:, 3].astype(np.int64), b[:, 4] > 0.5)
