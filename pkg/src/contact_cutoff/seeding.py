"""Reproducible per-replica random streams.

Every replica draws from its own generator derived from
``(master_seed, experiment, index)`` so results do not depend on how
replicas are scheduled across workers.
"""
from __future__ import annotations

import zlib

import numpy as np


def experiment_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def replica_seed(master_seed: int, experiment: str, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), experiment_key(experiment), int(index)])


def replica_rng(master_seed: int, experiment: str, index: int) -> np.random.Generator:
    return np.random.default_rng(replica_seed(master_seed, experiment, index))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
