"""Experiment configuration with strict key checking."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

import numpy as np
import yaml

from ..errors import ConfigError
from ..tree_process import estimate_growth_rate, estimate_survival_prob

ANNEALED = "annealed"
QUENCHED = "quenched"
# keys that change how a run is executed but never what it outputs
RUNTIME_KEYS = ("workers", "out_dir")


@dataclass(frozen=True)
class ExperimentConfig:
    n: tuple = (1000, 10000)
    d: int = 3
    lam: float = 2.0
    eps: float = 0.1
    delta: float = 0.05
    replicas: int = 2000
    seed: int = 0
    c_hat: float | None = None
    c_se: float = 0.0
    p_hat: float | None = None
    p_se: float = 0.0
    mode: str = ANNEALED
    engine_threshold: int = 10_000
    simple: bool = True
    duality: bool = True
    census_g: tuple = (0.0, 0.05, 0.1, 0.2, 0.5)
    census_replicas: int = 200
    bootstrap: int = 200
    tree_replicas: int = 2000
    tree_horizon: float = 6.0
    tree_window: tuple = (2.0, 6.0)
    survival_threshold: int = 1000
    survival_t_cap: float = 50.0
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        n = self.n if isinstance(self.n, (list, tuple)) else (self.n,)
        object.__setattr__(self, "n", tuple(int(x) for x in n))
        object.__setattr__(self, "census_g", tuple(float(x) for x in self.census_g))
        object.__setattr__(self, "tree_window", tuple(float(x) for x in self.tree_window))
        self.validate()

    def validate(self) -> None:
        if self.d < 2:
            raise ConfigError("d must be at least 2")
        if not self.n or any(k < 2 for k in self.n):
            raise ConfigError("n must be a non-empty list of sizes >= 2")
        for k in self.n:
            if (k * self.d) % 2:
                raise ConfigError(f"n*d must be even, got n={k}, d={self.d}")
        if self.lam < 0:
            raise ConfigError("lam must be non-negative")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.replicas < 1 or self.census_replicas < 1 or self.tree_replicas < 1:
            raise ConfigError("replica counts must be positive")
        if self.mode not in (ANNEALED, QUENCHED):
            raise ConfigError(f"mode must be {ANNEALED!r} or {QUENCHED!r}")
        if self.c_hat is not None and self.c_hat <= 0 and self.lam > 0:
            raise ConfigError("c_hat must be positive")
        if self.p_hat is not None and not 0 <= self.p_hat <= 1:
            raise ConfigError("p_hat must lie in [0, 1]")
        lo, hi = self.tree_window
        if not 0 <= lo < hi <= self.tree_horizon:
            raise ConfigError("tree_window must satisfy 0 <= lo < hi <= tree_horizon")

    def require_cutoff_eps(self) -> None:
        """Cutoff and intersection runs need ``0 < eps < 1/8``."""
        if not 0 < self.eps < 0.125:
            raise ConfigError(f"eps must lie in (0, 1/8), got {self.eps}")

    def require_constants(self) -> None:
        if self.c_hat is None or self.p_hat is None:
            raise ConfigError("c_hat and p_hat must be set (estimate them on the tree first)")

    def t_plus(self, n: int) -> float:
        return (1 + self.eps) * np.log(n) / self.c_hat

    def t_minus(self, n: int) -> float:
        return (1 - self.eps) * np.log(n) / self.c_hat

    def t_pair(self, n: int) -> tuple[float, float]:
        """``(t1, t2)`` of the two-source intersection."""
        L = np.log(n) / (2 * self.c_hat)
        return (1 - self.eps) * L, (1 + 3 * self.eps) * L

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self, runtime: bool = False) -> dict:
        out = {}
        for f in fields(self):
            if f.name in RUNTIME_KEYS and not runtime:
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_mapping(cls, data: dict | None) -> "ExperimentConfig":
        return build_config(cls, data)


def build_config(cls, data: dict | None):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys."""
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config_file(path) -> dict:
    """Read a YAML mapping; an empty file gives an empty mapping."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def with_tree_constants(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill missing ``c_hat``/``p_hat`` from tree simulations and freeze them in."""
    changes = {}
    if cfg.c_hat is None:
        ge = estimate_growth_rate(cfg.d, cfg.lam, cfg.tree_replicas, cfg.tree_horizon,
                                  cfg.tree_window, seed=cfg.seed, workers=cfg.workers)
        changes.update(c_hat=ge.c_hat, c_se=ge.c_se)
    if cfg.p_hat is None:
        se = estimate_survival_prob(cfg.d, cfg.lam, cfg.tree_replicas, cfg.survival_threshold,
                                    cfg.survival_t_cap, seed=cfg.seed, workers=cfg.workers)
        changes.update(p_hat=se.p_hat, p_se=se.p_se)
    return cfg.replace(**changes) if changes else cfg
