"""Command-line entry point: ``contact-cutoff <command> [options]``.

Every command resolves its configuration from the shipped default for that
command, then an optional ``--config`` file, then explicit flags, and writes
``manifest.json`` next to its outputs.  Passing a manifest back through
``--config`` re-runs the command with the recorded configuration and seed.

Exit codes: 0 success, 1 internal invariant failure, 2 usage or config
error, 3 I/O error, 4 capacity exceeded (partial results flagged).
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import __version__
from .contact_engine import InfectionState, run_until
from .errors import CapacityError, ConfigError, ContactCutoffError, ContractViolation, PreconditionError
from .experiments import (
    ExperimentConfig,
    build_config,
    cutoff_experiment,
    density_experiment,
    good_pair_census,
    intersection_experiment,
    load_config_file,
    with_tree_constants,
)
from .experiments.common import write_csv, write_dat, write_json
from .experiments.config import RUNTIME_KEYS
from .experiments.stats import mean_ci, proportion
from .parallel import map_replicas
from .regular_graph import Multigraph, read_graph, sample_matching, sample_simple, write_graph
from .seeding import replica_rng
from .tree_process import (
    FULL,
    SEVERED,
    LazyTreeState,
    estimate_growth_rate,
    estimate_survival_prob,
    tree_grid,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CAPACITY = 4


@dataclass(frozen=True)
class GenConfig:
    n: int = 100
    d: int = 3
    simple: bool = False
    seed: int = 0
    out: str = "graph.txt"


@dataclass(frozen=True)
class SimulateConfig:
    graph: str | None = None
    n: int = 100
    d: int = 3
    simple: bool = True
    lam: float = 2.0
    init: tuple = (0,)
    targets: tuple = ()
    horizon: float = 5.0
    grid_step: float = 0.1
    replicas: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init", tuple(int(x) for x in self.init))
        object.__setattr__(self, "targets", tuple(int(x) for x in self.targets))
        if self.horizon < 0 or self.grid_step <= 0 or self.replicas < 1:
            raise ConfigError("horizon >= 0, grid_step > 0 and replicas >= 1 are required")


@dataclass(frozen=True)
class TreeConfig:
    d: int = 3
    lam: float = 2.0
    horizon: float = 6.0
    replicas: int = 1000
    mode: str = FULL
    grid_step: float = 0.1
    max_nodes: int = 10**8
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (FULL, SEVERED):
            raise ConfigError(f"mode must be {FULL!r} or {SEVERED!r}")
        if self.horizon < 0 or self.grid_step <= 0 or self.replicas < 1 or self.d < 2:
            raise ConfigError("horizon >= 0, grid_step > 0, replicas >= 1 and d >= 2 are required")


@dataclass(frozen=True)
class EstimateConfig:
    d: int = 3
    lam: float = 2.0
    replicas: int = 2000
    horizon: float = 6.0
    window: tuple = (2.0, 6.0)
    mode: str = FULL
    survival_replicas: int = 2000
    threshold: int = 1000
    t_cap: float = 50.0
    bootstrap: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(float(x) for x in self.window))
        if self.mode not in (FULL, SEVERED):
            raise ConfigError(f"mode must be {FULL!r} or {SEVERED!r}")
        lo, hi = self.window
        if not 0 <= lo < hi <= self.horizon:
            raise ConfigError("window must satisfy 0 <= lo < hi <= horizon")


SCHEMAS = {
    "gen": GenConfig,
    "simulate": SimulateConfig,
    "tree": TreeConfig,
    "estimate": EstimateConfig,
    "cutoff": ExperimentConfig,
    "density": ExperimentConfig,
    "intersect": ExperimentConfig,
    "census": ExperimentConfig,
}


def _plain(cfg) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        if f.name in RUNTIME_KEYS:
            continue
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def default_config(command: str) -> dict:
    """Shipped defaults for ``command`` (empty when none are shipped)."""
    res = resources.files("contact_cutoff") / "configs" / f"{command}.yaml"
    if not res.is_file():
        return {}
    with resources.as_file(res) as path:
        return load_config_file(path)


def _read_config(path, command):
    """``(mapping, is_manifest)`` from a YAML config or a run manifest."""
    data = load_config_file(path)
    if "command" in data and "config" in data and "version" in data:
        if data["command"] != command:
            raise ConfigError(f"manifest is for {data['command']!r}, not {command!r}")
        return dict(data["config"]), True
    return data, False


class Run:
    """Output bookkeeping for one command invocation."""

    def __init__(self, command, out_dir, cfg, threads, argv):
        self.command = command
        self.out_dir = out_dir
        self.cfg = cfg
        self.threads = threads
        self.argv = argv
        self.outputs = []
        self.status = "ok"
        self.partial = False
        self.t0 = time.perf_counter()

    def path(self, name) -> str:
        return name if os.path.isabs(name) else os.path.join(self.out_dir, name)

    def add(self, path) -> str:
        self.outputs.append(os.path.relpath(path, self.out_dir))
        return path

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "config": _plain(self.cfg),
            "seed": int(self.cfg.seed),
            "version": __version__,
            "duration_s": round(time.perf_counter() - self.t0, 3),
            "outputs": sorted(set(self.outputs)),
            "status": self.status,
            "partial": self.partial,
            "runtime": {"threads": self.threads, "out_dir": os.path.abspath(self.out_dir)},
            "argv": self.argv,
        }

    def write_manifest(self) -> str:
        return write_json(os.path.join(self.out_dir, "manifest.json"), self.manifest())


# ---------------------------------------------------------------- commands

def cmd_gen(run: Run, plot: bool) -> int:
    cfg = run.cfg
    rng = replica_rng(cfg.seed, "cli-gen", 0)
    g = sample_simple(cfg.n, cfg.d, rng) if cfg.simple else sample_matching(cfg.n, cfg.d, rng)
    path = run.path(cfg.out)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    write_graph(g, path)
    run.add(path)
    return EXIT_OK


def _simulate_job(args):
    seed, index, partner_or_none, n, d, simple, lam, init, targets, horizon, step = args
    rng = replica_rng(seed, "cli-simulate", index)
    if partner_or_none is None:
        g = sample_simple(n, d, rng) if simple else sample_matching(n, d, rng)
    else:
        g = Multigraph(n, d, partner_or_none)
    res = run_until(g, lam, init, horizon, targets=targets or None, rng=rng, grid_step=step,
                    stop_on_hit=False, state=InfectionState(n, init))
    return res.times, res.infected, res.ever_infected, res.outcome.as_dict()


def cmd_simulate(run: Run, plot: bool) -> int:
    cfg = run.cfg
    if cfg.graph:
        g = read_graph(cfg.graph)
        n, d, partner = g.n, g.d, np.asarray(g.partner)
    else:
        n, d, partner = cfg.n, cfg.d, None
        if (n * d) % 2:
            raise PreconditionError(f"n*d must be even, got n={n}, d={d}")
    for v in cfg.init + cfg.targets:
        if not 0 <= v < n:
            raise PreconditionError(f"vertex {v} outside [0, {n})")
    jobs = [(cfg.seed, i, partner, n, d, cfg.simple, cfg.lam, list(cfg.init), list(cfg.targets),
             cfg.horizon, cfg.grid_step) for i in range(cfg.replicas)]
    res = map_replicas(_simulate_job, jobs, run.threads)
    rows = []
    grid = tree_grid(cfg.horizon, cfg.grid_step)
    mean = np.zeros(grid.size)
    for i, (times, inf, ever, _) in enumerate(res):
        full = np.zeros(grid.size, dtype=np.int64)
        full[: inf.size] = inf
        mean += full
        for t, a, b in zip(times, inf, ever):
            rows.append({"replica": i, "t": round(float(t), 10), "infected": int(a), "ever": int(b)})
    run.add(write_csv(run.path("simulate_series.csv"), rows, ["replica", "t", "infected", "ever"]))
    outcomes = [o for *_, o in res]
    ext = sum(o["extinction_time"] is not None for o in outcomes)
    summary = {
        "config": _plain(cfg), "seed": cfg.seed, "n": n, "d": d,
        "extinct_by_horizon": proportion(ext, len(outcomes)),
        "final_infected": mean_ci([o["final_infected_count"] for o in outcomes]),
    }
    if cfg.targets:
        summary["hit_by_horizon"] = proportion(sum(o["hit"] for o in outcomes), len(outcomes))
    run.add(write_json(run.path("simulate_summary.json"), summary))
    if plot:
        run.add(write_dat(run.path("simulate_mean.dat"), ["t", "mean_infected"],
                          zip(np.round(grid, 10), mean / len(res))))
    return EXIT_OK


def _tree_job(args):
    seed, index, d, lam, horizon, mode, step, max_nodes = args
    st = LazyTreeState(d, mode, max_nodes=max_nodes)
    grid = tree_grid(horizon, step)
    capped = False
    try:
        _, out = st.advance(horizon, lam, replica_rng(seed, "cli-tree", index), grid)
    except CapacityError as exc:
        out, capped = exc.partial, True
    return out, st.extinction_time, capped


def cmd_tree(run: Run, plot: bool) -> int:
    cfg = run.cfg
    jobs = [(cfg.seed, i, cfg.d, cfg.lam, cfg.horizon, cfg.mode, cfg.grid_step, cfg.max_nodes)
            for i in range(cfg.replicas)]
    res = map_replicas(_tree_job, jobs, run.threads)
    grid = tree_grid(cfg.horizon, cfg.grid_step)
    rows, mean = [], np.zeros(grid.size)
    ext_times, capped = [], 0
    for i, (out, ext, cap) in enumerate(res):
        capped += cap
        if ext is not None:
            ext_times.append(ext)
        mean[: len(out)] += out[:, 0]
        for k in range(len(out)):
            rows.append({"replica": i, "t": round(float(grid[k]), 10), "infected": int(out[k, 0]),
                         "ever": int(out[k, 1]), "pioneers": int(out[k, 2]), "partial": cap})
    run.add(write_csv(run.path("tree_series.csv"), rows,
                      ["replica", "t", "infected", "ever", "pioneers", "partial"]))
    summary = {
        "config": _plain(cfg), "seed": cfg.seed, "replicas": cfg.replicas,
        "extinct": proportion(len(ext_times), cfg.replicas),
        "mean_extinction_time": mean_ci(ext_times) if ext_times else None,
        "censored": cfg.replicas - len(ext_times) - capped,
        "capacity_exceeded": capped,
        "mean_infected_at_horizon": float(mean[-1] / cfg.replicas) if grid.size else None,
    }
    run.add(write_json(run.path("tree_summary.json"), summary))
    if plot:
        run.add(write_dat(run.path("tree_mean.dat"), ["t", "mean_infected"],
                          zip(np.round(grid, 10), mean / cfg.replicas)))
    if capped:
        run.partial = True
        run.status = "capacity_exceeded"
        return EXIT_CAPACITY
    return EXIT_OK


def cmd_estimate(run: Run, plot: bool) -> int:
    cfg = run.cfg
    ge = estimate_growth_rate(cfg.d, cfg.lam, cfg.replicas, cfg.horizon, cfg.window, mode=cfg.mode,
                              seed=cfg.seed, workers=run.threads, bootstrap=cfg.bootstrap)
    se = estimate_survival_prob(cfg.d, cfg.lam, cfg.survival_replicas, cfg.threshold, cfg.t_cap,
                                mode=cfg.mode, seed=cfg.seed, workers=run.threads)
    payload = {
        "config": _plain(cfg), "seed": cfg.seed,
        "c_hat": ge.c_hat, "c_se": ge.c_se, "window": list(ge.window), "r2": ge.r2,
        "replicas": ge.replicas, "p_hat": se.p_hat, "p_se": se.p_se,
        "survival_replicas": se.replicas, "threshold": se.threshold, "t_cap": se.t_cap,
    }
    run.add(write_json(run.path("estimate.json"), payload))
    return EXIT_OK


def _experiment_outputs(run: Run, name: str, report, plot: bool) -> None:
    run.add(write_json(run.path(f"{name}_report.json"), report.as_dict()))
    rows = report.summary_rows()
    run.add(write_csv(run.path(f"{name}_summary.csv"), rows))
    run.add(write_csv(run.path(f"{name}_replicas.csv"), report.replicas))


def _resolved_experiment(run: Run) -> ExperimentConfig:
    cfg = with_tree_constants(run.cfg.replace(workers=run.threads))
    run.cfg = cfg
    return cfg


def cmd_cutoff(run: Run, plot: bool) -> int:
    cfg = _resolved_experiment(run)
    report = cutoff_experiment(cfg)
    _experiment_outputs(run, "cutoff", report, plot)
    if plot:
        for n in cfg.n:
            h = np.sort([r["hit_time"] for r in report.replicas if r["n"] == n])
            h = h[np.isfinite(h)]
            R = sum(r["n"] == n for r in report.replicas)
            run.add(write_dat(run.path(f"cutoff_ecdf_n{n}.dat"), ["t", "normalized_t", "ecdf"],
                              [(t, t * cfg.c_hat / np.log(n), (k + 1) / R) for k, t in enumerate(h)]))
    return EXIT_OK


def cmd_density(run: Run, plot: bool) -> int:
    cfg = _resolved_experiment(run)
    report = density_experiment(cfg)
    _experiment_outputs(run, "density", report, plot)
    if plot:
        for n in cfg.n:
            dens = [r["density"] for r in report.replicas if r["n"] == n]
            counts, edges = np.histogram(dens, bins=20, range=(0.0, 1.0))
            run.add(write_dat(run.path(f"density_hist_n{n}.dat"), ["bin_lo", "bin_hi", "count"],
                              zip(edges[:-1], edges[1:], counts)))
    return EXIT_OK


def cmd_intersect(run: Run, plot: bool) -> int:
    cfg = _resolved_experiment(run)
    report = intersection_experiment(cfg)
    _experiment_outputs(run, "intersect", report, plot)
    return EXIT_OK


def cmd_census(run: Run, plot: bool) -> int:
    cfg = _resolved_experiment(run)
    report = good_pair_census(cfg)
    run.add(write_json(run.path("census_report.json"), report.as_dict()))
    run.add(write_csv(run.path("census_thresholds.csv"),
                      [{k: v for k, v in r.items() if not isinstance(v, list)} for r in report.rows]))
    if plot:
        run.add(write_dat(run.path("census_fractions.dat"),
                          ["threshold", "good_pair_fraction", "good_vertex_fraction"],
                          [(r["threshold"], r["good_pair_fraction"], r["good_vertex_fraction"])
                           for r in report.rows]))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "simulate": cmd_simulate, "tree": cmd_tree, "estimate": cmd_estimate,
    "cutoff": cmd_cutoff, "density": cmd_density, "intersect": cmd_intersect, "census": cmd_census,
}


# ---------------------------------------------------------------- parsing

def _int_list(s: str):
    return [int(float(x)) for x in s.replace(",", " ").split()]


def _float_list(s: str):
    return [float(x) for x in s.replace(",", " ").split()]


def _global_parser(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
    p.add_argument("--seed", type=int, help="master seed (default: from config, else 0)")
    p.add_argument("--threads", type=int, help="worker processes (default: available cores)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default: current)")
    p.add_argument("--config", help="YAML config file or a manifest.json to re-run")
    p.add_argument("--plot", action="store_true", help="also write gnuplot data files")
    return p


def build_parser() -> argparse.ArgumentParser:
    glob = _global_parser(suppress=True)
    parser = argparse.ArgumentParser(prog="contact-cutoff", parents=[_global_parser(suppress=True)],
                                     description="Contact process cutoff experiments on random regular graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    S = argparse.SUPPRESS

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[glob], argument_default=S)

    p = add("gen", "sample a random regular graph")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--simple", action="store_true", default=S, help="condition on a simple graph")
    p.add_argument("--out", help="graph file (relative to --out-dir)")

    p = add("simulate", "contact process on a finite graph")
    p.add_argument("--graph", help="graph file; otherwise a fresh graph per replica")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--init", type=_int_list)
    p.add_argument("--targets", type=_int_list)
    p.add_argument("--horizon", type=float)
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--replicas", type=int)

    p = add("tree", "contact process on the infinite regular tree")
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--mode", choices=[FULL, SEVERED])
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--max-nodes", dest="max_nodes", type=int)

    p = add("estimate", "estimate the tree growth rate and survival probability")
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--window", type=_float_list)
    p.add_argument("--mode", choices=[FULL, SEVERED])
    p.add_argument("--survival-replicas", dest="survival_replicas", type=int)
    p.add_argument("--threshold", type=int)

    for name, help_ in (("cutoff", "hitting-time cutoff experiment"),
                        ("density", "density from full occupancy"),
                        ("intersect", "two-source intersection experiment"),
                        ("census", "good-pair census on a small fixed graph")):
        p = add(name, help_)
        p.add_argument("--n", type=_int_list, help="sizes, e.g. '1000,10000'")
        p.add_argument("--d", type=int)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--replicas", type=int)
        p.add_argument("--c-hat", dest="c_hat", type=float)
        p.add_argument("--p-hat", dest="p_hat", type=float)
        p.add_argument("--p-se", dest="p_se", type=float)
        p.add_argument("--mode", choices=["annealed", "quenched"])
        p.add_argument("--census-replicas", dest="census_replicas", type=int)
    return parser


GLOBAL_KEYS = ("seed", "threads", "out_dir", "config", "plot", "command")


def resolve(command: str, args: argparse.Namespace):
    """Config object from shipped defaults, then ``--config``, then flags."""
    schema = SCHEMAS[command]
    data = default_config(command)
    ns = vars(args)
    if ns.get("config"):
        file_data, _ = _read_config(ns["config"], command)
        data.update(file_data)
    for k, v in ns.items():
        if k not in GLOBAL_KEYS:
            data[k] = v
    if "seed" in ns:
        data["seed"] = ns["seed"]
    return build_config(schema, data)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ns = vars(args)
    command = ns["command"]
    out_dir = ns.get("out_dir") or "."
    threads = ns.get("threads") or (os.cpu_count() or 1)
    try:
        cfg = resolve(command, args)
        os.makedirs(out_dir, exist_ok=True)
    except (ConfigError, PreconditionError) as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        return EXIT_IO
    run = Run(command, out_dir, cfg, int(threads), argv)
    code = EXIT_OK
    try:
        code = COMMANDS[command](run, bool(ns.get("plot", False)))
    except CapacityError as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        run.status, run.partial, code = "capacity_exceeded", True, EXIT_CAPACITY
    except ContractViolation as exc:
        print(f"contact-cutoff {command}: invariant failure: {exc}", file=sys.stderr)
        run.status, code = "invariant_failure", EXIT_INVARIANT
    except (ConfigError, PreconditionError) as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContactCutoffError as exc:
        print(f"contact-cutoff {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run.write_manifest()
    except OSError as exc:
        print(f"contact-cutoff {command}: cannot write manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
