"""Exit-criteria suite: one test per criterion, each recording a PASS/FAIL line.

All randomness derives from one fixed master seed.  Criteria run at their
stated replica counts and tolerances.
"""
import time

import numpy as np
import pytest
from scipy.stats import chisquare, ks_2samp

from conftest import MASTER_SEED, record_criterion
from contact_cutoff.cli import main
from contact_cutoff.contact_engine import (
    ensemble_snapshots,
    exact_ever_hit_probability,
    exact_extinction_probability,
    exact_hit_probability,
    extinction_time,
    reach_matrix,
    reverse,
    run_until,
    sample_graphical,
)
from contact_cutoff.experiments import (
    ExperimentConfig,
    cutoff_experiment,
    density_experiment,
    intersection_experiment,
)
from contact_cutoff.grow_explore import run_cover_tree, run_vanilla
from contact_cutoff.regular_graph import is_simple, sample_simple
from contact_cutoff.seeding import replica_rng
from contact_cutoff.tree_process import (
    FULL,
    LazyTreeState,
    border_mask_bruteforce,
    cheeger_bound,
    estimate_survival_prob,
    growth_from_series,
    pioneer_mask,
    pioneer_mask_bruteforce,
    run_brw_coupled,
    run_severed_coupled,
    tree_grid,
    tree_series,
)
from graphs import TINY, k4
from oracles.matchings import edge_mask
from test_regular_graph import simple_edge_sets

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

D, LAM = 3, 2.0


def rng_for(name, index=0):
    return replica_rng(MASTER_SEED, f"acceptance-{name}", index)


@pytest.fixture(scope="module")
def tree_constants():
    """Growth-rate fit and survival probability estimated once for the suite.

    Also returns the wall time of the single 10^4-replica growth estimate.
    """
    t0 = time.time()
    times, a = tree_series(D, LAM, 10_000, 6.0, seed=MASTER_SEED, experiment="acc-growth-a")
    single = growth_from_series(times, a, (2.0, 6.0), seed=MASTER_SEED)
    elapsed = time.time() - t0
    _, b = tree_series(D, LAM, 10_000, 6.0, seed=MASTER_SEED, experiment="acc-growth-b")
    double = growth_from_series(times, np.vstack([a, b]), (2.0, 6.0), seed=MASTER_SEED)
    surv = estimate_survival_prob(D, LAM, 10_000, threshold=1000, t_cap=50.0, seed=MASTER_SEED)
    return single, double, surv, elapsed


def experiment_config(tree_constants, **kw):
    _, double, surv, _ = tree_constants
    base = dict(d=D, lam=LAM, eps=0.1, delta=0.05, seed=MASTER_SEED, c_hat=double.c_hat,
                c_se=double.c_se, p_hat=surv.p_hat, p_se=surv.p_se, duality=False)
    return ExperimentConfig(**{**base, **kw})


def test_criterion_01_exact_oracle():
    t0 = time.time()
    R, times = 100_000, [1.0, 3.0]
    lam = 1.0
    worst, ok = 0.0, True
    for i, name in enumerate(sorted(TINY)):
        g = TINY[name]()
        v = g.n - 1
        snaps = ensemble_snapshots(g, lam, [0], times, R, rng_for("c1", i))
        rng = rng_for("c1-ever", i)
        first = np.array([run_until(g, lam, [0], times[-1], targets=[v], rng=rng, grid_step=0).outcome.hit_time
                          or np.inf for _ in range(R)])
        for k, t in enumerate(times):
            checks = [
                (snaps[:, k, v].mean(), exact_hit_probability(g, lam, 0, v, t)),
                ((~snaps[:, k, :].any(axis=1)).mean(), exact_extinction_probability(g, lam, [0], t)),
                ((first <= t).mean(), exact_ever_hit_probability(g, lam, 0, v, t)),
            ]
            for est, p in checks:
                z = abs(est - p) / np.sqrt(p * (1 - p) / R)
                worst = max(worst, z)
                ok &= z <= 3.0
    elapsed = time.time() - t0
    ok &= elapsed <= 120
    record_criterion(1, ok, f"max |z| = {worst:.2f} (limit 3), runtime {elapsed:.0f}s (limit 120s)")
    assert ok


def test_criterion_02_engine_cross_validation():
    g, lam, R, H = k4(), 1.0, 10_000, 200.0
    rng = rng_for("c2")
    a = np.array([run_until(g, lam, range(4), H, rng=rng, grid_step=0).outcome.extinction_time or np.inf
                  for _ in range(R)])
    b = np.array([extinction_time(sample_graphical(g, lam, H, rng), range(4)) for _ in range(R)])
    censored = int((~np.isfinite(a)).sum() + (~np.isfinite(b)).sum())
    p = ks_2samp(a, b).pvalue
    ok = p > 0.01 and censored == 0
    record_criterion(2, ok, f"KS p = {p:.3f} (need > 0.01), censored runs {censored}")
    assert ok


def test_criterion_03_pathwise_duality():
    rng = rng_for("c3")
    g = sample_simple(50, 3, rng)
    R, good = 10_000, 0
    for _ in range(R):
        rec = sample_graphical(g, 1.5, 2.0, rng)
        good += bool(np.array_equal(reach_matrix(rec), reach_matrix(reverse(rec)).T))
    ok = good == R
    record_criterion(3, ok, f"{good}/{R} records satisfy reversal equivalence")
    assert ok


def test_criterion_04_configuration_model():
    rng = rng_for("c4")
    k4_ok = all(edge_mask(4, sample_simple(4, 3, rng).edges()) == 63 for _ in range(10_000))
    masks = simple_edge_sets(6, 3)
    index = {m: i for i, m in enumerate(masks)}
    obs = np.zeros(len(masks))
    for _ in range(100_000):
        obs[index[edge_mask(6, sample_simple(6, 3, rng).edges())]] += 1
    p = chisquare(obs).pvalue
    ok = k4_ok and p > 0.01
    record_criterion(4, ok, f"(4,3) always K4: {k4_ok}; (6,3) chi-square p = {p:.3f} over {len(masks)} graphs")
    assert ok


N5, LAM5, H5, R5 = 8, 1.5, 6.0, 10_000


def _hit(outcome):
    return outcome.hit_time if outcome.hit else H5 + 1.0


@pytest.fixture(scope="module")
def vanilla_hits():
    rng = rng_for("c5-vanilla")
    return np.array([_hit(run_vanilla(N5, 3, LAM5, [0], H5, rng, targets=[1], grid_step=0,
                                      stop_on_hit=True, condition_simple=True).outcome) for _ in range(R5)])


def test_criterion_05_grow_and_explore(vanilla_hits):
    rng = rng_for("c5-two-phase")
    b = []
    for _ in range(R5):
        g = sample_simple(N5, 3, rng)
        b.append(_hit(run_until(g, LAM5, [0], H5, targets=[1], rng=rng, grid_step=0).outcome))
    p = ks_2samp(vanilla_hits, b).pvalue
    ok = p > 0.01
    record_criterion(5, ok, f"vanilla vs two-phase KS p = {p:.3f} (need > 0.01)")
    assert ok


def test_criterion_06_cover_tree(vanilla_hits):
    rng = rng_for("c6")
    c = []
    for _ in range(R5):
        while True:
            run = run_cover_tree(N5, 3, LAM5, [0], H5, rng, targets=[1], grid_step=0, stop_on_hit=True)
            run.state.check()
            if is_simple(run.graph):
                break
        c.append(_hit(run.outcome))
    p = ks_2samp(vanilla_hits, c).pvalue
    ok = p > 0.01
    record_criterion(6, ok, f"cover-tree projection vs vanilla KS p = {p:.3f} (need > 0.01)")
    assert ok


def test_criterion_07_cheeger_and_pioneers():
    grid = tree_grid(6.0, 0.1)
    cheeger_bad = pioneer_bad = snaps = 0
    for i in range(1000):
        rng = rng_for("c7", i)
        st = LazyTreeState(D, FULL)
        for t in grid:
            st.advance(float(t), LAM, rng)
            border = border_mask_bruteforce(st)
            cheeger_bad += int(border.sum() < cheeger_bound(D, st.ever_count))
            pioneer_bad += int(not np.array_equal(pioneer_mask(st), pioneer_mask_bruteforce(st)))
            pioneer_bad += int(pioneer_mask(st).sum() != st.pioneer_count or border.sum() != st.border_count)
            snaps += 1
            if st.extinct:
                break
    ok = cheeger_bad == 0 and pioneer_bad == 0
    record_criterion(7, ok, f"{snaps} snapshots: Cheeger violations {cheeger_bad}, pioneer mismatches {pioneer_bad}")
    assert ok


def test_criterion_08_coupled_domination():
    sev = sum(run_severed_coupled(D, LAM, 5.0, rng_for("c8-sev", i)).dominated for i in range(1000))
    brw = 0
    for i in range(1000):
        b = run_brw_coupled(D, LAM, 0.5, 4, rng_for("c8-brw", i))
        brw += bool(np.all(b.brw_sizes >= b.cp_sizes))
    ok = sev == 1000 and brw == 1000
    record_criterion(8, ok, f"severed within full {sev}/1000, BRW >= CP {brw}/1000")
    assert ok


def test_criterion_09_tree_growth(tree_constants):
    single, double, _, fit_time = tree_constants
    t0 = time.time()
    times, z = tree_series(D, 0.0, 10_000, 3.0, seed=MASTER_SEED, experiment="acc-growth-zero")
    zero = growth_from_series(times, z, (0.0, 2.0), seed=MASTER_SEED)
    rel = abs(double.c_hat - single.c_hat) / single.c_hat
    elapsed = fit_time + time.time() - t0
    ok = single.r2 >= 0.99 and rel <= 0.05 and abs(zero.c_hat + 1) <= 0.05 and elapsed <= 300
    record_criterion(
        9, ok,
        f"c_hat = {single.c_hat:.4f} +- {single.c_se:.4f} (R2 {single.r2:.5f}), doubled {double.c_hat:.4f} "
        f"(shift {100 * rel:.2f}%), lambda=0 slope {zero.c_hat:.4f}; runtime {elapsed:.0f}s (limit 300s)",
    )
    assert ok


@pytest.fixture(scope="module")
def cutoff_report(tree_constants):
    t0 = time.time()
    rep = cutoff_experiment(experiment_config(tree_constants, n=(1000, 10_000), replicas=2000))
    return rep, time.time() - t0


def test_criterion_10_cutoff_lower(cutoff_report):
    rep, _ = cutoff_report
    row = next(r for r in rep.rows if r["n"] == 10_000)
    p = row["hit_lower"]["estimate"]
    ok = p <= 0.1
    record_criterion(10, ok, f"P(hit by t-) = {p:.3f} +- {row['hit_lower']['se']:.3f} at n=1e4 (limit 0.1)")
    assert ok


def test_criterion_11_cutoff_upper(cutoff_report, tree_constants):
    rep, elapsed = cutoff_report
    _, _, surv, _ = tree_constants
    row = next(r for r in rep.rows if r["n"] == 10_000)
    occ = row["occupied_plus"]
    target = surv.p_hat**2
    sigma = np.hypot(occ["se"], 2 * surv.p_hat * surv.p_se)
    gap = abs(occ["estimate"] - target)
    iqr = {r["n"]: r["normalized_iqr"] for r in rep.rows}
    ok = gap <= 0.05 + 2 * sigma and rep.iqr_trend_ok() and elapsed <= 1800
    record_criterion(
        11, ok,
        f"P(v in xi_t+) = {occ['estimate']:.3f} vs p^2 = {target:.3f} (gap {gap:.3f}, limit {0.05 + 2 * sigma:.3f}); "
        f"normalized IQR {iqr[1000]:.3f} -> {iqr[10_000]:.3f}; runtime {elapsed:.0f}s",
    )
    assert ok


def test_criterion_12_density(tree_constants):
    t0 = time.time()
    rep = density_experiment(experiment_config(tree_constants, n=(100_000,), replicas=100))
    elapsed = time.time() - t0
    row = rep.rows[0]
    frac = row["within_delta"]["estimate"]
    ok = frac >= 0.9 and elapsed <= 1200
    record_criterion(12, ok, f"{100 * frac:.0f}% of replicas within 0.05 of p = {row['p_hat']:.3f} "
                             f"(mean density {row['density']['mean']:.3f}); runtime {elapsed:.0f}s")
    assert ok


def test_criterion_13_intersection(tree_constants):
    rep = intersection_experiment(experiment_config(tree_constants, n=(10_000,), replicas=1000))
    row = rep.rows[0]
    target = row["p_hat_squared"]
    p = row["intersect"]["estimate"]
    cond = row["intersect_given_alive"]["estimate"]
    ok = abs(p - target) <= 0.05 and cond >= 0.9
    record_criterion(13, ok, f"P(intersect) = {p:.3f} vs p^2 = {target:.3f}; given both alive {cond:.3f} (need >= 0.9)")
    assert ok


CLI_RUNS = {
    "gen": ["--n", "1000", "--d", "3", "--simple"],
    "simulate": ["--n", "500", "--replicas", "20", "--targets", "7"],
    "tree": ["--replicas", "100", "--horizon", "4"],
    "estimate": ["--replicas", "200", "--survival-replicas", "200", "--horizon", "4", "--window", "2,4"],
    "cutoff": ["--n", "200,400", "--replicas", "50", "--c-hat", "1.542", "--p-hat", "0.813"],
    "density": ["--n", "2000", "--replicas", "10", "--c-hat", "1.542", "--p-hat", "0.813"],
    "intersect": ["--n", "2000", "--replicas", "50", "--c-hat", "1.542", "--p-hat", "0.813"],
    "census": ["--n", "30", "--census-replicas", "40", "--c-hat", "1.542", "--p-hat", "0.813"],
}


def test_criterion_14_reproducibility(tmp_path):
    def outputs(path):
        return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.name != "manifest.json"}

    bad = []
    for cmd, args in CLI_RUNS.items():
        a, b = tmp_path / f"{cmd}-1", tmp_path / f"{cmd}-3"
        codes = [main([cmd, *args, "--seed", str(MASTER_SEED), "--threads", "1", "--plot", "--out-dir", str(a)]),
                 main([cmd, "--config", str(a / "manifest.json"), "--threads", "3", "--plot", "--out-dir", str(b)])]
        if codes != [0, 0] or outputs(a) != outputs(b) or not outputs(a):
            bad.append(cmd)
    ok = not bad
    record_criterion(14, ok, f"{len(CLI_RUNS) - len(bad)}/{len(CLI_RUNS)} commands byte-identical on manifest re-run "
                             f"with 3 workers{'; failing: ' + ', '.join(bad) if bad else ''}")
    assert ok
