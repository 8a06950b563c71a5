import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contact_cutoff.errors import ConfigError
from contact_cutoff.experiments import (
    CutoffReport,
    ExperimentConfig,
    build_config,
    classify,
    cutoff_experiment,
    density_experiment,
    good_pair_census,
    intersection_experiment,
    load_config_file,
    with_tree_constants,
)
from contact_cutoff.experiments.stats import bootstrap_se, iqr, mean_ci, proportion, quantiles

BASE = dict(d=3, lam=2.0, c_hat=1.542, p_hat=0.813, p_se=0.006, bootstrap=20)


def cfg(**kw):
    return ExperimentConfig(**{**BASE, **kw})


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="repilcas"):
        ExperimentConfig.from_mapping({"repilcas": 3})


@pytest.mark.parametrize("bad", [
    {"n": [7], "d": 3}, {"d": 1}, {"lam": -1.0}, {"delta": 0.0}, {"replicas": 0},
    {"mode": "mixed"}, {"p_hat": 1.5}, {"tree_window": [3.0, 2.0]}, {"n": "abc"},
])
def test_invalid_values_rejected(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(bad)


def test_eps_window_and_constants():
    with pytest.raises(ConfigError):
        cfg(eps=0.2).require_cutoff_eps()
    with pytest.raises(ConfigError):
        ExperimentConfig().require_constants()
    c = cfg(eps=0.1)
    assert c.t_plus(1000) == pytest.approx(1.1 * np.log(1000) / 1.542)
    assert c.t_minus(1000) == pytest.approx(0.9 * np.log(1000) / 1.542)
    t1, t2 = c.t_pair(1000)
    assert t1 == pytest.approx(0.9 * np.log(1000) / (2 * 1.542)) and t2 == pytest.approx(1.3 * np.log(1000) / (2 * 1.542))


def test_to_dict_roundtrip_and_runtime_keys():
    c = cfg(n=[100, 200], workers=3, out_dir="x")
    d = c.to_dict()
    assert "workers" not in d and "out_dir" not in d
    assert ExperimentConfig.from_mapping(d) == c.replace(workers=1, out_dir=None)
    assert c.to_dict(runtime=True)["workers"] == 3


def test_load_config_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("n: [100]\nlam: 1.5\n")
    assert build_config(ExperimentConfig, load_config_file(p)).lam == 1.5
    p.write_text("")
    assert load_config_file(p) == {}
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config_file(p)


def test_with_tree_constants_fills_values():
    c = with_tree_constants(ExperimentConfig(lam=2.0, tree_replicas=50, tree_horizon=4.0,
                                             tree_window=(2.0, 4.0), survival_threshold=100))
    assert c.c_hat > 0 and 0 < c.p_hat <= 1 and c.c_se >= 0
    c2 = cfg()
    assert with_tree_constants(c2) is c2


def test_stats_helpers():
    p = proportion(3, 10)
    assert p["estimate"] == 0.3 and p["ci"][0] <= 0.3 <= p["ci"][1]
    assert proportion(0, 10)["ci"][0] == 0.0 and np.isnan(proportion(0, 0)["estimate"])
    q = quantiles([1.0, 2.0, np.inf, np.inf])
    assert q["q10"] == 1.0 and q["q90"] is None
    assert iqr([1, 2, 3, 4, 5]) == 2.0 and np.isnan(iqr([1.0]))
    m = mean_ci([1.0, 2.0, 3.0])
    assert m["mean"] == 2.0 and m["ci"][0] < 2.0 < m["ci"][1]
    assert bootstrap_se(np.arange(50.0), np.mean, np.random.default_rng(0), 50) > 0


def test_classify_rules():
    P = np.array([[1.0, 0.5, 0.0], [0.4, 1.0, 0.9], [0.1, 0.2, 1.0]])
    assert classify(P, 0.3, 0.0) == (pytest.approx(3 / 6), pytest.approx(1 / 3))
    # threshold zero still needs an observed hit
    pf, vf = classify(P, 0.0, 0.0)
    assert pf == pytest.approx(5 / 6) and vf == pytest.approx(2 / 3)
    assert classify(np.eye(3), 0.0, 0.5)[0] == 0.0


def test_cutoff_lambda_zero_trivial():
    rep = cutoff_experiment(cfg(n=[50], lam=0.0, replicas=30))
    row = rep.rows[0]
    assert row["hit_lower"]["estimate"] == 0.0 and row["occupied_plus"]["estimate"] == 0.0
    assert row["hit_quantiles"]["q50"] is None and row["duality_ok"]


def test_cutoff_engines_and_report():
    c = cfg(n=[100, 200], replicas=40, engine_threshold=150)
    rep = cutoff_experiment(c)
    assert [r["engine"] for r in rep.rows] == ["full", "grow_explore"]
    assert len(rep.replicas) == 80 and isinstance(rep.iqr_trend_ok(), bool)
    flat = rep.summary_rows()
    assert {"hit_lower_p", "occupied_plus_ci_hi", "hit_q50"} <= set(flat[0])
    assert rep.as_dict()["config"]["n"] == [100, 200]
    for r in rep.replicas:
        assert r["hit_time"] == np.inf or r["hit_time"] <= rep.rows[0]["t_plus"] + 1e-9 or r["n"] == 200


def test_cutoff_quenched_and_workers_identical():
    c = cfg(n=[100], replicas=20, mode="quenched")
    a = cutoff_experiment(c).replicas
    b = cutoff_experiment(c.replace(workers=2)).replicas
    assert a == b


def test_cutoff_requires_constants():
    with pytest.raises(ConfigError):
        cutoff_experiment(ExperimentConfig(n=[100]))


def test_iqr_trend_slack():
    rows = [{"n": 10, "normalized_iqr": 0.3, "normalized_iqr_se": 0.01},
            {"n": 100, "normalized_iqr": 0.5, "normalized_iqr_se": 0.01}]
    assert not CutoffReport(rows, [], {}).iqr_trend_ok()
    rows[1]["normalized_iqr"] = 0.31
    assert CutoffReport(rows, [], {}).iqr_trend_ok()


def test_density_lambda_zero_and_full():
    # with no infections each vertex independently survives to t with probability exp(-t)
    rep = density_experiment(cfg(n=[1000], lam=0.0, replicas=20))
    row = rep.rows[0]
    p = np.exp(-row["t_plus"])
    assert abs(row["density"]["mean"] - p) <= 4 * np.sqrt(p * (1 - p) / 20_000)
    assert row["within_delta"]["estimate"] == 0.0
    rep = density_experiment(ExperimentConfig(n=[100], replicas=3), horizon=0.0)
    assert rep.rows[0]["density"]["mean"] == 1.0 and "within_delta" not in rep.rows[0]
    rep.summary_rows()


def test_intersection_lambda_zero():
    rep = intersection_experiment(cfg(n=[100], lam=0.0, replicas=20))
    row = rep.rows[0]
    # the two roots never move, so they cannot meet
    assert row["intersect"]["estimate"] == 0.0
    assert row["good_labeling"]["estimate"] == 1.0
    rep.summary_rows()


def test_census_lambda_zero_no_good_pairs():
    rep = good_pair_census(cfg(n=[20], lam=0.0, census_replicas=10))
    assert all(r["good_pair_fraction"] == 0.0 for r in rep.rows)
    assert rep.monotone()


def test_census_monotone_and_bound():
    rep = good_pair_census(cfg(n=[30], census_replicas=60))
    assert rep.monotone()
    assert rep.hit_matrix.shape == (30, 30) and np.allclose(np.diag(rep.hit_matrix), rep.hit_matrix.diagonal())
    with pytest.raises(ConfigError):
        good_pair_census(cfg(n=[400]))


def test_census_threshold_zero_all_good_in_dense_regime():
    rep = good_pair_census(cfg(n=[10], lam=6.0, census_replicas=50, census_g=[1.0]))
    assert rep.rows[0]["threshold"] == 0.0 and rep.rows[0]["good_pair_fraction"] == 1.0


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 10), seed=st.integers(0, 2**32 - 1),
       thr=st.lists(st.floats(0, 1), min_size=2, max_size=5))
def test_property_classify_monotone(n, seed, thr):
    P = np.random.default_rng(seed).random((n, n))
    fr = [classify(P, t, 0.1)[0] for t in sorted(thr)]
    assert all(b <= a for a, b in zip(fr, fr[1:]))


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0, 5), eps=st.floats(0.001, 0.124), n=st.integers(2, 10**6))
def test_property_time_windows(lam, eps, n):
    c = cfg(lam=lam, eps=eps)
    assert c.t_minus(n) <= c.t_plus(n)
    t1, t2 = c.t_pair(n)
    assert t1 <= t2
