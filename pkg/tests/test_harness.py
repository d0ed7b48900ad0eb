import json
import math

import numpy as np
import pytest

from dcmlab.harness.conjecture import (
    as_matrix,
    compare_joint_law,
    conjecture_limit_sampler,
    inverse_e1,
)
from dcmlab.harness.experiment import (
    ConfigError,
    ExperimentConfig,
    is_monotone_decreasing,
    parse_trials_csv,
    replay_summary,
    run_experiment,
    trial_seed,
)
from dcmlab.harness.stats import gof_poisson, poisson_cdf, poisson_pmf
from dcmlab.theory import kth_largest_tail, xi_alpha


def small_config(**kw):
    d = {"family": {"kind": "mix", "n": 20000, "target_q": -0.1}, "trials": 60,
         "master_seed": 11, "ks": [1, 2, 3]}
    d.update(kw)
    return ExperimentConfig.from_dict(d)


def test_poisson_pmf_cdf():
    xi = xi_alpha(1)
    assert poisson_pmf(xi, 0) == pytest.approx(math.exp(-xi), rel=1e-15)
    assert poisson_cdf(0.219384, 1) == pytest.approx(math.exp(-0.219384) * 1.219384, rel=1e-14)
    assert poisson_cdf(xi, 1) == pytest.approx(0.9791816, abs=1e-7)
    for lam in (0.0, 0.22, 1.0, 5.0, 10.0):
        assert abs(math.fsum(poisson_pmf(lam, i) for i in range(201)) - 1) < 1e-12
    with pytest.raises(ValueError):
        poisson_pmf(-1, 0)
    with pytest.raises(ValueError):
        poisson_cdf(-1, 0)


def test_gof_self_consistency():
    rng = np.random.default_rng(0)
    passes = sum(gof_poisson(rng.poisson(0.22, 10_000), 0.22).pvalue > 0.01 for _ in range(100))
    assert passes >= 95


def test_gof_all_zero_vs_five():
    res = gof_poisson(np.zeros(200, dtype=int), 5.0)
    assert res.tv == pytest.approx(1 - math.exp(-5), abs=1e-12)
    assert res.pvalue < 1e-10


def test_gof_exact_pmf_tv_zero():
    # sample with exactly the Poisson(0) law, and a synthetic exact match for lam = ln 2 cells
    assert gof_poisson(np.zeros(60, dtype=int), 0.0).tv == 0
    with pytest.raises(ValueError):
        gof_poisson([0] * 10, 1.0)


def test_inverse_e1():
    assert inverse_e1(xi_alpha(1.0)) == pytest.approx(1.0, abs=1e-9)
    assert inverse_e1(30.0) == pytest.approx(math.exp(-0.5772156649015329 - 30), rel=1e-6)
    assert inverse_e1(1e-8) == pytest.approx(15.65, abs=0.1)


def test_conjecture_marginal():
    rng = np.random.default_rng(1)
    samples = conjecture_limit_sampler(4000, rng, floor=0.5)
    y1 = np.array([s[0] if s.size else 0.0 for s in samples])
    p = np.mean(y1 >= 1.0)
    want = kth_largest_tail(1.0, 1)
    assert abs(p - want) < 4 * math.sqrt(want * (1 - want) / y1.size)
    assert all(np.all(np.diff(s) < 0) for s in samples)
    with pytest.raises(ValueError):
        conjecture_limit_sampler(0, rng)


def test_compare_joint_law_edges():
    rng = np.random.default_rng(2)
    limit = as_matrix(conjecture_limit_sampler(300, rng, floor=0.2), 2)
    same = compare_joint_law(limit / 0.1, -0.1, limit, [1, 2], n_boot=20)
    assert same.ks[1] == 0 and same.ks[2] == 0 and same.energy_12 == pytest.approx(0, abs=1e-12)
    far = compare_joint_law(np.full((50, 2), 1000.0), -0.1, np.zeros((50, 2)), [1], n_boot=10)
    assert far.ks[1] == 1


def test_config_validation():
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict({"family": {"kind": "mix", "n": 100, "target_q": -0.1},
                                    "trials": 1, "master_seed": 0, "extra": 1})
    with pytest.raises(ConfigError):
        small_config(trials=0)
    with pytest.raises(ConfigError):
        small_config(alphas=[0.0])
    with pytest.raises(ConfigError):
        small_config(ks=[0])
    with pytest.raises(ConfigError):
        small_config(family={"kind": "mix", "n": 5, "target_q": -0.1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("not json")


def test_trial_seed_stable():
    assert trial_seed(1, 2) == trial_seed(1, 2)
    assert trial_seed(1, 2) != trial_seed(2, 1)
    assert 0 <= trial_seed(0, 0) < 2**64


def test_single_trial_summary():
    res = run_experiment(small_config(trials=1))
    for row in res.summary["tails"]:
        assert 0 <= row["p_hat"] <= 1
        assert row["se_undefined"] and row["z"] is None
    assert res.summary["W"][0]["tv"] is None


def test_experiment_outputs_and_replay(tmp_path):
    cfg = small_config(trials_csv=str(tmp_path / "t.csv"), summary_json=str(tmp_path / "s.json"))
    res = run_experiment(cfg)
    text = (tmp_path / "t.csv").read_text()
    assert text == res.csv_text
    header = text.splitlines()[0].split(",")
    assert header[:7] == ["trial_id", "seed", "n", "m", "Q", "R_minus", "R_plus"]
    assert header[-1] == "ms" and "w_alpha_0" in header and "c3" in header
    recs = parse_trials_csv(text)
    assert [r.trial_id for r in recs] == list(range(60))
    assert all(r.ms is None for r in recs)
    assert replay_summary(text, cfg) == res.summary
    assert json.loads((tmp_path / "s.json").read_text()) == json.loads(json.dumps(res.summary))
    for row in res.summary["tails"]:
        assert row["se"] == pytest.approx(math.sqrt(row["p_hat"] * (1 - row["p_hat"]) / 60))
    for r in recs:
        assert list(r.sizes) == sorted(r.sizes, reverse=True)


def test_parallel_determinism():
    a = run_experiment(small_config(trials=40, parallelism=1)).csv_text
    b = run_experiment(small_config(trials=40, parallelism=3)).csv_text
    assert a == b


def test_timing_column_optional():
    recs = run_experiment(small_config(trials=3, record_timing=True)).records
    assert all(r.ms is not None and r.ms >= 0 for r in recs)


def test_io_error_names_path(tmp_path):
    cfg = small_config(trials=2, trials_csv=str(tmp_path / "missing" / "t.csv"))
    with pytest.raises(OSError, match="missing"):
        run_experiment(cfg)


def test_trial_independence():
    res = run_experiment(small_config(trials=400))
    ac = res.summary["c1_lag1_autocorr"]
    assert ac is None or abs(ac) <= 3 / math.sqrt(400)


def test_monotone_helper():
    assert is_monotone_decreasing([3, 2, 2, 0])
    assert not is_monotone_decreasing([1, 2])
