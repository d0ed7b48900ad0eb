"""The thirteen acceptance criteria, each printing one pass/fail line."""

import math
import time

import mpmath
import numpy as np
import pytest

from dcmlab import catalog
from dcmlab.degseq import FamilySpec, build_family
from dcmlab.explore import Explorer
from dcmlab.harness.experiment import ExperimentConfig, is_monotone_decreasing, n_sweep, run_experiment
from dcmlab.theory import xi_alpha

MASTER_SEED = 20240601
DESK = {"kind": "mix", "n": 200_000, "target_q": -0.1}


def desk_config(**kw) -> ExperimentConfig:
    d = {"family": DESK, "trials": 2000, "master_seed": MASTER_SEED, "alphas": [1.0], "ks": [1, 2, 3]}
    d.update(kw)
    return ExperimentConfig.from_dict(d)


@pytest.fixture(scope="module")
def desk_run():
    t0 = time.perf_counter()
    res = run_experiment(desk_config(parallelism=1))
    res.summary["_seconds"] = time.perf_counter() - t0
    return res


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_motif_bounds(report):
    res, secs = _timed(catalog.motif_bound_suite)
    ok = res.ok and secs < 120 and len(catalog.CATALOG) == 40
    report(1, ok, f"{res.checks} exact comparisons over 40 sequences, {len(res.violations)} violations "
                  f"({res.info['vacuous_lower_bounds']} cycle lower bounds clamped to 0), {secs:.1f}s")
    assert ok, res.violations[:5]


def test_c02_counting_bounds(report):
    res, secs = _timed(lambda: catalog.counting_suite(7))
    spots = (res.info[(2, 1, 0)], res.info[(1, 0, 1)])
    ok = res.ok and secs < 300 and spots == (1, 1)
    report(2, ok, f"{len(res.info)} profiles with m <= 7, {len(res.violations)} violations, N(2,1,0), N(1,0,1) = {spots}, {secs:.1f}s")
    assert ok, res.violations[:5]


def test_c03_preheart_count(report):
    res = catalog.preheart_suite()
    ok = res.ok and res.info["direct"] == 12
    report(3, ok, f"direct = {res.info['direct']}, formula = {res.info['formula']}, matching image = {res.info['image']}")
    assert ok


def test_c04_coupling_exact(report):
    res, secs = _timed(catalog.coupling_suite)
    report(4, res.ok, f"{res.checks} (sequence, forced list) cases with m <= 5, |forced| <= 3, nonzero TV: {len(res.violations)}, {secs:.1f}s")
    assert res.ok, res.violations[:5]


def test_c05_xi_accuracy(report):
    mpmath.mp.dps = 30
    worst = 0.0
    for x in np.geomspace(0.05, 20, 50):
        ref = float(mpmath.quad(lambda t: mpmath.exp(-t) / t, [x, x + 1, x + 10, mpmath.inf]))
        worst = max(worst, abs(xi_alpha(x) - ref) / ref)
    err1 = abs(xi_alpha(1.0) - 0.219383934395520)
    ok = worst <= 1e-12 and err1 <= 1e-12
    report(5, ok, f"max relative error {worst:.2e} over 50 points, |xi(1) - 0.219383934395520| = {err1:.1e}")
    assert ok


def test_c06_drift_identity(report):
    t0 = time.perf_counter()
    seq = build_family(FamilySpec("mix", 10_000, -0.1))
    rng = np.random.default_rng(MASTER_SEED)
    worst_z = 0.0
    prefixes = 0
    while prefixes < 20:
        ex = Explorer(seq, int(rng.integers(seq.n)))
        steps = int(rng.integers(0, 30))
        while ex.y and ex.t < steps:
            ex.step(rng)
        if ex.y == 0:
            continue
        inc = ex.sample_increments(rng, 100_000)
        se = inc.std(ddof=1) / math.sqrt(inc.size)
        worst_z = max(worst_z, abs(inc.mean() - ex.q()) / se)
        prefixes += 1
    secs = time.perf_counter() - t0
    ok = worst_z < 4 and secs < 60
    report(6, ok, f"20 prefixes x 1e5 continuations, max |mean - Q_t|/SE = {worst_z:.2f}, {secs:.1f}s")
    assert ok


def _tail(summary, k):
    return next(r for r in summary["tails"] if r["k"] == k and r["alpha"] == 1.0)


def test_c07_tail_k1(desk_run, report):
    s = desk_run.summary
    row = _tail(s, 1)
    ok = abs(row["p_hat"] - 0.19698) <= 0.03 and s["Q"] == -0.1 and row["threshold"] == 10
    report(7, ok, f"n = {s['n']}, Q = {s['Q']}, criticality = {s['criticality']:.0f}: "
                  f"P(|C_1| >= 10) = {row['p_hat']:.4f} (SE {row['se']:.4f}) vs 0.19698 +- 0.03; "
                  f"{s['trials']} trials in {s['_seconds']:.0f}s")
    assert ok


def test_c08_tail_k2(desk_run, report):
    row = _tail(desk_run.summary, 2)
    ok = abs(row["p_hat"] - 0.02079) <= 0.012
    report(8, ok, f"P(|C_2| >= 10) = {row['p_hat']:.4f} (SE {row['se']:.4f}) vs 0.02079 +- 0.012 (exact limit {row['theory']:.6f})")
    assert ok


def test_c09_no_complex(desk_run, report):
    c = desk_run.summary["complex"]
    sweep = n_sweep(desk_config(), [50_000, 100_000], trials=[8000, 4000])
    sweep.append({"n": 200_000, "trials": 2000, "fraction": c["fraction"],
                  "bound": c["bound_S"] + c["bound_T"], "ratio_to_bound": c["ratio_to_bound"]})
    fracs = [r["fraction"] for r in sweep]
    monotone = is_monotone_decreasing(fracs)
    ok = c["fraction"] <= c["ceiling"] and monotone
    ladder = ", ".join(f"n={r['n']}: {r['fraction']:.4f} ({r['ratio_to_bound']:.3f} of bound)" for r in sweep)
    report(9, ok, f"complex fraction {c['fraction']:.4f} <= {c['ceiling']:.4f} "
                  f"(bound_S {c['bound_S']:.4f}, bound_T {c['bound_T']:.4f}); sweep {ladder}; monotone = {monotone}")
    assert ok


def test_c10_no_long_cycles(desk_run, report):
    lc = desk_run.summary["long_cycles"]
    ok = lc["fraction"] <= 0.02
    report(10, ok, f"fraction with a cycle longer than g = {lc['g']}: {lc['fraction']:.4f} <= 0.02 "
                   f"(expected-count bound E1(|Q|g/2) = {lc['medium_bound']:.4f})")
    assert ok


def test_c11_poisson_w(desk_run, report):
    w = desk_run.summary["W"][0]
    ok = w["tv"] <= 0.05 and w["chi2_p"] is not None and w["chi2_p"] > 0.01
    report(11, ok, f"W on [{w['window'][0]}, {w['window'][1]}]: mean {w['mean']:.4f} vs xi = {w['xi']:.4f}, "
                   f"TV = {w['tv']:.4f}, chi-square p = {w['chi2_p']:.3f}")
    assert ok


def test_c12_bridge(report):
    res = catalog.bridge_suite(draws=100_000, seed=MASTER_SEED)
    obs = res.info["observed"]
    report(12, res.ok, f"all-(1,1) n = 3, 1e5 draws, counts {obs}, chi-square p = {res.info['pvalue']:.3f} > 1e-3")
    assert res.ok


def test_c13_determinism(desk_run, report):
    other = run_experiment(desk_config(parallelism=8))
    ok = other.csv_text == desk_run.csv_text
    report(13, ok, f"trials CSV at parallelism 1 and 8: {'byte-identical' if ok else 'DIFFERENT'} ({len(desk_run.csv_text)} bytes)")
    assert ok
