"""Monte Carlo experiments on a fixed degree sequence: trials, persistence, summary, replay."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Optional

import numpy as np

from dcmlab.degseq import BiDegreeSequence, FamilySpec, build_family, compute_params
from dcmlab.harness.stats import MIN_GOF_SAMPLES, gof_poisson
from dcmlab.sampler import MultiDigraph, sample_configuration
from dcmlab.scc import analyze
from dcmlab.theory import (
    complex_motif_expectation_bounds,
    kth_largest_tail,
    medium_cycle_tail_bound,
    size_class_thresholds,
    xi_alpha,
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: dict
    trials: int
    master_seed: int
    alphas: list = field(default_factory=lambda: [1.0])
    ks: list = field(default_factory=lambda: [1, 2])
    zeta: float = 0.1
    cycle_floor: int = 1
    family_seed: int = 0
    parallelism: int = 1
    trials_csv: Optional[str] = None
    summary_json: Optional[str] = None
    record_timing: bool = False

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ConfigError("alphas must be a nonempty list of positive numbers")
        if not self.ks or any((not isinstance(k, int)) or k < 1 for k in self.ks):
            raise ConfigError("ks must be a nonempty list of integers >= 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.cycle_floor < 1:
            raise ConfigError("cycle_floor must be >= 1")
        try:
            self.family_spec()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad family spec: {exc}") from exc

    def family_spec(self) -> FamilySpec:
        return FamilySpec(**self.family)

    @property
    def kmax(self) -> int:
        return max(self.ks)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"family", "trials", "master_seed"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)


def trial_seed(master_seed: int, trial_id: int) -> int:
    """64-bit seed from sha256 of (master seed, trial id)."""
    digest = hashlib.sha256(f"{master_seed}:{trial_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ExperimentSetup:
    """Everything trials share: the sequence, its parameters, and the windows."""

    seq: BiDegreeSequence
    q: float
    q_exact: Fraction
    r_minus: float
    r_plus: float
    g: int
    windows: tuple  # (lo, hi) per alpha


def prepare(config: ExperimentConfig) -> ExperimentSetup:
    seq = build_family(config.family_spec(), config.family_seed)
    params = compute_params(seq, order=1)
    if params.q_exact >= 0:
        raise ConfigError("experiments need a subcritical sequence (Q < 0)")
    th = size_class_thresholds(seq.n, params.q, params, config.zeta, warn=False)
    aq = abs(params.q_exact)
    windows = tuple((math.ceil(Fraction(a).limit_denominator(10**9) / aq), th.g) for a in config.alphas)
    return ExperimentSetup(seq, params.q, params.q_exact, params.r_minus, params.r_plus, th.g, windows)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    n: int
    m: int
    q: float
    r_minus: float
    r_plus: float
    sizes: tuple  # |C_1|, ..., |C_kmax|
    n_complex: int
    w: tuple  # cycle counts per alpha window
    max_cycle: int
    cycle_lengths: tuple  # cycle-class lengths >= cycle floor, descending
    ms: Optional[float] = None


def run_trial(setup: ExperimentSetup, config: ExperimentConfig, trial_id: int) -> TrialRecord:
    seed = trial_seed(config.master_seed, trial_id)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    g = MultiDigraph.from_matching(sample_configuration(setup.seq, rng))
    cen = analyze(g, cycle_floor=config.cycle_floor)
    ms = (time.perf_counter() - t0) * 1e3 if config.record_timing else None
    return TrialRecord(
        trial_id=trial_id,
        seed=seed,
        n=setup.seq.n,
        m=setup.seq.m,
        q=setup.q,
        r_minus=setup.r_minus,
        r_plus=setup.r_plus,
        sizes=tuple(cen.kth_largest(k) for k in range(1, config.kmax + 1)),
        n_complex=cen.n_complex,
        w=tuple(cen.window_count(lo, hi) for lo, hi in setup.windows),
        max_cycle=cen.max_cycle(),
        cycle_lengths=tuple(cen.cycle_lengths.tolist()),
        ms=ms,
    )


# per-process state for the worker pool
_WORKER: dict = {}


def _init_worker(config_dict: dict) -> None:
    config = ExperimentConfig.from_dict(config_dict)
    _WORKER["config"] = config
    _WORKER["setup"] = prepare(config)


def _run_chunk(ids: list[int]) -> list[TrialRecord]:
    return [run_trial(_WORKER["setup"], _WORKER["config"], i) for i in ids]


def run_trials(config: ExperimentConfig, setup: Optional[ExperimentSetup] = None) -> list[TrialRecord]:
    """All trials, returned in trial-id order whatever the pool width."""
    setup = setup or prepare(config)
    ids = list(range(config.trials))
    if config.parallelism == 1:
        return [run_trial(setup, config, i) for i in ids]
    chunk = max(1, math.ceil(len(ids) / (4 * config.parallelism)))
    chunks = [ids[i:i + chunk] for i in range(0, len(ids), chunk)]
    with ProcessPoolExecutor(config.parallelism, initializer=_init_worker, initargs=(config.to_dict(),)) as pool:
        results = list(pool.map(_run_chunk, chunks))
    records = [r for part in results for r in part]
    assert [r.trial_id for r in records] == ids
    return records


# ---------------------------------------------------------------------------
# Trials CSV
# ---------------------------------------------------------------------------

def csv_header(kmax: int, n_alpha: int) -> list[str]:
    return (
        ["trial_id", "seed", "n", "m", "Q", "R_minus", "R_plus"]
        + [f"c{k}" for k in range(1, kmax + 1)]
        + ["n_complex"]
        + [f"w_alpha_{i}" for i in range(n_alpha)]
        + ["max_cycle", "cycle_lengths", "ms"]
    )


def format_trials_csv(records: list[TrialRecord], kmax: int, n_alpha: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(kmax, n_alpha))
    for r in records:
        w.writerow(
            [r.trial_id, r.seed, r.n, r.m, repr(r.q), repr(r.r_minus), repr(r.r_plus)]
            + list(r.sizes)
            + [r.n_complex]
            + list(r.w)
            + [r.max_cycle, ";".join(map(str, r.cycle_lengths)), "" if r.ms is None else f"{r.ms:.3f}"]
        )
    return buf.getvalue()


def parse_trials_csv(text: str) -> list[TrialRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty trials CSV")
    head = rows[0]
    kmax = sum(1 for h in head if h.startswith("c") and h[1:].isdigit())
    n_alpha = sum(1 for h in head if h.startswith("w_alpha_"))
    if head != csv_header(kmax, n_alpha):
        raise ValueError("unexpected trials CSV header")
    out = []
    for row in rows[1:]:
        i = 7
        sizes = tuple(int(x) for x in row[i:i + kmax])
        i += kmax
        n_complex = int(row[i])
        w = tuple(int(x) for x in row[i + 1:i + 1 + n_alpha])
        i += 1 + n_alpha
        out.append(
            TrialRecord(
                trial_id=int(row[0]), seed=int(row[1]), n=int(row[2]), m=int(row[3]),
                q=float(row[4]), r_minus=float(row[5]), r_plus=float(row[6]),
                sizes=sizes, n_complex=n_complex, w=w, max_cycle=int(row[i]),
                cycle_lengths=tuple(int(x) for x in row[i + 1].split(";") if x),
                ms=float(row[i + 2]) if row[i + 2] else None,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Summary
# ---------------------------------------------------------------------------

def _lag1_autocorr(x: np.ndarray) -> Optional[float]:
    if x.size < 3 or x.std() == 0:
        return None
    return float(np.corrcoef(x[:-1], x[1:])[0, 1])


def summarize(records: list[TrialRecord], config: ExperimentConfig, setup: ExperimentSetup) -> dict:
    """Aggregate statistics; a pure function of the records, so it can be replayed from CSV."""
    t = len(records)
    if t == 0:
        raise ValueError("no trials to summarize")
    sizes = np.array([r.sizes for r in records], dtype=np.int64).reshape(t, -1)
    tails = []
    for ai, alpha in enumerate(config.alphas):
        thr = setup.windows[ai][0]
        for k in config.ks:
            hits = int(np.count_nonzero(sizes[:, k - 1] >= thr))
            p = hits / t
            se = math.sqrt(p * (1 - p) / t)
            theory = kth_largest_tail(alpha, k)
            tails.append({
                "alpha": alpha, "k": k, "threshold": thr, "hits": hits, "p_hat": p,
                "se": se, "se_undefined": se == 0, "theory": theory,
                "z": None if se == 0 else (p - theory) / se,
            })

    params = compute_params(setup.seq, order=1)
    mb = complex_motif_expectation_bounds(params, setup.seq.m, setup.seq.max_degree, setup.g)
    frac_complex = float(np.mean([r.n_complex > 0 for r in records]))
    bound_sum = mb.bound_S + mb.bound_T
    complex_block = {
        "fraction": frac_complex,
        "mean_count": float(np.mean([r.n_complex for r in records])),
        "bound_S": mb.bound_S,
        "bound_T": mb.bound_T,
        "truncated_S": mb.truncated_S,
        "truncated_T": mb.truncated_T,
        "ceiling": max(0.05, 2 * bound_sum),
        "ratio_to_bound": frac_complex / bound_sum,
    }

    w_blocks = []
    for ai, alpha in enumerate(config.alphas):
        ws = np.array([r.w[ai] for r in records], dtype=np.int64)
        xi = xi_alpha(alpha)
        block = {"alpha": alpha, "window": list(setup.windows[ai]), "xi": xi,
                 "mean": float(ws.mean()), "tv": None, "chi2_p": None}
        if t >= MIN_GOF_SAMPLES:
            gof = gof_poisson(ws, xi)
            block["tv"], block["chi2_p"] = gof.tv, (None if math.isnan(gof.pvalue) else gof.pvalue)
        w_blocks.append(block)

    long_frac = float(np.mean([r.max_cycle > setup.g for r in records]))
    summary = {
        "trials": t,
        "n": setup.seq.n,
        "m": setup.seq.m,
        "Q": setup.q,
        "R_minus": setup.r_minus,
        "R_plus": setup.r_plus,
        "criticality": params.criticality(setup.seq.n),
        "g": setup.g,
        "tails": tails,
        "complex": complex_block,
        "W": w_blocks,
        "long_cycles": {
            "g": setup.g,
            "fraction": long_frac,
            "medium_bound": medium_cycle_tail_bound(setup.g, setup.q),
        },
        "c1_lag1_autocorr": _lag1_autocorr(sizes[:, 0].astype(float)),
    }
    return summary


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


@dataclass
class ExperimentResult:
    summary: dict
    records: list
    csv_text: str


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    setup = prepare(config)
    records = run_trials(config, setup)
    summary = summarize(records, config, setup)
    csv_text = format_trials_csv(records, config.kmax, len(config.alphas))
    if config.trials_csv:
        _write(config.trials_csv, csv_text)
    if config.summary_json:
        _write(config.summary_json, summary_json(summary))
    return ExperimentResult(summary, records, csv_text)


def replay_summary(csv_text: str, config: ExperimentConfig) -> dict:
    """Recompute the summary from a persisted trials CSV."""
    return summarize(parse_trials_csv(csv_text), config, prepare(config))


def n_sweep(config: ExperimentConfig, ns: list[int], trials=None) -> list[dict]:
    """Complex-component fraction and its ratio to the bound over a ladder of n.

    ``trials`` is None (use the config), one count, or one count per n.
    """
    if trials is None or isinstance(trials, int):
        trials = [trials] * len(ns)
    if len(trials) != len(ns):
        raise ValueError("need one trial count per n")
    rows = []
    for n, tr in zip(ns, trials):
        fam = dict(config.family, n=n)
        cfg = ExperimentConfig.from_dict({**config.to_dict(), "family": fam,
                                          "trials": tr or config.trials,
                                          "trials_csv": None, "summary_json": None})
        res = run_experiment(cfg)
        c = res.summary["complex"]
        rows.append({"n": n, "trials": cfg.trials, "fraction": c["fraction"],
                     "mean_count": c["mean_count"],
                     "bound": c["bound_S"] + c["bound_T"], "ratio_to_bound": c["ratio_to_bound"]})
    return rows


def is_monotone_decreasing(values: list[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))
