"""Poisson probabilities and goodness-of-fit for integer samples."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.stats import chisquare

MIN_GOF_SAMPLES = 50
MIN_EXPECTED = 5.0


def poisson_pmf(lam: float, i: int) -> float:
    if lam < 0:
        raise ValueError(f"Poisson mean must be >= 0, got {lam}")
    if i < 0:
        return 0.0
    if lam == 0:
        return 1.0 if i == 0 else 0.0
    return math.exp(i * math.log(lam) - lam - math.lgamma(i + 1))


def poisson_cdf(lam: float, i: int) -> float:
    """P(Poisson(lam) <= i) by direct summation."""
    if lam < 0:
        raise ValueError(f"Poisson mean must be >= 0, got {lam}")
    return math.fsum(poisson_pmf(lam, j) for j in range(i + 1)) if i >= 0 else 0.0


@dataclass(frozen=True)
class GofResult:
    tv: float
    pvalue: float  # nan when pooling leaves a single cell
    statistic: float
    cells: int
    n: int


def _pool(obs: list[float], exp: list[float]) -> tuple[list[float], list[float]]:
    obs, exp = list(obs), list(exp)
    while len(exp) > 1 and exp[-1] < MIN_EXPECTED:
        e, o = exp.pop(), obs.pop()
        exp[-1] += e
        obs[-1] += o
    while len(exp) > 1 and exp[0] < MIN_EXPECTED:
        e, o = exp.pop(0), obs.pop(0)
        exp[0] += e
        obs[0] += o
    return obs, exp


def gof_poisson(samples, lam: float) -> GofResult:
    """Total variation to Poisson(lam) and a pooled chi-square p-value.

    TV includes the Poisson mass beyond the largest observed value.  Cells are
    0, 1, ..., K-1 plus an open tail >= K, merged until every expected count is
    at least 5; degrees of freedom are cells - 1.
    """
    samples = np.asarray(samples, dtype=np.int64)
    n = samples.size
    if n < MIN_GOF_SAMPLES:
        raise ValueError(f"goodness of fit needs at least {MIN_GOF_SAMPLES} samples, got {n}")
    if samples.min() < 0:
        raise ValueError("samples must be non-negative integers")
    if lam < 0:
        raise ValueError(f"Poisson mean must be >= 0, got {lam}")
    counts = Counter(samples.tolist())
    top = int(samples.max())
    pmf = [poisson_pmf(lam, i) for i in range(top + 1)]
    tv = 0.5 * (math.fsum(abs(counts.get(i, 0) / n - pmf[i]) for i in range(top + 1)) + max(0.0, 1 - math.fsum(pmf)))

    # cells up to the mean-ish range, then an open tail
    k_cells = max(top + 1, int(math.ceil(lam)) + 1)
    exp = [n * poisson_pmf(lam, i) for i in range(k_cells)]
    exp.append(max(0.0, n - math.fsum(exp)))
    obs = [float(counts.get(i, 0)) for i in range(k_cells)] + [0.0]
    obs, exp = _pool(obs, exp)
    if len(exp) < 2:
        return GofResult(tv, float("nan"), 0.0, len(exp), n)
    # rescale away float rounding so scipy's sum check is satisfied
    exp_arr = np.array(exp) * (n / math.fsum(exp))
    stat, p = chisquare(np.array(obs), exp_arr)
    return GofResult(tv, float(p), float(stat), len(exp), n)
