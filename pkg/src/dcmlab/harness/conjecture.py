"""Sampler for the conjectured joint limit of rescaled component sizes, and distances to it.

X_1 < X_2 < ... are points of a unit-rate Poisson process on (0, inf) and
Y_i solves E1(Y_i) = X_i, so Y_1 > Y_2 > ...
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import ks_2samp

from dcmlab.theory import xi_alpha

BISECT_TOL = 1e-10


def inverse_e1(x: float, tol: float = BISECT_TOL) -> float:
    """y > 0 with E1(y) = x, by bisection on the strictly decreasing E1.

    The bracket is shrunk to tol * min(1, y), so small roots keep relative accuracy.
    """
    if x <= 0:
        raise ValueError("E1 is positive; need x > 0")
    lo, hi = 1.0, 1.0
    while xi_alpha(lo) < x:
        lo /= 2
    while xi_alpha(hi) > x:
        hi *= 2
    while hi - lo > tol * min(1.0, lo):
        mid = 0.5 * (lo + hi)
        if xi_alpha(mid) > x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def conjecture_limit_sampler(count: int, rng: np.random.Generator, floor: float = 0.05) -> list[np.ndarray]:
    """``count`` independent realisations of (Y_1, Y_2, ...), each truncated below ``floor``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    x_stop = xi_alpha(floor)
    out = []
    for _ in range(count):
        ys = []
        x = rng.exponential()
        while x <= x_stop:
            ys.append(inverse_e1(x))
            x += rng.exponential()
        out.append(np.asarray(ys))
    return out


def as_matrix(realisations: list[np.ndarray], kmax: int) -> np.ndarray:
    """Rows padded with zeros to ``kmax`` columns."""
    mat = np.zeros((len(realisations), kmax))
    for i, ys in enumerate(realisations):
        mat[i, : min(kmax, ys.size)] = ys[:kmax]
    return mat


def energy_distance_2d(a: np.ndarray, b: np.ndarray) -> float:
    """Energy statistic 2E|X-Y| - E|X-X'| - E|Y-Y'| between two point clouds."""
    dxy = cdist(a, b).mean()
    dxx = cdist(a, a).mean()
    dyy = cdist(b, b).mean()
    return float(max(0.0, 2 * dxy - dxx - dyy))


@dataclass(frozen=True)
class JointLawComparison:
    ks: dict  # k -> KS distance
    ks_ci: dict  # k -> (lo, hi) bootstrap percentile interval
    energy_12: Optional[float]


def compare_joint_law(
    sizes: np.ndarray,
    q: float,
    limit: np.ndarray,
    ks: list[int],
    rng: Optional[np.random.Generator] = None,
    n_boot: int = 200,
    max_energy_points: int = 2000,
) -> JointLawComparison:
    """Per-k KS distance between |Q| |C_k| and Y_k, plus the (k=1,2) energy distance.

    ``sizes`` is trials x kmax (column k-1 holds |C_k|); ``limit`` has the same
    layout for the Y sample.  Informational only.
    """
    sizes = np.asarray(sizes, dtype=float)
    limit = np.asarray(limit, dtype=float)
    if sizes.size == 0 or limit.size == 0:
        raise ValueError("both samples must be nonempty")
    rng = rng if rng is not None else np.random.default_rng(0)
    scaled = abs(q) * sizes
    out_ks, out_ci = {}, {}
    for k in ks:
        a, b = scaled[:, k - 1], limit[:, k - 1]
        out_ks[k] = float(ks_2samp(a, b).statistic)
        boot = [
            ks_2samp(rng.choice(a, a.size), rng.choice(b, b.size)).statistic
            for _ in range(n_boot)
        ]
        out_ci[k] = (float(np.percentile(boot, 2.5)), float(np.percentile(boot, 97.5)))
    energy = None
    if scaled.shape[1] >= 2 and limit.shape[1] >= 2:
        a2, b2 = scaled[:max_energy_points, :2], limit[:max_energy_points, :2]
        energy = energy_distance_2d(a2, b2)
    return JointLawComparison(out_ks, out_ci, energy)
