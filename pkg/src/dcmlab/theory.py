"""Closed-form predictions and bounds for the subcritical directed configuration model.

Bounds that are rational in their inputs are computed with ``Fraction`` so
they can be compared exactly against enumerated probabilities.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from scipy.special import gammainc

from dcmlab.degseq import DegreeParams

EULER_GAMMA = 0.57721566490153286061
_CF_EPS = 1e-16
_CF_TINY = 1e-300


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------

def xi_alpha(alpha: float) -> float:
    """E1(alpha) = integral from alpha to infinity of exp(-x)/x dx."""
    x = float(alpha)
    if not x > 0:
        raise ValueError(f"xi_alpha needs alpha > 0, got {alpha}")
    if x <= 1.0:
        # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        total = 0.0
        term = 1.0
        k = 1
        while True:
            term *= -x / k
            contrib = term / k
            total += contrib
            if abs(contrib) < 1e-18 * abs(total) + 1e-300:
                break
            k += 1
        return -EULER_GAMMA - math.log(x) - total
    # modified Lentz evaluation of the continued fraction
    b = x + 1.0
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h * math.exp(-x)
    raise RuntimeError(f"continued fraction for E1({x}) did not converge")


def kth_largest_tail(alpha: float, k: int) -> float:
    """Limit of P(|C_k| >= alpha/|Q|): P(Poisson(xi_alpha) >= k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    xi = xi_alpha(alpha)
    # regularised lower incomplete gamma P(k, xi) is exactly 1 - sum_{i<k} xi^i e^-xi / i!
    return float(gammainc(k, xi))


@dataclass(frozen=True)
class Prediction:
    alpha: float
    k: int
    xi: float
    tail: float


def prediction_table(alphas: Sequence[float], ks: Sequence[int]) -> list[Prediction]:
    return [Prediction(a, k, xi_alpha(a), kth_largest_tail(a, k)) for a in alphas for k in ks]


def prediction_csv(rows: Sequence[Prediction]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "k", "xi", "tail"])
    for r in rows:
        w.writerow([repr(r.alpha), r.k, repr(r.xi), repr(r.tail)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Motifs and subgraph probability bounds
# ---------------------------------------------------------------------------

def falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


def _count_automorphisms(h: int, edges: Sequence[tuple[int, int]]) -> int:
    target = sorted(edges)
    return sum(
        1
        for perm in itertools.permutations(range(h))
        if sorted((perm[u], perm[v]) for u, v in edges) == target
    )


@dataclass(frozen=True)
class MotifProfile:
    """A small (multi-)digraph H on vertices 0..h-1."""

    h: int
    edges: tuple
    aut: int
    name: str = ""
    degree_hist: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return len(self.edges)

    @classmethod
    def from_edges(cls, h: int, edges, aut: Optional[int] = None, name: str = "") -> "MotifProfile":
        edges = tuple((int(u), int(v)) for u, v in edges)
        if any(not (0 <= u < h and 0 <= v < h) for u, v in edges):
            raise ValueError("motif edge endpoint out of range")
        if aut is None:
            if h > 8:
                raise ValueError("automorphism count must be supplied for h > 8")
            aut = _count_automorphisms(h, edges)
        indeg = [0] * h
        outdeg = [0] * h
        for u, v in edges:
            outdeg[u] += 1
            indeg[v] += 1
        hist: dict = {}
        for i, j in zip(indeg, outdeg):
            hist[(i, j)] = hist.get((i, j), 0) + 1
        return cls(h, edges, aut, name, hist)


def cycle_motif(h: int) -> MotifProfile:
    return MotifProfile.from_edges(h, [(i, (i + 1) % h) for i in range(h)], aut=h, name=f"C{h}")


def path_motif(k: int) -> MotifProfile:
    return MotifProfile.from_edges(k + 1, [(i, i + 1) for i in range(k)], name=f"P{k}")


def s_motif(a: int, b: int, c: int) -> MotifProfile:
    """u->v by paths of lengths a and b, v->u by a path of length c (internally disjoint)."""
    if min(a, b, c) < 1:
        raise ValueError("path lengths must be positive")
    u, v = 0, 1
    nxt = 2
    edges = []
    for length, (x, y) in ((a, (u, v)), (b, (u, v)), (c, (v, u))):
        prev = x
        for _ in range(length - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, y))
    h = a + b + c - 1
    return MotifProfile.from_edges(h, edges, aut=None if h <= 8 else 1, name=f"S({a},{b},{c})")


def t_motif(a: int, b: int) -> MotifProfile:
    """Cycles of lengths a and b meeting in exactly one vertex."""
    if min(a, b) < 1:
        raise ValueError("cycle lengths must be positive")
    edges = []
    nxt = 1
    for length in (a, b):
        prev = 0
        for _ in range(length - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, 0))
    h = a + b - 1
    return MotifProfile.from_edges(h, edges, aut=None if h <= 8 else 1, name=f"T({a},{b})")


@dataclass(frozen=True)
class UpperBound:
    p_plus: Fraction
    n_plus: Fraction
    exceeds_one: bool  # p_plus > 1: the bound is vacuous as a probability


def subgraph_upper_bound(H: MotifProfile, params: DegreeParams, n: int, m: int) -> UpperBound:
    """p+ = n^h / ((n)_h (m)_k) * prod rho_{i,j}^{h_ij};  n+ = h!/aut * C(n,h) * p+."""
    h, k = H.h, H.k
    if n < h:
        raise ValueError(f"motif has {h} vertices but the graph only {n}")
    if m < k:
        raise ValueError(f"motif has {k} edges but the graph only {m}")
    prod = Fraction(1)
    for (i, j), cnt in sorted(H.degree_hist.items()):
        prod *= params.rho(i, j) ** cnt
    p_plus = Fraction(n**h, falling(n, h) * falling(m, k)) * prod
    n_plus = Fraction(math.factorial(h), H.aut) * math.comb(n, h) * p_plus
    return UpperBound(p_plus, n_plus, p_plus > 1)


@dataclass(frozen=True)
class LowerBound:
    value: Fraction  # clamped at 0
    raw: Fraction
    vacuous: bool


def cycle_lower_bound(h: int, params: DegreeParams, n: int, m: int, delta: int, eps) -> LowerBound:
    """(1+Q)^h/(n)_h * (1 - 2h^2 Delta^2/(eps n)) * (1 - h Delta^2/(2m)), clamped at 0."""
    if h < 1:
        raise ValueError("cycle length must be at least 1")
    if n < h:
        raise ValueError("cycle longer than the vertex count")
    eps = Fraction(eps)
    if eps <= 0:
        return LowerBound(Fraction(0), Fraction(0), True)
    f1 = 1 - Fraction(2 * h * h * delta * delta) / (eps * n)
    f2 = 1 - Fraction(h * delta * delta, 2 * m)
    raw = (1 + params.q_exact) ** h / falling(n, h) * f1 * f2
    vacuous = f1 <= 0 or f2 <= 0
    return LowerBound(Fraction(0) if vacuous else raw, raw, vacuous)


def expected_cycle_count_bound(h: int, q: float, m: int) -> float:
    """exp(hQ + 2h^2/m)/h, the bound on the expected number of h-cycles."""
    if h < 1 or m <= h:
        raise ValueError("need 1 <= h < m")
    return math.exp(h * q + 2 * h * h / m) / h


def medium_cycle_tail_bound(g: float, q: float) -> float:
    """E1(-Q g / 2): expected number of cycles longer than g is at most this."""
    if q >= 0:
        raise ValueError("medium-cycle bound needs Q < 0")
    if g < 1:
        raise ValueError("g must be at least 1")
    return xi_alpha(-q * g / 2)


# ---------------------------------------------------------------------------
# Counting strongly connected multi-digraphs
# ---------------------------------------------------------------------------

def _check_profile(n: int, a: int, b: int) -> None:
    if min(n, a, b) < 0 or n < 1:
        raise ValueError("need n >= 1 and a, b >= 0")
    if n - 2 * a - b < 0:
        raise ValueError(f"infeasible profile: n - 2a - b = {n - 2 * a - b} < 0")


def scc_count_upper_bound(n: int, a: int, b: int) -> int:
    """(3a + 2b) (m-1)! * n!/(a! a! b! (n-2a-b)!) with m = n + a + b.

    Only meaningful when a + b >= 1: with no vertex of total degree >= 3 the
    heart is empty and the strongly connected graphs are plain cycles.
    """
    _check_profile(n, a, b)
    if a + b == 0:
        raise ValueError("bound needs a + b >= 1 (empty heart)")
    m = n + a + b
    multinomial = math.factorial(n) // (
        math.factorial(a) ** 2 * math.factorial(b) * math.factorial(n - 2 * a - b)
    )
    return (3 * a + 2 * b) * math.factorial(m - 1) * multinomial


# ---------------------------------------------------------------------------
# Complex-motif expectation bounds and size thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MotifBounds:
    bound_S: float
    bound_T: float
    truncated_S: Optional[float] = None  # same integrals cut at 2g
    truncated_T: Optional[float] = None


def complex_motif_expectation_bounds(params: DegreeParams, m: int, delta: int, g: Optional[float] = None) -> MotifBounds:
    """16 R-R+/(m|Q|^3) for S(a,b,c) and 4 min(R-,R+) Delta/(m|Q|^2) for T(a,b)."""
    q = params.q
    if q >= 0:
        raise ValueError("complex-motif bounds need Q < 0")
    rr = params.r_minus * params.r_plus
    r_small = min(params.r_minus, params.r_plus)
    aq = abs(q)
    bound_s = 16 * rr / (m * aq**3)
    bound_t = 4 * r_small * delta / (m * aq**2)
    if g is None:
        return MotifBounds(bound_s, bound_t)
    t, y = aq / 2, 2 * g
    e = math.exp(-t * y)
    int_s = 2 / t**3 - e * (2 / t**3 + 2 * y / t**2 + y * y / t)
    int_t = 1 / t**2 - e * (1 / t**2 + y / t)
    return MotifBounds(bound_s, bound_t, rr / m * int_s, r_small * delta / m * int_t)


class CriticalWindowWarning(UserWarning):
    """n|Q|^3/(R-R+) is too small for the barely subcritical asymptotics."""


@dataclass(frozen=True)
class Thresholds:
    g: int
    f: int
    s: float
    criticality: float
    checks: dict  # name -> bool
    too_close: bool


def size_class_thresholds(n: int, q: float, params: DegreeParams, zeta: float = 0.1, warn: bool = True) -> Thresholds:
    """Concrete g = ceil(s/|Q|), f = ceil(sqrt(m/|Q|) s) with s = (n|Q|^3 / max(R-R+, zeta^2))^(1/6)."""
    if q >= 0:
        raise ValueError("size classes need Q < 0")
    aq = abs(q)
    m = params.mu * n
    rr = params.r_minus * params.r_plus
    crit = n * aq**3 / rr if rr > 0 else math.inf
    s = (n * aq**3 / max(rr, zeta**2)) ** (1 / 6)
    g = math.ceil(s / aq)
    f = math.ceil(math.sqrt(m / aq) * s)
    r_big = max(params.r_minus, params.r_plus)
    checks = {
        "g_cubed_le_m_over_RR": rr == 0 or g**3 <= m / rr,
        "f_le_m_absQ_over_R": r_big == 0 or f <= m * aq / r_big,
        "f_gt_g": f > g,
        # the lower bound on E(W) additionally uses g = o(1/|Q|^2)
        "g_le_inv_Q_squared": g <= 1 / aq**2,
    }
    too_close = crit < 8
    if too_close and warn:
        warnings.warn(
            f"n|Q|^3/(R-R+) = {crit:.3g} < 8: too close to the critical window",
            CriticalWindowWarning,
            stacklevel=2,
        )
    return Thresholds(g, f, s, crit, checks, too_close)
