"""Bi-degree sequences, their moment parameters, and near-critical families.

A bi-degree sequence assigns each vertex an (in-degree, out-degree) pair with
equal totals.  All sums are carried in integer/rational arithmetic and only
converted to floats at the boundary.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson


class InfeasibleFamilyError(ValueError):
    """Raised when a family cannot realise the requested target."""


class BiDegreeSequence:
    """Immutable sequence of (d_in, d_out) pairs with cached summary counts."""

    __slots__ = ("d_in", "d_out", "n", "m", "max_degree", "degree_counts", "_owners")

    def __init__(self, d_in, d_out):
        d_in = np.array(d_in, dtype=np.int64).reshape(-1)
        d_out = np.array(d_out, dtype=np.int64).reshape(-1)
        if d_in.shape != d_out.shape:
            raise ValueError("in- and out-degree arrays differ in length")
        if d_in.size and (d_in.min() < 0 or d_out.min() < 0):
            raise ValueError("degrees must be non-negative")
        if int(d_in.sum()) != int(d_out.sum()):
            raise ValueError(
                f"unbalanced sequence: sum d_in = {int(d_in.sum())}, "
                f"sum d_out = {int(d_out.sum())}"
            )
        d_in.flags.writeable = False
        d_out.flags.writeable = False
        self.d_in = d_in
        self.d_out = d_out
        self.n = int(d_in.size)
        self.m = int(d_in.sum())
        self.max_degree = int(max(d_in.max(initial=0), d_out.max(initial=0)))
        self.degree_counts = dict(Counter(zip(d_in.tolist(), d_out.tolist())))
        self._owners = None

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "BiDegreeSequence":
        pairs = list(pairs)
        if not pairs:
            return cls([], [])
        d_in, d_out = zip(*pairs)
        return cls(d_in, d_out)

    @classmethod
    def from_counts(cls, counts: dict[tuple[int, int], int]) -> "BiDegreeSequence":
        """Expand a count table; vertices are laid out in sorted (i, j) order."""
        pairs = []
        for (i, j) in sorted(counts):
            if counts[(i, j)] < 0:
                raise ValueError(f"negative count for {(i, j)}")
            pairs.extend([(i, j)] * counts[(i, j)])
        return cls.from_pairs(pairs)

    def stub_owners(self) -> tuple[np.ndarray, np.ndarray]:
        """(out_owner, in_owner): the vertex of every out-/in-stub id.

        Stub ids are contiguous per vertex, in vertex order.
        """
        if self._owners is None:
            idx = np.arange(self.n)
            out_owner = np.repeat(idx, self.d_out)
            in_owner = np.repeat(idx, self.d_in)
            out_owner.flags.writeable = False
            in_owner.flags.writeable = False
            self._owners = (out_owner, in_owner)
        return self._owners

    def stub_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """First out-stub id and first in-stub id of every vertex (length n+1)."""
        out_start = np.concatenate(([0], np.cumsum(self.d_out)))
        in_start = np.concatenate(([0], np.cumsum(self.d_in)))
        return out_start, in_start

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.d_in.tolist(), self.d_out.tolist()))

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, BiDegreeSequence):
            return NotImplemented
        return np.array_equal(self.d_in, other.d_in) and np.array_equal(
            self.d_out, other.d_out
        )

    def __hash__(self):
        return hash((self.d_in.tobytes(), self.d_out.tobytes()))

    def __repr__(self):
        if self.n <= 8:
            return f"BiDegreeSequence({self.pairs})"
        return f"BiDegreeSequence(n={self.n}, m={self.m}, max_degree={self.max_degree})"


def _falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


@dataclass(frozen=True)
class DegreeParams:
    q: float
    r_minus: float
    r_plus: float
    mu: float
    factorial_moments: dict
    raw_moments: dict
    q_exact: Fraction = field(repr=False)
    r_minus_exact: Fraction = field(repr=False)
    r_plus_exact: Fraction = field(repr=False)
    mu_exact: Fraction = field(repr=False)

    def rho(self, i: int, j: int) -> Fraction:
        try:
            return self.factorial_moments[(i, j)]
        except KeyError:
            raise KeyError(f"factorial moment rho_{{{i},{j}}} was not computed") from None

    def criticality(self, n: int) -> float:
        """n|Q|^3 / (R- R+); large values mean barely subcritical."""
        rr = self.r_minus_exact * self.r_plus_exact
        if rr == 0:
            return math.inf
        return float(n * abs(self.q_exact) ** 3 / rr)


def compute_params(seq: BiDegreeSequence, order: int = 2) -> DegreeParams:
    """Q, R-, R+, mu and the (factorial) moments up to ``order`` in each coordinate."""
    if seq.m == 0:
        raise ValueError("parameters are undefined for an edgeless sequence")
    m, n = seq.m, seq.n
    s11 = s_minus = s_plus = 0
    for (a, b), cnt in seq.degree_counts.items():
        s11 += cnt * a * b
        s_minus += cnt * a * b * (a - 1)
        s_plus += cnt * a * b * (b - 1)
    q = Fraction(s11, m) - 1
    r_minus = Fraction(s_minus, m)
    r_plus = Fraction(s_plus, m)
    mu = Fraction(m, n)

    fact, raw = {}, {}
    for i in range(order + 1):
        for j in range(order + 1):
            f_sum = r_sum = 0
            for (a, b), cnt in seq.degree_counts.items():
                f_sum += cnt * _falling(a, i) * _falling(b, j)
                r_sum += cnt * a**i * b**j
            fact[(i, j)] = Fraction(f_sum, n)
            raw[(i, j)] = Fraction(r_sum, n)

    return DegreeParams(
        q=float(q),
        r_minus=float(r_minus),
        r_plus=float(r_plus),
        mu=float(mu),
        factorial_moments=fact,
        raw_moments=raw,
        q_exact=q,
        r_minus_exact=r_minus,
        r_plus_exact=r_plus,
        mu_exact=mu,
    )


# ---------------------------------------------------------------------------
# Conditions on the degree sequence, evaluated at one finite n
# ---------------------------------------------------------------------------

DEFAULT_EPS = 0.1
DEFAULT_ZETA = 0.1


def max_degree_cap(n: int) -> float:
    """n^{1/6} log^{-1/4} n with the natural logarithm."""
    if n < 2:
        return math.inf
    return n ** (1 / 6) * math.log(n) ** -0.25


@dataclass(frozen=True)
class Clause:
    label: str
    passed: Optional[bool]  # None: asymptotic, informational only
    margin: float
    detail: str


@dataclass(frozen=True)
class ConditionReport:
    eps: float
    zeta: float
    clauses: tuple
    defaults_used: bool

    @property
    def all_finite_pass(self) -> bool:
        return all(c.passed for c in self.clauses if c.passed is not None)

    def clause(self, label: str) -> Clause:
        for c in self.clauses:
            if c.label == label:
                return c
        raise KeyError(label)

    def failures(self) -> list[str]:
        return [c.label for c in self.clauses if c.passed is False]


def check_conditions(
    seq: BiDegreeSequence, eps: float = DEFAULT_EPS, zeta: float = DEFAULT_ZETA
) -> ConditionReport:
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    n, counts = seq.n, seq.degree_counts
    clauses = []

    props = {k: v / n for k, v in sorted(counts.items())} if n else {}
    clauses.append(Clause(
        "i", None, math.nan,
        "not finitely checkable (informational); surrogate proportions n_ij/n = "
        + ", ".join(f"{k}:{v:.6g}" for k, v in props.items()),
    ))
    mu = seq.m / n if n else math.nan
    clauses.append(Clause(
        "ii", None, math.nan,
        f"not finitely checkable (informational); surrogate m/n = {mu:.6g}",
    ))

    n00 = counts.get((0, 0), 0)
    clauses.append(Clause("iii", n00 == 0, float(-n00), f"n_00 = {n00}"))

    zero_semi = sum(c for (a, b), c in counts.items() if (a == 0) != (b == 0))
    limit = (1 - eps) * n
    clauses.append(Clause(
        "iv", zero_semi <= limit, limit - zero_semi,
        f"sum n_0i + n_i0 = {zero_semi} vs (1-eps)n = {limit:.6g}",
    ))

    n11 = counts.get((1, 1), 0)
    clauses.append(Clause(
        "v", n11 <= limit, limit - n11, f"n_11 = {n11} vs (1-eps)n = {limit:.6g}",
    ))

    cap = max_degree_cap(n)
    clauses.append(Clause(
        "vi", seq.max_degree <= cap, cap - seq.max_degree,
        f"Delta = {seq.max_degree} vs n^(1/6) log^(-1/4) n = {cap:.6g}",
    ))

    if seq.m:
        params = compute_params(seq, order=1)
        r_min = min(params.r_minus, params.r_plus)
    else:
        r_min = 0.0
    clauses.append(Clause(
        "vii", r_min >= zeta, r_min - zeta, f"min(R-, R+) = {r_min:.6g} vs zeta = {zeta}",
    ))

    return ConditionReport(
        eps=eps,
        zeta=zeta,
        clauses=tuple(clauses),
        defaults_used=(eps == DEFAULT_EPS and zeta == DEFAULT_ZETA),
    )


# ---------------------------------------------------------------------------
# Parameterised families
# ---------------------------------------------------------------------------

MIX = "mix"
POISSONIZED = "poissonized"


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    n: int
    target_q: float
    # mix: target R- = R+ = 4b/m; the default reproduces the 11-vertex base mix
    r_target: float = 4 / 9

    def __post_init__(self):
        if self.kind not in (MIX, POISSONIZED):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.n < 10:
            raise ValueError("family size n must be at least 10")
        if not -1 < self.target_q <= 0:
            raise ValueError("target_q must lie in (-1, 0]")
        if self.kind == MIX and not 0.2 <= self.r_target < 4:
            raise ValueError("mix r_target must lie in [0.2, 4)")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "target_q": self.target_q,
                "r_target": self.r_target}


def mix_counts(n: int, target_q, r_target=Fraction(4, 9)) -> tuple[int, int, int]:
    """Counts (a, b, c) for a*(1,1) + b*(2,2) + c*(1,0) + c*(0,1) on n vertices.

    With m = a + 2b + c the family has Q = (2b - c)/m and R- = R+ = 4b/m.
    Among nearby b, the (b, c) whose Q is closest to target is chosen.
    """
    q = Fraction(target_q).limit_denominator(10**12)
    r = Fraction(r_target).limit_denominator(10**6)
    m0 = n / (1 + r / 4 - q)
    b0 = round(r * m0 / 4)
    best = None
    for b in range(max(0, b0 - 11), b0 + 12):
        c_star = (2 * b - q * (n + b)) / (1 - q)
        for c in {math.floor(c_star), math.ceil(c_star)}:
            a = n - b - 2 * c
            if c < 0 or a < 0:
                continue
            m = a + 2 * b + c
            if m == 0 or Fraction(4 * b, m) < Fraction(1, 5):
                continue
            err = abs(Fraction(2 * b - c, m) - q)
            key = (err, abs(b - b0), c)
            if best is None or key < best[0]:
                best = (key, (a, b, c))
    if best is None:
        raise InfeasibleFamilyError(f"no mix family on n={n} vertices for Q={target_q}")
    (err, _, _), (a, b, c) = best
    m = a + 2 * b + c
    if err > Fraction(1, m):
        raise InfeasibleFamilyError(f"closest achievable Q misses target by {float(err):.3g}")
    if q < 0 and 2 * b - c >= 0:
        # |target_q| is below the 1/m resolution: the nearest sequence is not subcritical
        raise InfeasibleFamilyError(
            f"|target_q| * m = {float(abs(q) * m):.3g}: target below resolution"
        )
    return a, b, c


def _truncated_poisson_rate(mean: float, cap: int) -> float:
    """Rate whose Poisson law conditioned on <= cap has the given mean."""
    if cap < 1 or mean >= cap:
        raise InfeasibleFamilyError(f"mean {mean} unreachable with degree cap {cap}")

    def trunc_mean(lam):
        ks = np.arange(cap + 1)
        pk = poisson.pmf(ks, lam)
        return float((ks * pk).sum() / pk.sum()) - mean

    hi = max(2 * mean, 1.0)
    while trunc_mean(hi) < 0:
        hi *= 2
    return brentq(trunc_mean, 1e-12, hi, xtol=1e-14)


def _sample_truncated(rng, lam, cap, size):
    x = rng.poisson(lam, size)
    bad = np.flatnonzero(x > cap)
    while bad.size:
        x[bad] = rng.poisson(lam, bad.size)
        bad = bad[x[bad] > cap]
    return x


def build_family(spec: FamilySpec, rng_seed=None) -> BiDegreeSequence:
    if spec.kind == MIX:
        a, b, c = mix_counts(spec.n, spec.target_q, spec.r_target)
        seq = BiDegreeSequence.from_counts({(1, 1): a, (2, 2): b, (1, 0): c, (0, 1): c})
    else:
        rng = np.random.default_rng(rng_seed)
        cap = int(math.floor(max_degree_cap(spec.n)))
        lam = _truncated_poisson_rate(1 + spec.target_q, cap)
        d_in = _sample_truncated(rng, lam, cap, spec.n)
        d_out = _sample_truncated(rng, lam, cap, spec.n)
        # decrement the surplus side only, so the cap is never exceeded
        surplus = int(d_in.sum() - d_out.sum())
        side = d_in if surplus > 0 else d_out
        surplus = abs(surplus)
        while surplus:
            positive = np.flatnonzero(side > 0)
            pick = rng.choice(positive, size=min(surplus, positive.size), replace=False)
            side[pick] -= 1
            surplus -= pick.size
        seq = BiDegreeSequence(d_in, d_out)
    assert int(seq.d_in.sum()) == int(seq.d_out.sum())
    return seq


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

COUNTS_HEADER = "@counts"


def format_degree_sequence(seq: BiDegreeSequence) -> str:
    return "".join(f"{a} {b}\n" for a, b in seq.pairs)


def format_counts(seq: BiDegreeSequence) -> str:
    lines = [COUNTS_HEADER]
    lines += [f"{i} {j} {c}" for (i, j), c in sorted(seq.degree_counts.items())]
    return "\n".join(lines) + "\n"


def parse_degree_sequence(text: str) -> BiDegreeSequence:
    """Parse either the per-vertex format or the ``@counts`` table format."""
    rows = []
    counts_mode = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == COUNTS_HEADER:
            if rows:
                raise ValueError(f"line {lineno}: {COUNTS_HEADER} must precede data")
            counts_mode = True
            continue
        parts = line.split()
        want = 3 if counts_mode else 2
        if len(parts) != want:
            raise ValueError(f"line {lineno}: expected {want} integers, got {raw!r}")
        try:
            rows.append(tuple(int(p) for p in parts))
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field in {raw!r}") from None
    if counts_mode:
        counts = {}
        for i, j, c in rows:
            counts[(i, j)] = counts.get((i, j), 0) + c
        return BiDegreeSequence.from_counts(counts)
    return BiDegreeSequence.from_pairs(rows)


def read_degree_sequence(path) -> BiDegreeSequence:
    with open(path) as fh:
        return parse_degree_sequence(fh.read())


def write_degree_sequence(seq: BiDegreeSequence, path, counts: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(format_counts(seq) if counts else format_degree_sequence(seq))
