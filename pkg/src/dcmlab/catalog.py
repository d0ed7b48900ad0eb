"""Fixed toy catalog and the exact verification suite built on the oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import chisquare

from dcmlab import oracle
from dcmlab.degseq import BiDegreeSequence, compute_params
from dcmlab.sampler import count_preheart_configs, sample_configuration
from dcmlab.scc import analyze
from dcmlab.theory import (
    MotifProfile,
    cycle_lower_bound,
    cycle_motif,
    path_motif,
    s_motif,
    scc_count_upper_bound,
    subgraph_upper_bound,
    t_motif,
)

_RAW_CATALOG = [
    # m = 1
    [(1, 1)],
    [(1, 0), (0, 1)],
    # m = 2
    [(1, 1)] * 2,
    [(2, 2)],
    [(2, 1), (0, 1)],
    [(1, 2), (1, 0)],
    [(1, 1), (1, 0), (0, 1)],
    [(2, 0), (0, 2)],
    # m = 3
    [(1, 1)] * 3,
    [(2, 2), (1, 1)],
    [(2, 1), (1, 2)],
    [(3, 3)],
    [(1, 1), (1, 1), (1, 0), (0, 1)],
    [(2, 1), (1, 1), (0, 1)],
    [(3, 0), (0, 1), (0, 1), (0, 1)],
    # m = 4
    [(1, 1)] * 4,
    [(2, 2), (1, 1), (1, 1)],
    [(2, 2), (2, 2)],
    [(2, 1), (2, 1), (0, 2)],
    [(2, 1), (2, 1), (0, 1), (0, 1)],
    [(2, 2), (1, 1), (1, 0), (0, 1)],
    [(3, 1), (1, 3)],
    [(1, 1), (1, 1), (1, 1), (1, 0), (0, 1)],
    [(2, 2), (1, 2), (1, 0)],
    # m = 5
    [(1, 1)] * 5,
    [(2, 2), (1, 1), (1, 1), (1, 1)],
    [(2, 1), (1, 2), (1, 1), (1, 1)],
    [(2, 2), (2, 2), (1, 1)],
    [(3, 3), (1, 1), (1, 1)],
    [(2, 2), (1, 1), (1, 1), (1, 0), (0, 1)],
    [(2, 1), (2, 1), (1, 2), (0, 1)],
    [(3, 2), (1, 2), (1, 1)],
    # m = 6
    [(1, 1)] * 6,
    [(2, 2), (1, 1), (1, 1), (1, 1), (1, 1)],
    [(2, 2), (2, 2), (1, 1), (1, 1)],
    [(2, 1), (2, 1), (1, 2), (1, 2)],
    [(3, 3), (3, 3)],
    [(2, 2), (1, 1), (1, 1), (1, 1), (1, 0), (0, 1)],
    [(2, 2), (2, 2), (2, 2)],
    [(3, 2), (2, 3), (1, 1)],
]

CATALOG: tuple[BiDegreeSequence, ...] = tuple(BiDegreeSequence.from_pairs(p) for p in _RAW_CATALOG)
PREHEART_EXAMPLE = BiDegreeSequence.from_pairs([(2, 2), (1, 1), (1, 1)])


def catalog_motifs() -> list[MotifProfile]:
    return [
        cycle_motif(1),
        path_motif(1),
        path_motif(2),
        cycle_motif(2),
        cycle_motif(3),
        MotifProfile.from_edges(3, [(0, 1), (0, 2)], name="out-star"),
        MotifProfile.from_edges(3, [(1, 0), (2, 0)], name="in-star"),
        MotifProfile.from_edges(2, [(0, 1), (0, 1)], name="double-edge"),
        t_motif(1, 2),
        t_motif(2, 2),
        s_motif(1, 1, 1),
    ]


def catalog_eps(seq: BiDegreeSequence) -> Fraction:
    """Largest eps for which the toy sequence meets the eps-proportion conditions."""
    n = seq.n
    zero_semi = int(np.count_nonzero((seq.d_in == 0) | (seq.d_out == 0)))
    n11 = int(np.count_nonzero((seq.d_in == 1) & (seq.d_out == 1)))
    return min(1 - Fraction(zero_semi, n), 1 - Fraction(n11, n))


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checks} checks, {len(self.violations)} violations"


def motif_bound_suite(catalog=CATALOG) -> SuiteResult:
    """Exact motif probabilities against the upper bound, and cycles against the lower bound."""
    res = SuiteResult("motif-bounds")
    motifs = catalog_motifs()
    vacuous = 0
    for seq in catalog:
        if seq.m > 6:
            continue
        params = compute_params(seq, order=3)
        delta = seq.max_degree
        eps = catalog_eps(seq)
        for H in motifs:
            if H.h > seq.n or H.k > seq.m:
                continue
            p = oracle.exact_motif_probability(seq, H)
            ub = subgraph_upper_bound(H, params, seq.n, seq.m)
            res.checks += 1
            if p > ub.p_plus:
                res.violations.append((seq.pairs, H.name, "upper", p, ub.p_plus))
            if H.name.startswith("C"):
                lb = cycle_lower_bound(H.h, params, seq.n, seq.m, delta, eps)
                vacuous += lb.vacuous
                res.checks += 1
                if p < lb.value:
                    res.violations.append((seq.pairs, H.name, "lower", p, lb.value))
    res.info["vacuous_lower_bounds"] = vacuous
    return res


def feasible_profiles(max_m: int = 7):
    for n in range(1, max_m + 1):
        for a in range(0, n // 2 + 1):
            for b in range(0, n - 2 * a + 1):
                if a + b >= 1 and n + a + b <= max_m:
                    yield n, a, b


def counting_suite(max_m: int = 7) -> SuiteResult:
    res = SuiteResult("scc-counting")
    for n, a, b in feasible_profiles(max_m):
        count = oracle.count_scc_multidigraphs(n, a, b)
        m = n + a + b
        bound = scc_count_upper_bound(n, a, b)
        multinomial = bound // ((3 * a + 2 * b) * math.factorial(m - 1))
        res.checks += 2
        # the canonical assignment alone, and all multinomial relabellings
        if count > (3 * a + 2 * b) * math.factorial(m - 1):
            res.violations.append(((n, a, b), "fixed", count))
        if count * multinomial > bound:
            res.violations.append(((n, a, b), "all", count * multinomial, bound))
        res.info[(n, a, b)] = count
    for profile, want in (((2, 1, 0), 1), ((1, 0, 1), 1)):
        res.checks += 1
        got = res.info.get(profile, oracle.count_scc_multidigraphs(*profile))
        if got != want:
            res.violations.append((profile, "spot", got, want))
    return res


def preheart_suite(seq: BiDegreeSequence = PREHEART_EXAMPLE) -> SuiteResult:
    res = SuiteResult("preheart-count")
    direct = len(oracle.enumerate_preheart_configs(seq))
    image = oracle.count_matchings_without_chain_cycles(seq)
    formula = count_preheart_configs(seq)
    res.checks = 3
    res.info.update(direct=direct, image=image, formula=formula)
    if not direct == image == formula:
        res.violations.append((direct, image, formula))
    return res


def forced_lists(m: int, max_len: int = 3):
    for r in range(1, max_len + 1):
        for outs in itertools.permutations(range(m), r):
            for ins in itertools.permutations(range(m), r):
                yield tuple(zip(outs, ins))


def coupling_suite(catalog=CATALOG, max_m: int = 5, max_len: int = 3) -> SuiteResult:
    res = SuiteResult("switching-coupling")
    for seq in catalog:
        if seq.m > max_m:
            continue
        for forced in forced_lists(seq.m, max_len):
            tv = oracle.exact_coupling_check(seq, forced)
            res.checks += 1
            if tv != 0:
                res.violations.append((seq.pairs, forced, tv))
    return res


def bridge_suite(draws: int = 100_000, seed: int = 12345, n: int = 3) -> SuiteResult:
    """Monte Carlo |C_1| frequencies against the exact pmf by chi-square."""
    res = SuiteResult("exact-vs-monte-carlo")
    seq = BiDegreeSequence.from_pairs([(1, 1)] * n)
    exact = oracle.exact_component_size_distribution(seq, 1)
    rng = np.random.default_rng(seed)
    support = exact.support
    observed = dict.fromkeys(support, 0)
    for _ in range(draws):
        observed[analyze(sample_configuration(seq, rng).graph(), method="tarjan").kth_largest(1)] += 1
    f_obs = np.array([observed[s] for s in support], dtype=float)
    f_exp = np.array([float(exact[s]) * draws for s in support])
    pval = float(chisquare(f_obs, f_exp).pvalue)
    res.checks = 1
    res.info.update(observed=observed, pvalue=pval)
    if pval <= 1e-3:
        res.violations.append(("chi2", pval))
    return res


SUITES = {
    "motif": motif_bound_suite,
    "counting": counting_suite,
    "preheart": preheart_suite,
    "coupling": coupling_suite,
    "bridge": bridge_suite,
}


def run_verify(names=None) -> list[SuiteResult]:
    names = list(SUITES) if names is None else names
    return [SUITES[name]() for name in names]
