"""Exact brute-force ground truth at toy scale.

Everything here enumerates all m! stub matchings and returns exact rationals.
Enumeration caps are hard refusals, never silent truncation.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

from dcmlab.degseq import BiDegreeSequence
from dcmlab.sampler import ForcedPairs, MultiDigraph, StubMatching, condition_on_pairs
from dcmlab.scc import analyze
from dcmlab.theory import MotifProfile, falling

MATCHING_CAP = 9
SCC_COUNT_CAP = 8
CYCLE_LIMIT = 10**6


class OracleCapError(ValueError):
    """Raised when an exact computation would exceed its enumeration cap."""


def _check_cap(m: int, cap: int = MATCHING_CAP) -> None:
    if m > cap:
        raise OracleCapError(f"m = {m} exceeds the enumeration cap {cap} ({cap}! matchings)")


@dataclass(frozen=True)
class ExactDistribution:
    probs: dict  # outcome -> Fraction

    def __post_init__(self):
        total = sum(self.probs.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def __getitem__(self, outcome) -> Fraction:
        return self.probs.get(outcome, Fraction(0))

    @property
    def support(self) -> list:
        return sorted(self.probs)

    def tv(self, other: "ExactDistribution") -> Fraction:
        keys = set(self.probs) | set(other.probs)
        return sum((abs(self[k] - other[k]) for k in keys), Fraction(0)) / 2

    def to_json(self) -> str:
        return json.dumps(
            {str(k): {"num": str(v.numerator), "den": str(v.denominator)} for k, v in sorted(self.probs.items())},
            sort_keys=True,
        )

    @classmethod
    def from_counts(cls, counts: Counter, total: int) -> "ExactDistribution":
        return cls({k: Fraction(c, total) for k, c in counts.items()})


def fraction_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def enumerate_matchings(seq: BiDegreeSequence, cap: int = MATCHING_CAP) -> Iterator[StubMatching]:
    """All m! matchings, each exactly once."""
    _check_cap(seq.m, cap)
    for perm in itertools.permutations(range(seq.m)):
        yield StubMatching(seq, perm)


def _edge_lists(seq: BiDegreeSequence) -> Iterator[tuple[tuple, tuple]]:
    """(matching, edge tuple in out-stub order) without building graph objects."""
    _check_cap(seq.m)
    out_owner, in_owner = (a.tolist() for a in seq.stub_owners())
    for perm in itertools.permutations(range(seq.m)):
        yield perm, tuple(zip(out_owner, (in_owner[t] for t in perm)))


@lru_cache(maxsize=256)
def graph_counts(seq: BiDegreeSequence) -> dict:
    """Number of matchings producing each labelled multigraph (edge-multiset key)."""
    counts: Counter = Counter()
    for _, edges in _edge_lists(seq):
        counts[tuple(sorted(Counter(edges).items()))] += 1
    return dict(counts)


def exact_event_probability(seq: BiDegreeSequence, predicate: Callable[[MultiDigraph], bool]) -> Fraction:
    """(#matchings whose graph satisfies ``predicate``) / m!."""
    _check_cap(seq.m)
    hits = 0
    for key, cnt in graph_counts(seq).items():
        edges = [e for e, mult in key for _ in range(mult)]
        if predicate(MultiDigraph.from_edges(seq.n, edges)):
            hits += cnt
    return Fraction(hits, math.factorial(seq.m))


def exact_component_size_distribution(seq: BiDegreeSequence, k: int) -> ExactDistribution:
    """Exact pmf of |C_k|, the k-th largest strongly connected component size."""
    _check_cap(seq.m)
    counts: Counter = Counter()
    for key, cnt in graph_counts(seq).items():
        edges = [e for e, mult in key for _ in range(mult)]
        cen = analyze(MultiDigraph.from_edges(seq.n, edges), method="tarjan")
        counts[cen.kth_largest(k)] += cnt
    return ExactDistribution.from_counts(counts, math.factorial(seq.m))


# ---------------------------------------------------------------------------
# Motif probabilities
# ---------------------------------------------------------------------------

def exact_motif_probability(seq: BiDegreeSequence, H: MotifProfile) -> Fraction:
    """P(a uniformly random injective map V(H) -> [n] embeds H), exactly.

    A map embeds H when every ordered pair (u, v) carries at least as many
    parallel edges in G as in H.
    """
    n = seq.n
    if H.h > n:
        return Fraction(0)
    need = Counter(H.edges)
    need_items = list(need.items())
    hits = 0
    for key, cnt in graph_counts(seq).items():
        mult = dict(key)
        good = 0
        for phi in itertools.permutations(range(n), H.h):
            for (u, v), k in need_items:
                if mult.get((phi[u], phi[v]), 0) < k:
                    break
            else:
                good += 1
        hits += cnt * good
    return Fraction(hits, math.factorial(seq.m) * falling(n, H.h))


# ---------------------------------------------------------------------------
# Strongly connected multi-digraph counts
# ---------------------------------------------------------------------------

def profile_sequence(n: int, a: int, b: int) -> BiDegreeSequence:
    """Canonical labelling of the profile: (1,1)s, then (1,2)s, (2,1)s, (2,2)s."""
    if min(a, b) < 0 or n - 2 * a - b < 0:
        raise ValueError(f"infeasible profile (n, a, b) = {(n, a, b)}")
    pairs = [(1, 1)] * (n - 2 * a - b) + [(1, 2)] * a + [(2, 1)] * a + [(2, 2)] * b
    return BiDegreeSequence.from_pairs(pairs)


def _strongly_connected(n: int, edges) -> bool:
    if n == 0:
        return False
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for u, v in edges:
        fwd[u].append(v)
        bwd[v].append(u)
    for adj in (fwd, bwd):
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != n:
            return False
    return True


def count_scc_multidigraphs(n: int, a: int, b: int) -> int:
    """Labelled strongly connected multi-digraphs realising the canonical profile sequence.

    Matchings are collapsed to multigraphs by their edge multiset, so parallel
    stub permutations count once.
    """
    seq = profile_sequence(n, a, b)
    _check_cap(seq.m, SCC_COUNT_CAP)
    if seq.m > MATCHING_CAP:
        raise OracleCapError("profile exceeds the matching cap")
    return sum(
        1 for key in graph_counts(seq) if _strongly_connected(n, [e for e, _ in key])
    )


# ---------------------------------------------------------------------------
# Preheart configurations, enumerated directly
# ---------------------------------------------------------------------------

def _ordered_assignments(items: list, k: int) -> Iterator[tuple]:
    """All ways to place labelled ``items`` into k linearly ordered lists."""
    if not items:
        yield tuple(() for _ in range(k))
        return
    head, rest = items[0], items[1:]
    for lists in _ordered_assignments(rest, k):
        for i, lst in enumerate(lists):
            for pos in range(len(lst) + 1):
                yield lists[:i] + (lst[:pos] + (head,) + lst[pos:],) + lists[i + 1:]


def enumerate_preheart_configs(seq: BiDegreeSequence) -> list[tuple]:
    """Every (heart matching, ordered assignment) pair, enumerated independently of any formula."""
    if seq.n == 0 or seq.d_in.min() < 1 or seq.d_out.min() < 1:
        raise ValueError("preheart model needs all semi-degrees >= 1")
    heart = [v for v in range(seq.n) if seq.d_in[v] + seq.d_out[v] >= 3]
    if not heart:
        raise ValueError("empty heart")
    chain = [v for v in range(seq.n) if seq.d_in[v] + seq.d_out[v] < 3]
    out_stubs = [(v, i) for v in heart for i in range(int(seq.d_out[v]))]
    in_stubs = [(v, i) for v in heart for i in range(int(seq.d_in[v]))]
    _check_cap(len(out_stubs))
    configs = []
    for perm in itertools.permutations(in_stubs):
        heart_matching = tuple(zip(out_stubs, perm))
        for assignment in _ordered_assignments(chain, len(out_stubs)):
            configs.append((heart_matching, assignment))
    return configs


def count_matchings_without_chain_cycles(seq: BiDegreeSequence) -> int:
    """Matchings of ``seq`` with no cycle made only of (1,1)-vertices (the preheart image)."""
    plain = {v for v in range(seq.n) if seq.d_in[v] == 1 and seq.d_out[v] == 1}
    total = 0
    for _, edges in _edge_lists(seq):
        succ = {u: v for u, v in edges if u in plain}
        bad = False
        seen: set = set()
        for start in plain:
            if start in seen:
                continue
            path = []
            cur = start
            while cur in plain and cur not in seen:
                seen.add(cur)
                path.append(cur)
                cur = succ[cur]
            if cur in path:
                bad = True
                break
        if not bad:
            total += 1
    return total


# ---------------------------------------------------------------------------
# Subgraph cycles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubgraphCycle:
    vertices: tuple  # rotation starting at the smallest vertex
    principal_multiplicity: int  # prod over cycle vertices of d-(v) d+(v)
    realized: int  # principal copies present: product of edge multiplicities

    @property
    def length(self) -> int:
        return len(self.vertices)


def enumerate_subgraph_cycles(g: MultiDigraph, limit: int = CYCLE_LIMIT) -> list[SubgraphCycle]:
    """All vertex-simple directed cycles of ``g`` (union level), up to rotation."""
    if g.n > 20 and g.m > 4 * g.n:
        raise OracleCapError("graph too large for exhaustive cycle enumeration")
    mult = Counter(zip(g.src.tolist(), g.dst.tolist()))
    succ = [sorted({v for (u, v) in mult if u == x}) for x in range(g.n)]
    d_in = g.in_degrees().tolist()
    d_out = g.out_degrees().tolist()
    cycles: list[SubgraphCycle] = []

    def emit(path):
        if len(cycles) >= limit:
            raise OracleCapError(f"more than {limit} cycles")
        principal = math.prod(d_in[v] * d_out[v] for v in path)
        realized = math.prod(mult[(path[i], path[(i + 1) % len(path)])] for i in range(len(path)))
        cycles.append(SubgraphCycle(tuple(path), principal, realized))

    for s in range(g.n):
        # cycles whose smallest vertex is s
        path = [s]
        on_path = {s}
        stack = [iter(succ[s])]
        while stack:
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if w == s:
                emit(path)
            elif w > s and w not in on_path:
                path.append(w)
                on_path.add(w)
                stack.append(iter(succ[w]))
    return cycles


def compare_cycles_with_census(g: MultiDigraph, cycles=None) -> dict:
    """Union-level subgraph cycles versus cycle-class components."""
    cycles = enumerate_subgraph_cycles(g) if cycles is None else cycles
    cen = analyze(g, method="tarjan")
    return {
        "subgraph_cycles": len(cycles),
        "principal_cycles_realized": sum(c.realized for c in cycles),
        "cycle_components": int(cen.cycle_lengths.size),
        "extra_cycles": len(cycles) - int(cen.cycle_lengths.size),
    }


# ---------------------------------------------------------------------------
# Switching coupling
# ---------------------------------------------------------------------------

def exact_coupling_check(seq: BiDegreeSequence, forced) -> Fraction:
    """TV distance between the switched pushforward of the uniform law and the exact conditional."""
    forced = forced if isinstance(forced, ForcedPairs) else ForcedPairs(forced)
    m = seq.m
    _check_cap(m)
    for a, b in forced:
        if not (0 <= a < m and 0 <= b < m):
            raise ValueError(f"forced pair {(a, b)} is impossible: stub id outside [0, {m})")
    push: Counter = Counter()
    cond: Counter = Counter()
    for mt in enumerate_matchings(seq):
        push[condition_on_pairs(mt, forced).key()] += 1
        if all(mt.match[a] == b for a, b in forced):
            cond[mt.key()] += 1
    if not cond:
        raise ValueError("forced pairs describe a probability-zero event")
    total = math.factorial(m)
    p = ExactDistribution.from_counts(push, total)
    q = ExactDistribution.from_counts(cond, sum(cond.values()))
    return p.tv(q)


def oracle_result_json(name: str, value: Fraction, **meta) -> str:
    return json.dumps({"name": name, "value": fraction_json(value), **meta}, sort_keys=True)
