"""Uniform stub matchings, preheart configurations and the pair-forcing switching.

Stub ids are stable: out-stub ``s`` belongs to ``seq.stub_owners()[0][s]`` and
in-stub ``t`` to ``seq.stub_owners()[1][t]``; ids are contiguous per vertex.
A matching is an array ``match`` with ``match[s] = t``.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from dcmlab.degseq import BiDegreeSequence


class StubMatching:
    """A perfect matching of out-stubs to in-stubs for a fixed degree sequence."""

    __slots__ = ("seq", "match")

    def __init__(self, seq: BiDegreeSequence, match):
        match = np.asarray(match, dtype=np.int64)
        if match.shape != (seq.m,):
            raise ValueError(f"matching must have length m={seq.m}")
        self.seq = seq
        self.match = match

    @property
    def m(self) -> int:
        return self.seq.m

    def validate(self) -> None:
        if self.m and not np.array_equal(np.sort(self.match), np.arange(self.m)):
            raise ValueError("match is not a bijection on [0, m)")

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.match)
        inv[self.match] = np.arange(self.m)
        return inv

    def key(self) -> tuple:
        return tuple(self.match.tolist())

    def pairs(self) -> list[tuple[int, int]]:
        return list(enumerate(self.match.tolist()))

    def graph(self) -> "MultiDigraph":
        return MultiDigraph.from_matching(self)

    def copy(self) -> "StubMatching":
        return StubMatching(self.seq, self.match.copy())

    def __eq__(self, other):
        if not isinstance(other, StubMatching):
            return NotImplemented
        return self.seq == other.seq and np.array_equal(self.match, other.match)

    def __repr__(self):
        return f"StubMatching(m={self.m}, match={self.match.tolist() if self.m <= 12 else '...'})"


class MultiDigraph:
    """Labelled multi-digraph on ``range(n)``; parallel edges and loops allowed.

    When built from a matching, edge ``e`` is the edge of out-stub ``e`` and
    the matching stays attached in ``self.matching``.
    """

    __slots__ = ("n", "src", "dst", "matching", "_csr")

    def __init__(self, n: int, src, dst, matching: Optional[StubMatching] = None):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        self.n = int(n)
        self.src = src
        self.dst = dst
        self.matching = matching
        self._csr = None

    @classmethod
    def from_matching(cls, matching: StubMatching) -> "MultiDigraph":
        out_owner, in_owner = matching.seq.stub_owners()
        return cls(matching.seq.n, out_owner, in_owner[matching.match], matching)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "MultiDigraph":
        edges = list(edges)
        if not edges:
            return cls(n, [], [])
        src, dst = zip(*edges)
        return cls(n, src, dst)

    @property
    def m(self) -> int:
        return int(self.src.size)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    def out_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR arrays (indptr, indices) of out-neighbours, with multiplicity."""
        if self._csr is None:
            order = np.argsort(self.src, kind="stable")
            indices = self.dst[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.src, minlength=self.n), out=indptr[1:])
            self._csr = (indptr, indices)
        return self._csr

    def edge_multiset(self) -> tuple:
        """Canonical key: sorted (source, target, multiplicity) triples."""
        if not self.m:
            return ()
        pairs, mult = np.unique(np.stack([self.src, self.dst], axis=1), axis=0, return_counts=True)
        return tuple((int(u), int(v), int(k)) for (u, v), k in zip(pairs, mult))

    def __repr__(self):
        return f"MultiDigraph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# Edge-list format
# ---------------------------------------------------------------------------

def format_edge_list(g: MultiDigraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in zip(g.src.tolist(), g.dst.tolist())]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> MultiDigraph:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two integers, got {raw!r}")
        rows.append((int(parts[0]), int(parts[1])))
    if not rows:
        raise ValueError("edge list is empty (missing 'n m' header)")
    (n, m), edges = rows[0], rows[1:]
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges, found {len(edges)}")
    return MultiDigraph.from_edges(n, edges)


def write_edge_list(g: MultiDigraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))


def read_edge_list(path) -> MultiDigraph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_configuration(seq: BiDegreeSequence, rng: np.random.Generator) -> StubMatching:
    """Uniform matching: a uniform permutation of in-stubs against out-stub order."""
    return StubMatching(seq, rng.permutation(seq.m))


def _preheart_check(seq: BiDegreeSequence) -> np.ndarray:
    if seq.n == 0 or seq.d_in.min() < 1 or seq.d_out.min() < 1:
        raise ValueError("preheart model needs every vertex to have d_in >= 1 and d_out >= 1")
    heart = seq.d_in + seq.d_out >= 3
    if not heart.any():
        raise ValueError("preheart model needs a vertex with d_in + d_out >= 3")
    return heart


def count_preheart_configs(seq: BiDegreeSequence) -> int:
    """(n' + m - n)/m * m!, where n' counts the heart vertices."""
    heart = _preheart_check(seq)
    n_heart = int(heart.sum())
    return (n_heart + seq.m - seq.n) * math.factorial(seq.m - 1)


def sample_preheart(seq: BiDegreeSequence, rng: np.random.Generator) -> MultiDigraph:
    """Uniform preheart configuration, returned as a graph with its full-stub matching.

    The heart (vertices with d_in + d_out >= 3) is matched uniformly; the
    (1,1)-vertices are then distributed over the heart arcs, each arc carrying
    a uniformly random linear order.  Threading the chains through the stubs
    gives an injective map from configurations to matchings of ``seq``.
    """
    heart = _preheart_check(seq)
    out_start, in_start = seq.stub_offsets()
    heart_out = np.concatenate([np.arange(out_start[v], out_start[v + 1]) for v in np.flatnonzero(heart)])
    heart_in = np.concatenate([np.arange(in_start[v], in_start[v + 1]) for v in np.flatnonzero(heart)])
    k = heart_out.size
    targets = heart_in[rng.permutation(k)]

    chain_vertices = np.flatnonzero(~heart)
    n_chain = chain_vertices.size
    # uniform arrangement of the chain vertices and k-1 separators
    tokens = rng.permutation(n_chain + k - 1)
    chains: list[list[int]] = [[]]
    for tok in tokens.tolist():
        if tok < n_chain:
            chains[-1].append(int(chain_vertices[tok]))
        else:
            chains.append([])

    match = np.empty(seq.m, dtype=np.int64)
    for s, t, chain in zip(heart_out.tolist(), targets.tolist(), chains):
        cur = s
        for x in chain:
            match[cur] = in_start[x]
            cur = out_start[x]
        match[cur] = t
    return MultiDigraph.from_matching(StubMatching(seq, match))


# ---------------------------------------------------------------------------
# Conditioning on forced stub pairs
# ---------------------------------------------------------------------------

class ForcedPairs(tuple):
    """Sequence of (out-stub, in-stub) pairs, distinct on each side."""

    def __new__(cls, pairs: Iterable[tuple[int, int]]):
        pairs = tuple((int(a), int(b)) for a, b in pairs)
        outs = [a for a, _ in pairs]
        ins = [b for _, b in pairs]
        if len(set(outs)) != len(outs):
            raise ValueError("forced pairs repeat an out-stub")
        if len(set(ins)) != len(ins):
            raise ValueError("forced pairs repeat an in-stub")
        return super().__new__(cls, pairs)


def condition_on_pairs(matching: StubMatching, forced) -> StubMatching:
    """Apply one 2-swap per forced pair, in list order.

    If ``matching`` is uniform, the result is uniform among matchings that
    contain every forced pair.
    """
    forced = forced if isinstance(forced, ForcedPairs) else ForcedPairs(forced)
    m = matching.m
    match = matching.match.copy()
    inv = matching.inverse()
    for a, b in forced:
        if not (0 <= a < m and 0 <= b < m):
            raise ValueError(f"forced pair {(a, b)} outside stub range [0, {m})")
        if match[a] == b:
            continue
        b_prime = match[a]
        a_prime = inv[b]
        match[a], match[a_prime] = b, b_prime
        inv[b], inv[b_prime] = a, a_prime
    return StubMatching(matching.seq, match)
