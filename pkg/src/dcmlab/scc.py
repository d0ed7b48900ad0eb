"""Strongly connected components, their classification and size statistics."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from dcmlab.sampler import MultiDigraph

# below this size the pure-Python Tarjan is used by default
SCIPY_THRESHOLD = 1000


def tarjan_labels(n: int, indptr, indices) -> tuple[list[int], int]:
    """Iterative Tarjan over CSR adjacency; returns (component label per vertex, count).

    Components are labelled in the order Tarjan completes them (reverse
    topological order of the condensation).
    """
    indptr = list(map(int, indptr))
    indices = list(map(int, indices))
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [[root, indptr[root]]]
        while work:
            frame = work[-1]
            v, pos = frame
            if pos < indptr[v + 1]:
                w = indices[pos]
                frame[1] = pos + 1
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append([w, indptr[w]])
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp, n_comp


@dataclass(frozen=True)
class SccDecomposition:
    labels: np.ndarray  # component id per vertex
    n_components: int
    sizes: np.ndarray  # vertex count per component id
    internal_edges: np.ndarray  # edges with both ends in the component

    def components(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1]) if self.n_components else []

    def partition(self) -> frozenset:
        return frozenset(frozenset(c.tolist()) for c in self.components())


def decompose(g: MultiDigraph, method: str = "auto") -> SccDecomposition:
    """SCC partition in O(n + m); ``method`` is 'tarjan', 'scipy' or 'auto'."""
    if method == "auto":
        method = "scipy" if g.n >= SCIPY_THRESHOLD else "tarjan"
    if method == "tarjan":
        indptr, indices = g.out_adjacency()
        comp, k = tarjan_labels(g.n, indptr, indices)
        labels = np.asarray(comp, dtype=np.int64)
    elif method == "scipy":
        adj = csr_matrix(
            (np.ones(g.m, dtype=np.int32), (g.src, g.dst)), shape=(g.n, g.n)
        )
        k, labels = connected_components(adj, directed=True, connection="strong")
        labels = labels.astype(np.int64)
    else:
        raise ValueError(f"unknown SCC method {method!r}")
    sizes = np.bincount(labels, minlength=k)
    inside = labels[g.src] == labels[g.dst]
    internal = np.bincount(labels[g.src[inside]], minlength=k)
    return SccDecomposition(labels, int(k), sizes, internal)


class ComponentClass(enum.Enum):
    TRIVIAL = "trivial"
    CYCLE = "cycle"
    COMPLEX = "complex"


def classify_arrays(sizes: np.ndarray, internal: np.ndarray) -> np.ndarray:
    """Vectorised classes: 0 trivial, 1 cycle, 2 complex."""
    cls = np.where(internal > sizes, 2, 1)
    cls[(sizes == 1) & (internal == 0)] = 0
    return cls


_CLASS_OF = {0: ComponentClass.TRIVIAL, 1: ComponentClass.CYCLE, 2: ComponentClass.COMPLEX}


def classify(decomp: SccDecomposition, g: MultiDigraph = None) -> list[ComponentClass]:
    """Class of every component id.

    A strongly connected piece with as many internal edges as vertices has all
    internal semi-degrees equal to one, so it is a cycle; more edges means complex.
    """
    return [_CLASS_OF[c] for c in classify_arrays(decomp.sizes, decomp.internal_edges).tolist()]


@dataclass(frozen=True)
class ComponentCensus:
    n: int
    sizes: np.ndarray  # descending, one entry per component
    class_counts: dict
    n_complex: int
    complex_sizes: np.ndarray  # descending
    cycle_lengths: np.ndarray  # descending

    def kth_largest(self, k: int) -> int:
        """|C_k|; 0 when there are fewer than k components."""
        if k < 1:
            raise ValueError("k must be at least 1")
        return int(self.sizes[k - 1]) if k <= self.sizes.size else 0

    def window_count(self, lo: int, hi: float = np.inf) -> int:
        """Number of cycle components with length in [lo, hi]."""
        cl = self.cycle_lengths
        return int(np.count_nonzero((cl >= lo) & (cl <= hi)))

    def max_cycle(self) -> int:
        return int(self.cycle_lengths[0]) if self.cycle_lengths.size else 0

    def to_record(self, windows: dict | None = None, top: int = 10) -> dict:
        rec = {
            "n": self.n,
            "n_components": int(self.sizes.size),
            "sizes_top": self.sizes[:top].tolist(),
            "classes": dict(self.class_counts),
            "n_complex": self.n_complex,
            "complex_sizes": self.complex_sizes.tolist(),
            "cycle_lengths": self.cycle_lengths.tolist(),
        }
        if windows:
            rec["W"] = {name: self.window_count(lo, hi) for name, (lo, hi) in windows.items()}
        return rec

    def to_json(self, windows: dict | None = None, top: int = 10) -> str:
        return json.dumps(self.to_record(windows, top), sort_keys=True)


def census(decomp: SccDecomposition, g: MultiDigraph = None, cycle_floor: int = 1) -> ComponentCensus:
    """Size order statistics; cycle lengths below ``cycle_floor`` are dropped."""
    sizes, internal = decomp.sizes, decomp.internal_edges
    cls = classify_arrays(sizes, internal)
    counts = np.bincount(cls, minlength=3)
    cycles = sizes[(cls == 1) & (sizes >= cycle_floor)]
    complexes = sizes[cls == 2]
    return ComponentCensus(
        n=int(sizes.sum()),
        sizes=np.sort(sizes)[::-1],
        class_counts={c.value: int(counts[i]) for i, c in _CLASS_OF.items()},
        n_complex=int(counts[2]),
        complex_sizes=np.sort(complexes)[::-1],
        cycle_lengths=np.sort(cycles)[::-1],
    )


def analyze(g: MultiDigraph, method: str = "auto", cycle_floor: int = 1) -> ComponentCensus:
    return census(decompose(g, method), g, cycle_floor)
