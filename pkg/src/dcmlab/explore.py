"""Out-component exploration on a lazily revealed stub matching.

At each step one unmatched out-stub of the explored set is matched to a
uniformly random unmatched in-stub.  Y counts unmatched out-stubs inside the
explored set, D all unmatched out-stubs, and Q_t is the drift of Y.
"""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from dcmlab.degseq import BiDegreeSequence, compute_params
from dcmlab.sampler import StubMatching

ABSORBED = "absorbed"
CAPPED = "capped"
DRIFT = "drift"
REVISIT = "revisit"


@dataclass(frozen=True)
class StepRecord:
    t: int
    y: int
    d: int
    q: float
    event: str  # "start", a vertex id, or "revisit"


@dataclass
class ExplorationTrace:
    start: int
    records: list
    reason: str
    explored: frozenset
    revealed: np.ndarray = field(repr=False)  # out-stub -> in-stub, -1 if unrevealed

    @property
    def tau(self) -> int:
        return self.records[-1].t

    @property
    def ys(self) -> list[int]:
        return [r.y for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "Y", "D", "Q", "event"])
        for r in self.records:
            w.writerow([r.t, r.y, r.d, repr(r.q), r.event])
        return buf.getvalue()


class Explorer:
    """Mutable exploration state; one instance owns one partial matching."""

    def __init__(self, seq: BiDegreeSequence, start: int, order: str = "fifo"):
        if not 0 <= start < seq.n:
            raise ValueError(f"start vertex {start} out of range")
        if order not in ("fifo", "lifo"):
            raise ValueError("order must be 'fifo' or 'lifo'")
        self.seq = seq
        self.order = order
        self.out_owner, self.in_owner = seq.stub_owners()
        self.out_start, _ = seq.stub_offsets()
        m = seq.m
        self.free_in = np.arange(m, dtype=np.int64)
        self.n_free = m
        self.revealed = np.full(m, -1, dtype=np.int64)
        self.in_c = np.zeros(seq.n, dtype=bool)
        self.pending: deque[int] = deque()
        self.t = 0
        self.y = 0
        self.s_outside = int((seq.d_in * seq.d_out).sum())
        self.out_outside = m
        self.start = start
        self._add(start)
        self.records = [self._record("start")]

    def _add(self, u: int) -> None:
        self.in_c[u] = True
        du = int(self.seq.d_out[u])
        self.y += du
        self.s_outside -= int(self.seq.d_in[u]) * du
        self.out_outside -= du
        self.pending.extend(range(int(self.out_start[u]), int(self.out_start[u]) + du))

    @property
    def d(self) -> int:
        return self.seq.m - self.t

    def q_exact(self) -> Fraction:
        return Fraction(self.s_outside, self.d) - 1 if self.d else Fraction(-1)

    def q(self) -> float:
        return float(self.q_exact())

    def _record(self, event) -> StepRecord:
        # bookkeeping identity D_t = Y_t + sum_{u not in C_t} d+(u)
        assert self.d == self.y + self.out_outside, "D_t bookkeeping identity violated"
        return StepRecord(self.t, self.y, self.d, self.q(), event)

    def step(self, rng: np.random.Generator) -> StepRecord:
        if self.y <= 0:
            raise RuntimeError("exploration already absorbed")
        s = self.pending.popleft() if self.order == "fifo" else self.pending.pop()
        i = int(rng.integers(self.n_free))
        t_stub = int(self.free_in[i])
        self.free_in[i] = self.free_in[self.n_free - 1]
        self.n_free -= 1
        self.revealed[s] = t_stub
        self.t += 1
        u = int(self.in_owner[t_stub])
        self.y -= 1
        if self.in_c[u]:
            event = REVISIT
        else:
            self._add(u)
            event = str(u)
        rec = self._record(event)
        self.records.append(rec)
        return rec

    def increments(self) -> np.ndarray:
        """Y_{t+1} - Y_t for every currently unmatched in-stub (uniformly chosen next)."""
        owners = self.in_owner[self.free_in[: self.n_free]]
        inc = self.seq.d_out[owners] - 1
        return np.where(self.in_c[owners], -1, inc)

    def sample_increments(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Independent one-step continuations from the frozen current state."""
        return self.increments()[rng.integers(self.n_free, size=size)]

    def trace(self, reason: str) -> ExplorationTrace:
        return ExplorationTrace(
            start=self.start,
            records=list(self.records),
            reason=reason,
            explored=frozenset(np.flatnonzero(self.in_c).tolist()),
            revealed=self.revealed.copy(),
        )


def explore_out_component(
    seq: BiDegreeSequence,
    start: int,
    rng: np.random.Generator,
    step_cap: int,
    drift_floor: Optional[float] = None,
    order: str = "fifo",
) -> ExplorationTrace:
    """Run until Y hits 0, t reaches ``step_cap``, or Q_t >= ``drift_floor``."""
    if step_cap < 1:
        raise ValueError("step_cap must be at least 1")
    ex = Explorer(seq, start, order)
    while True:
        if ex.y == 0:
            return ex.trace(ABSORBED)
        if drift_floor is not None and ex.q() >= drift_floor:
            return ex.trace(DRIFT)
        if ex.t >= step_cap:
            return ex.trace(CAPPED)
        ex.step(rng)


def complete_matching(trace: ExplorationTrace, seq: BiDegreeSequence, rng: np.random.Generator) -> StubMatching:
    """Fill the unrevealed part of the matching uniformly at random."""
    match = trace.revealed.copy()
    open_out = np.flatnonzero(match < 0)
    used = np.zeros(seq.m, dtype=bool)
    used[match[match >= 0]] = True
    open_in = np.flatnonzero(~used)
    match[open_out] = open_in[rng.permutation(open_in.size)]
    return StubMatching(seq, match)


@dataclass(frozen=True)
class SurveyResult:
    sample_size: int
    f_cap: int
    absorbed: float
    capped: float
    drift: float
    mean_tau: float
    mean_tau_bound: Optional[float]  # mean of 2 d+(v)/|Q| over the starts
    capped_bound: Optional[float]  # Markov: mean of 2 d+(v)/(|Q| f_cap)
    taus: np.ndarray = field(repr=False)


def largest_out_component_survey(
    seq: BiDegreeSequence,
    rng: np.random.Generator,
    f_cap: int,
    sample_size: int,
    drift_floor: Optional[float] = None,
) -> SurveyResult:
    """Explore from ``sample_size`` uniform start vertices and tabulate stopping reasons."""
    if sample_size < 1:
        raise ValueError("sample_size must be at least 1")
    q = compute_params(seq, order=1).q
    starts = rng.integers(seq.n, size=sample_size)
    reasons = {ABSORBED: 0, CAPPED: 0, DRIFT: 0}
    taus = np.empty(sample_size, dtype=np.int64)
    for i, v in enumerate(starts.tolist()):
        tr = explore_out_component(seq, v, rng, f_cap, drift_floor)
        reasons[tr.reason] += 1
        taus[i] = tr.tau
    if q < 0:
        mean_bound = float(2 * seq.d_out[starts].mean() / abs(q))
        capped_bound = mean_bound / f_cap
    else:
        mean_bound = capped_bound = None
    return SurveyResult(
        sample_size=sample_size,
        f_cap=f_cap,
        absorbed=reasons[ABSORBED] / sample_size,
        capped=reasons[CAPPED] / sample_size,
        drift=reasons[DRIFT] / sample_size,
        mean_tau=float(taus.mean()),
        mean_tau_bound=mean_bound,
        capped_bound=capped_bound,
        taus=taus,
    )
