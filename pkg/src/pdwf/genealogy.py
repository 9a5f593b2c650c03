"""Backward ancestral-count chain of the discrete genealogy.

With j current lineages in a population of N, the next (older) count is the
number of occupied cells when j parents are chosen uniformly at random, so

    P(next = i | current = j) = N^{-j} S(j, i) C(N, i) i!

with S(j, i) the Stirling numbers of the second kind. Simulation throws the
j balls directly; the Stirling formula is kept as the verification oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DomainError, ResourceError, ValidationError

_NEG_INF = float("-inf")

# cached rows of log S(j, i); row j has entries i = 0..j
_log_stirling_rows: list[np.ndarray] = [np.array([0.0])]


def stirling2_log(j: int, i: int, cache_max: int = TOL.stirling_cache_max) -> float:
    """log S(j, i), via the triangular recurrence on log-sum-exp."""
    if i < 0 or j < 0 or i > j:
        raise DomainError(f"need 0 <= i <= j, got i={i}, j={j}")
    if j > cache_max:
        raise ResourceError(f"Stirling row {j} above cache cap {cache_max}")
    while len(_log_stirling_rows) <= j:
        prev = _log_stirling_rows[-1]
        jj = len(_log_stirling_rows)
        row = np.full(jj + 1, _NEG_INF)
        row[jj] = 0.0  # S(j, j) = 1
        if jj >= 1:
            # S(j, i) = i S(j-1, i) + S(j-1, i-1)
            ivals = np.arange(1, jj)
            if len(ivals):
                row[1:jj] = np.logaddexp(np.log(ivals) + prev[1:jj], prev[0:jj - 1])
        _log_stirling_rows.append(row)
    return float(_log_stirling_rows[j][i])


def ancestral_transition_prob(N: int, j: int, i: int) -> float:
    """P(next count = i | current count = j) for a population of size N."""
    if not 1 <= i <= j <= N:
        raise DomainError(f"need 1 <= i <= j <= N, got N={N}, j={j}, i={i}")
    logp = stirling2_log(j, i) + math.lgamma(N + 1) - math.lgamma(N - i + 1) - j * math.log(N)
    return math.exp(logp)


def ancestral_step(N: int, j: int, rng: np.random.Generator) -> int:
    """One backward step: occupied cells after throwing j balls into N bins."""
    if not 1 <= j <= N:
        raise DomainError(f"need 1 <= j <= N, got j={j}, N={N}")
    return int(len(np.unique(rng.integers(0, N, size=j))))


def occupancy_counts(j_vec: np.ndarray, N: int, rng: np.random.Generator) -> np.ndarray:
    """Occupied-cell counts for a vector of ball counts, one throw per row.

    Rows may have different ball counts; columns beyond a row's count are
    filled with per-column sentinels that inflate the distinct count by a
    known amount, subtracted afterwards.
    """
    j_vec = np.asarray(j_vec)
    if len(j_vec) == 0:
        return np.zeros(0, dtype=np.int64)
    jmax = int(j_vec.max())
    if jmax == 0:
        return np.zeros(len(j_vec), dtype=np.int64)
    balls = rng.integers(0, N, size=(len(j_vec), jmax), dtype=np.int64)
    cols = np.arange(jmax)
    pad = cols[None, :] >= j_vec[:, None]
    balls[pad] = N + cols[None, :].repeat(len(j_vec), axis=0)[pad]
    balls.sort(axis=1)
    distinct = (np.diff(balls, axis=1) != 0).sum(axis=1) + 1
    return distinct - (jmax - j_vec)


@dataclass(frozen=True)
class AncestralTrace:
    """Ancestor-count path, non-increasing, from its start down to a floor."""

    N: int
    path: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(x) for x in self.path))
        if any(b > a for a, b in zip(self.path, self.path[1:])):
            raise ValidationError("ancestor counts must be non-increasing")
        if any(not 1 <= x <= self.N for x in self.path):
            raise ValidationError("counts must lie in 1..N")

    @property
    def generations(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class IntervalStats:
    """Generations spent, and lineages counted, while the count is in (x, y]."""

    x: int
    y: int
    gens: int
    edges: int

    def __post_init__(self):
        if self.edges > self.y * self.gens:
            raise ValidationError("edge count exceeds y * generations")


def simulate_trace(N: int, start: int, floor: int, rng: np.random.Generator) -> AncestralTrace:
    """Path of ancestor counts from ``start`` until it first reaches <= ``floor``."""
    if floor < 1 or start > N or start < 1:
        raise DomainError("need 1 <= floor and 1 <= start <= N")
    path = [start]
    x = start
    while x > floor:
        x = ancestral_step(N, x, rng)
        path.append(x)
    return AncestralTrace(N, tuple(path))


def interval_stats(trace: AncestralTrace, x: int, y: int) -> IntervalStats:
    """Count path entries in (x, y] and their total."""
    if not 2 <= x < y <= trace.N:
        raise DomainError(f"need 2 <= x < y <= N, got x={x}, y={y}, N={trace.N}")
    vals = [v for v in trace.path if x < v <= y]
    return IntervalStats(x, y, len(vals), sum(vals))


def duration_sq_bound(N: int, x: int, y: int) -> float:
    """Closed-form bound on the second moment of generations spent in (x, y]."""
    if not 2 <= x < y <= N:
        raise DomainError(f"need 2 <= x < y <= N, got x={x}, y={y}, N={N}")
    return 21.0 + 85.0 * (6.0 * N * (y - x + 1) / (x * (x - 1.0))) ** 2


def edges_sq_bound(N: int) -> float:
    """Closed-form bound on the second moment of the total lineage count below N."""
    if N < 3:
        raise DomainError("need N >= 3")
    return 6e6 * (N * math.log(N)) ** 2


def occupancy_ge2_mean(N: int, x: int) -> float:
    """Expected number of cells holding at least two of x balls in N cells."""
    if not 2 <= x <= N:
        raise DomainError(f"need 2 <= x <= N, got x={x}, N={N}")
    q = 1.0 - 1.0 / N
    return N * (1.0 - (x / N) * q ** (x - 1) - q**x)


def simulate_traces_batch(N: int, reps: int, floor: int,
                          rng: np.random.Generator,
                          intervals: list[tuple[int, int]] | None = None):
    """Many ancestor-count traces at once, reduced to interval statistics.

    Returns a dict with per-trace arrays: for each (x, y) in ``intervals``
    the generation counts and edge totals, and always the pair for the full
    range (floor, N] (keyed 'full').
    """
    if floor < 1:
        raise DomainError("floor must be >= 1")
    intervals = intervals or []
    for (x, y) in intervals:
        if not 2 <= x < y <= N:
            raise DomainError(f"bad interval ({x}, {y})")
        if x < floor:
            raise ValidationError("interval extends below the simulated floor")
    cur = np.full(reps, N, dtype=np.int64)
    active = cur > floor
    gens = {iv: np.zeros(reps, dtype=np.int64) for iv in intervals}
    edges = {iv: np.zeros(reps, dtype=np.int64) for iv in intervals}
    full_gens = np.zeros(reps, dtype=np.int64)
    full_edges = np.zeros(reps, dtype=np.int64)
    # X_0 = N counts toward every interval containing N
    def _tally(idx, vals):
        for (x, y) in intervals:
            inside = (vals > x) & (vals <= y)
            gens[(x, y)][idx[inside]] += 1
            edges[(x, y)][idx[inside]] += vals[inside]
        inside = vals > floor
        full_gens[idx[inside]] += 1
        full_edges[idx[inside]] += vals[inside]

    _tally(np.arange(reps), cur)
    while active.any():
        idx = np.nonzero(active)[0]
        nxt = occupancy_counts(cur[idx], N, rng)
        cur[idx] = nxt
        _tally(idx, nxt)
        active[idx] = nxt > floor
    out = {"full": (full_gens, full_edges)}
    for iv in intervals:
        out[iv] = (gens[iv], edges[iv])
    return out
