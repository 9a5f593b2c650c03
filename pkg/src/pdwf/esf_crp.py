"""Ewens sampling formula, Chinese restaurant process, and stick-breaking.

Exact partition probabilities are computed in log space from the closed
form  P(part) = theta^k * prod_i (n_i - 1)! / (theta)_n  with (theta)_n the
rising factorial; the same law is realized sequentially by the CRP, where
sample i joins an existing block with probability proportional to its size
and opens a new block with probability theta / (i - 1 + theta).

Stick-breaking (independent Beta(1, theta) sticks) gives the size-biased
mass sequence; sorting realizes the decreasingly ordered mass law.
"""
from __future__ import annotations

import math

import numpy as np

from .config import TOL
from .errors import DomainError, NumericalError, ResourceError, ValidationError
from .measures import (AtomicMeasure, MassVector, SetPartition,
                       enumerate_partitions, partition_from_labels)


def log_rising_factorial(theta: float, n: int) -> float:
    """log of theta (theta+1) ... (theta+n-1), accumulated term by term."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 0.0
    return float(math.fsum(np.log(theta + np.arange(n, dtype=float))))


def esf_set_partition_prob(pi: SetPartition, theta: float) -> float:
    """Exact probability of a given set partition under sampling parameter theta."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    sizes = pi.block_sizes()
    k = len(sizes)
    logp = k * math.log(theta)
    logp += math.fsum(math.lgamma(s) for s in sizes)  # (s-1)! = gamma(s)
    logp -= log_rising_factorial(theta, pi.n)
    return math.exp(logp)


def esf_distribution(n: int, theta: float,
                     cap: int = TOL.enumeration_cap) -> dict[SetPartition, float]:
    """Exact probability of every set partition of {1..n}."""
    if n > cap:
        raise ResourceError(f"n={n} above enumeration cap {cap}")
    dist = {p: esf_set_partition_prob(p, theta) for p in enumerate_partitions(n, cap=cap)}
    total = math.fsum(dist.values())
    if abs(total - 1.0) > TOL.prob_sum_tol:
        raise NumericalError(f"partition probabilities sum to {total!r}")
    return dist


def crp_sample(n: int, theta: float, rng: np.random.Generator) -> SetPartition:
    """One draw of the n-step Chinese restaurant partition."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if theta <= 0:
        raise DomainError("theta must be > 0")
    assignment = [0]
    sizes = [1]
    for i in range(2, n + 1):
        u = rng.random() * (i - 1 + theta)
        acc = 0.0
        for b, s in enumerate(sizes):
            acc += s
            if u < acc:
                assignment.append(b)
                sizes[b] += 1
                break
        else:
            assignment.append(len(sizes))
            sizes.append(1)
    return SetPartition(tuple(assignment))


def crp_sample_batch(n: int, theta: float, reps: int,
                     rng: np.random.Generator) -> np.ndarray:
    """reps CRP partitions at once; returns an int matrix of RGS rows."""
    if n < 1 or reps < 1:
        raise ValidationError("n and reps must be >= 1")
    if theta <= 0:
        raise DomainError("theta must be > 0")
    assign = np.zeros((reps, n), dtype=np.int16)
    sizes = np.zeros((reps, n), dtype=np.int32)
    sizes[:, 0] = 1
    nblocks = np.ones(reps, dtype=np.int32)
    rows = np.arange(reps)
    for i in range(2, n + 1):
        u = rng.random(reps) * (i - 1 + theta)
        cum = np.cumsum(sizes[:, : i - 1], axis=1)
        # index of first block whose cumulative size exceeds u; if none, new block
        joins = u[:, None] < cum
        block = np.where(joins.any(axis=1), joins.argmax(axis=1), nblocks)
        assign[:, i - 1] = block
        new = block == nblocks
        nblocks += new
        sizes[rows, block] += 1
    return assign


def rgs_codes(assign: np.ndarray) -> np.ndarray:
    """Pack RGS rows into integer codes (base n+1), for fast tabulation."""
    n = assign.shape[1]
    weights = (n + 1) ** np.arange(n, dtype=np.int64)
    return assign.astype(np.int64) @ weights


def empirical_partition_distribution(assign: np.ndarray) -> dict[SetPartition, float]:
    """Empirical distribution over partitions from a matrix of RGS rows."""
    codes = rgs_codes(assign)
    uniq, counts = np.unique(codes, return_counts=True)
    reps, n = assign.shape[0], assign.shape[1]
    out = {}
    for code, c in zip(uniq, counts):
        digits = []
        v = int(code)
        for _ in range(n):
            digits.append(v % (n + 1))
            v //= n + 1
        out[SetPartition(tuple(digits))] = c / reps
    return out


def crp_empirical_measure(n: int, theta: float, rng: np.random.Generator) -> AtomicMeasure:
    """Empirical measure of an n-sample: one atom per block, mass = size/n."""
    part = crp_sample(n, theta, rng)
    sizes = part.block_sizes()
    k = len(sizes)
    locations = rng.random(k)
    return AtomicMeasure.from_parts(range(k), locations, [s / n for s in sizes])


def gem_sticks(theta: float, residual_tol: float,
               rng: np.random.Generator,
               max_sticks: int = TOL.max_sticks) -> tuple[np.ndarray, float]:
    """Size-biased stick masses, stopped at the first residual < residual_tol.

    Returns (masses in stick order, residual). Beta(1, theta) sticks are drawn
    by inverse CDF, V = 1 - U**(1/theta).
    """
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if not 0 < residual_tol < 1:
        raise DomainError("residual_tol must be in (0, 1)")
    masses = []
    remaining = 1.0
    block = 64
    drawn = 0
    while remaining >= residual_tol:
        v = 1.0 - rng.random(block) ** (1.0 / theta)
        for vi in v:
            if drawn >= max_sticks:
                raise NumericalError(f"stick-breaking did not converge in {max_sticks} sticks")
            masses.append(remaining * vi)
            remaining *= 1.0 - vi
            drawn += 1
            if remaining < residual_tol:
                break
    return np.array(masses), remaining


def gem_stick_breaking(theta: float, residual_tol: float,
                       rng: np.random.Generator) -> MassVector:
    """Decreasingly ordered mass vector from stick-breaking."""
    masses, residual = gem_sticks(theta, residual_tol, rng)
    order = np.sort(masses)[::-1]
    return MassVector(tuple(float(m) for m in order), residual=float(residual))


def gem_masses_batch(theta: float, reps: int, residual_tol: float,
                     rng: np.random.Generator,
                     max_sticks: int = TOL.max_sticks) -> tuple[np.ndarray, np.ndarray]:
    """Stick masses for many replicates at once.

    Returns (masses, residuals) where masses is (reps, m) with zeros after
    each replicate's stopping stick. Column count grows adaptively until
    every replicate has residual < residual_tol.
    """
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if not 0 < residual_tol < 1:
        raise DomainError("residual_tol must be in (0, 1)")
    # residual after m sticks is exp(-Gamma(m, theta)); size the first block
    # around that quantile and extend for stragglers
    target = -math.log(residual_tol)
    m0 = int(theta * target + 10 * math.sqrt(theta * target) + 20)
    log_tol = math.log(residual_tol)
    chunks = []
    logres = np.zeros(reps)
    final_logres = np.zeros(reps)
    active = np.ones(reps, dtype=bool)
    rows = np.arange(reps)
    total = 0
    while active.any():
        if total >= max_sticks:
            raise NumericalError(f"stick-breaking did not converge in {max_sticks} sticks")
        cols = m0 if total == 0 else max(m0 // 2, 16)
        # -log(1 - V) is Exp(theta)
        e = rng.exponential(1.0 / theta, size=(reps, cols))
        lr_path = logres[:, None] - np.cumsum(e, axis=1)
        prev = np.concatenate([logres[:, None], lr_path[:, :-1]], axis=1)
        m = np.exp(prev) * (1.0 - np.exp(-e))
        m[~active] = 0.0
        hit = lr_path < log_tol
        first = hit.argmax(axis=1)
        newly = active & hit.any(axis=1)
        # keep the stick that crosses the threshold, zero everything after it
        cut = np.where(newly, first, cols)[:, None]
        m[np.arange(cols)[None, :] > cut] = 0.0
        final_logres[newly] = lr_path[rows, first][newly]
        still = active & ~newly
        logres[still] = lr_path[still, -1]
        active = still
        chunks.append(m)
        total += cols
    masses = np.concatenate(chunks, axis=1) if len(chunks) > 1 else chunks[0]
    return masses, np.exp(final_logres)


def dp_sample(theta: float, rng: np.random.Generator,
              residual_tol: float = TOL.stick_residual) -> AtomicMeasure:
    """A draw of the random measure with stick-breaking masses and fresh labels."""
    masses, residual = gem_sticks(theta, residual_tol, rng)
    k = len(masses)
    locations = rng.random(k)
    return AtomicMeasure.from_parts(range(k), locations, masses, residual=float(residual))


def paintbox_pair_moment(theta: float) -> float:
    """Expected sum over j != k of P_j P_k: the two-sample all-distinct probability."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    return theta / (theta + 1.0)


def paintbox_triple_moment(theta: float) -> float:
    """Expected sum over distinct (i, j, k) of P_i P_j P_k."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    return theta * theta / ((theta + 1.0) * (theta + 2.0))


def match_probability_dp(theta: float) -> float:
    """Probability two independent samples from the random measure coincide."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    return 1.0 / (theta + 1.0)


def match_probability_empirical(n: int, theta: float) -> float:
    """Match probability for the empirical measure of an n-sample."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if n < 1:
        raise ValidationError("n must be >= 1")
    return 1.0 / n + (n - 1.0) / (n * (theta + 1.0))


def expected_block_count(n: int, theta: float) -> float:
    """Expected number of occupied blocks after n CRP steps."""
    return float(np.sum(theta / (theta + np.arange(n, dtype=float))))
