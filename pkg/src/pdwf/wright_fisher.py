"""Finite-population infinite-alleles Wright-Fisher chain.

Forward step: offspring counts are multinomial over current frequencies,
each child mutates with probability p(parent type), and in fresh-type mode
every mutant founds a brand-new type. Backward sampler (parent-independent
mutation only): trace lineages into the past, killing each lineage at an
independent mutation mark with probability p per generation and merging
lineages that pick the same parent; individuals share a type exactly when
their lineages merge before either is killed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .genealogy import occupancy_counts
from .measures import SetPartition, canonicalize_partition, partition_from_labels


@dataclass(frozen=True)
class KernelTable:
    """Finite mutation kernel: fresh type w.p. ``fresh_prob``, else a table label."""

    fresh_prob: float
    labels: tuple[int, ...] = ()
    probs: tuple[float, ...] = ()
    locations: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0 <= self.fresh_prob <= 1:
            raise ValidationError("fresh_prob must be in [0, 1]")
        if len(self.labels) != len(self.probs):
            raise ValidationError("labels/probs length mismatch")
        if self.locations and len(self.locations) != len(self.labels):
            raise ValidationError("labels/locations length mismatch")
        if self.labels and abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValidationError("table probabilities must sum to 1")
        if self.fresh_prob < 1 and not self.labels:
            raise ValidationError("non-fresh mass requires a label table")

    def location_of(self, idx: int) -> float:
        if self.locations:
            return self.locations[idx]
        return (self.labels[idx] % 10**9) / 1e9


@dataclass(frozen=True)
class MutationModel:
    """Mutation probability p(x) and kernel, with the suprema the bounds need.

    ``prob`` maps a type location in [0, 1] to a mutation probability. For
    parent-independent mutation the probability is constant and the kernel is
    the fresh-type base measure, so the deviation suprema are zero. Custom
    models must supply their suprema; they are not computable from code.
    """

    kind: str  # 'pim' or 'custom'
    prob: Callable[[float], float]
    p_sup: float
    p_dev_sup: float
    kernel_dev_sup: float
    kernel: KernelTable | None = None  # None means always-fresh types

    def __post_init__(self):
        if self.kind not in ("pim", "custom"):
            raise ValidationError("kind must be 'pim' or 'custom'")
        if not 0 <= self.p_sup <= 1:
            raise ValidationError("p_sup must be in [0, 1]")
        if self.p_dev_sup < 0 or self.kernel_dev_sup < 0:
            raise ValidationError("deviation suprema must be >= 0")

    @property
    def is_pim(self) -> bool:
        return self.kind == "pim"


def pim_model(N: int, theta: float) -> MutationModel:
    """Parent-independent mutation at rate theta / (2N) with fresh types."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    rate = theta / (2.0 * N)
    if not 0 < rate < 1:
        raise DomainError(f"mutation rate {rate} outside (0, 1); need theta < 2N")
    return MutationModel("pim", lambda x, r=rate: r, p_sup=rate,
                         p_dev_sup=0.0, kernel_dev_sup=0.0, kernel=None)


def custom_model(prob: Callable[[float], float], p_sup: float, p_dev_sup: float,
                 kernel_dev_sup: float, kernel: KernelTable | None = None) -> MutationModel:
    """General mutation model; kernel=None means every mutant is a fresh type."""
    return MutationModel("custom", prob, p_sup=p_sup, p_dev_sup=p_dev_sup,
                         kernel_dev_sup=kernel_dev_sup, kernel=kernel)


@dataclass(frozen=True)
class WFPopulation:
    """N individuals grouped by type label, with per-type locations."""

    N: int
    type_counts: dict[int, int]
    locations: dict[int, float]
    generation: int = 0
    next_label: int = 0
    k_trace: tuple[int, ...] | None = None

    def __post_init__(self):
        if sum(self.type_counts.values()) != self.N:
            raise ValidationError("type counts must sum to N")
        if any(c <= 0 for c in self.type_counts.values()):
            raise ValidationError("type counts must be positive")
        if set(self.type_counts) - set(self.locations):
            raise ValidationError("every type needs a location")

    @property
    def k(self) -> int:
        return len(self.type_counts)


@dataclass(frozen=True)
class StepDetail:
    """Per-type offspring and mutation counts for one forward step."""

    offspring: dict[int, int]
    mutations: dict[int, int]
    new_types: tuple[int, ...]

    def __post_init__(self):
        for lab, b in self.mutations.items():
            if not 0 <= b <= self.offspring.get(lab, 0):
                raise ValidationError("mutations exceed offspring")


def initial_population(N: int, rng: np.random.Generator,
                       distinct: bool = True) -> WFPopulation:
    """All-distinct-types start (or a single type when distinct=False)."""
    if distinct:
        counts = {i: 1 for i in range(N)}
        locs = {i: float(x) for i, x in enumerate(rng.random(N))}
        return WFPopulation(N, counts, locs, next_label=N)
    return WFPopulation(N, {0: N}, {0: float(rng.random())}, next_label=1)


def wf_step(pop: WFPopulation, model: MutationModel,
            rng: np.random.Generator) -> tuple[WFPopulation, StepDetail]:
    """One forward generation."""
    labels = sorted(pop.type_counts)
    counts = np.array([pop.type_counts[l] for l in labels], dtype=np.int64)
    m = rng.multinomial(pop.N, counts / pop.N)
    pvals = np.array([model.prob(pop.locations[l]) for l in labels])
    b = rng.binomial(m, pvals)
    new_counts: dict[int, int] = {}
    new_locs: dict[int, float] = {}
    for lab, mi, bi in zip(labels, m, b):
        if mi - bi > 0:
            new_counts[lab] = int(mi - bi)
            new_locs[lab] = pop.locations[lab]
    total_mut = int(b.sum())
    next_label = pop.next_label
    new_types: list[int] = []
    if total_mut:
        kern = model.kernel
        if kern is None:
            fresh = total_mut
        else:
            fresh = int(rng.binomial(total_mut, kern.fresh_prob))
            table_draws = total_mut - fresh
            if table_draws:
                picks = rng.choice(len(kern.labels), size=table_draws, p=kern.probs)
                for t in picks:
                    lab = kern.labels[t]
                    new_counts[lab] = new_counts.get(lab, 0) + 1
                    new_locs.setdefault(lab, kern.location_of(int(t)))
        for _ in range(fresh):
            new_counts[next_label] = 1
            new_locs[next_label] = float(rng.random())
            new_types.append(next_label)
            next_label += 1
    nxt = WFPopulation(pop.N, new_counts, new_locs,
                       generation=pop.generation + 1, next_label=next_label)
    detail = StepDetail({l: int(v) for l, v in zip(labels, m)},
                        {l: int(v) for l, v in zip(labels, b)},
                        tuple(new_types))
    return nxt, detail


def default_burn_in(N: int) -> int:
    return 20 * N


def wf_stationary_sample(N: int, model: MutationModel, rng: np.random.Generator,
                         burn_in: int | None = None,
                         init_distinct: bool = True) -> WFPopulation:
    """Population after a burn-in from the all-distinct start, with a type-count trace.

    Warns when the trace tail (last 10%) disagrees with the middle 10% by
    more than three standard errors, a crude non-stationarity flag.
    """
    burn_in = default_burn_in(N) if burn_in is None else burn_in
    if burn_in < 1:
        raise ValidationError("burn_in must be >= 1")
    pop = initial_population(N, rng, distinct=init_distinct)
    trace = [pop.k]
    for _ in range(burn_in):
        pop, _ = wf_step(pop, model, rng)
        trace.append(pop.k)
    _check_trace(np.asarray(trace, dtype=float))
    return WFPopulation(pop.N, pop.type_counts, pop.locations,
                        generation=pop.generation, next_label=pop.next_label,
                        k_trace=tuple(trace))


def _check_trace(trace: np.ndarray) -> None:
    m = len(trace)
    tenth = max(m // 10, 8)
    if m < 2 * tenth + 8:
        return
    tail = trace[-tenth:]
    mid = trace[int(0.45 * m): int(0.45 * m) + tenth]

    def batch_se(win: np.ndarray) -> float:
        # batch means absorb the chain's autocorrelation
        nb = 4
        size = len(win) // nb
        means = win[: nb * size].reshape(nb, size).mean(axis=1)
        return float(means.std(ddof=1) / math.sqrt(nb))

    se = math.sqrt(batch_se(tail) ** 2 + batch_se(mid) ** 2)
    if se > 0 and abs(tail.mean() - mid.mean()) > 3 * se:
        warnings.warn("type-count trace still drifting after burn-in; "
                      "consider a longer burn-in", RuntimeWarning)


def sample_partition(pop: WFPopulation, n: int, rng: np.random.Generator,
                     replace: bool = False) -> SetPartition:
    """Type partition of n individuals sampled from the population.

    Sampling is without replacement by default (a simple random sample);
    with-replacement is available for sensitivity checks.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not replace and n > pop.N:
        raise ValidationError(f"cannot sample {n} of {pop.N} without replacement")
    labels = sorted(pop.type_counts)
    individuals = np.repeat(np.array(labels), [pop.type_counts[l] for l in labels])
    picks = rng.choice(pop.N, size=n, replace=replace)
    return partition_from_labels(individuals[picks])


def exact_stationary_partition_pim(N: int, mutation_rate: float,
                                   rng: np.random.Generator) -> SetPartition:
    """Exact stationary type partition of all N individuals (PIM only).

    Lineages are traced backward; each generation every live lineage is
    killed by a mutation mark with probability ``mutation_rate`` (founding a
    type for its members), then survivors pick uniform parents and merge on
    collision. A single never-killed survivor founds one final type.
    """
    if not 0 < mutation_rate < 1:
        raise DomainError("mutation_rate must be in (0, 1)")
    members: list[list[int]] = [[i + 1] for i in range(N)]
    blocks: list[list[int]] = []
    while members:
        alive = rng.random(len(members)) >= mutation_rate
        blocks.extend(m for m, a in zip(members, alive) if not a)
        members = [m for m, a in zip(members, alive) if a]
        if len(members) <= 1:
            blocks.extend(members)
            break
        parents = rng.integers(0, N, size=len(members))
        merged: dict[int, list[int]] = {}
        for par, mem in zip(parents, members):
            merged.setdefault(int(par), []).extend(mem)
        members = list(merged.values())
    return canonicalize_partition(blocks)


def backward_k_batch(N: int, mutation_rate: float, reps: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Stationary type counts for many replicates via backward lineage tracing."""
    if not 0 < mutation_rate < 1:
        raise DomainError("mutation_rate must be in (0, 1)")
    lineages = np.full(reps, N, dtype=np.int64)
    k = np.zeros(reps, dtype=np.int64)
    active = np.ones(reps, dtype=bool)
    while active.any():
        idx = np.nonzero(active)[0]
        deaths = rng.binomial(lineages[idx], mutation_rate)
        k[idx] += deaths
        lineages[idx] -= deaths
        one = lineages[idx] == 1
        k[idx[one]] += 1
        finished = lineages[idx] <= 1
        active[idx[finished]] = False
        live = idx[~finished]
        if len(live):
            lineages[live] = occupancy_counts(lineages[live], N, rng)
    return k


def backward_k_with_tally(N: int, mutation_rate: float, reps: int,
                          rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Type counts plus mutations seen while more than 2 lineages were live.

    The second array dominates k - 2 pathwise: once at most two lineages
    remain they can found at most two further types.
    """
    if not 0 < mutation_rate < 1:
        raise DomainError("mutation_rate must be in (0, 1)")
    lineages = np.full(reps, N, dtype=np.int64)
    k = np.zeros(reps, dtype=np.int64)
    big_mut = np.zeros(reps, dtype=np.int64)
    active = np.ones(reps, dtype=bool)
    while active.any():
        idx = np.nonzero(active)[0]
        deaths = rng.binomial(lineages[idx], mutation_rate)
        k[idx] += deaths
        big = lineages[idx] > 2
        big_mut[idx[big]] += deaths[big]
        lineages[idx] -= deaths
        one = lineages[idx] == 1
        k[idx[one]] += 1
        finished = lineages[idx] <= 1
        active[idx[finished]] = False
        live = idx[~finished]
        if len(live):
            lineages[live] = occupancy_counts(lineages[live], N, rng)
    return k, big_mut


def forward_k_batch(N: int, theta: float, reps: int, rng: np.random.Generator,
                    burn_in: int | None = None) -> np.ndarray:
    """Stationary type counts via forward burn-in, individuals tracked directly.

    Same chain as ``wf_step`` under parent-independent mutation with fresh
    types, represented per individual so replicates vectorize.
    """
    burn_in = default_burn_in(N) if burn_in is None else burn_in
    rate = theta / (2.0 * N)
    if not 0 < rate < 1:
        raise DomainError("mutation rate outside (0, 1)")
    types = _forward_types(N, rate, reps, burn_in, rng)
    srt = np.sort(types, axis=1)
    return (np.diff(srt, axis=1) != 0).sum(axis=1) + 1


def _forward_types(N: int, rate: float, reps: int, burn_in: int,
                   rng: np.random.Generator) -> np.ndarray:
    # label space: initial types in [0, N), mutants at generation g in
    # [N(g+2), N(g+3)); fits int32 unless N * burn_in is huge
    dtype = np.int32 if (burn_in + 3) * N < np.iinfo(np.int32).max else np.int64
    types = np.tile(np.arange(N, dtype=dtype), (reps, 1))
    col = np.arange(N, dtype=dtype)
    for gen in range(burn_in):
        parents = rng.integers(0, N, size=(reps, N), dtype=np.int32)
        types = np.take_along_axis(types, parents, axis=1)
        mut = rng.random((reps, N)) < rate
        fresh = np.broadcast_to(dtype(N) * dtype(gen + 2) + col, (reps, N))
        types[mut] = fresh[mut]
    return types


def forward_sample_partition_batch(N: int, theta: float, n: int, reps: int,
                                   rng: np.random.Generator,
                                   burn_in: int | None = None) -> np.ndarray:
    """Sampled type partitions (RGS rows) from independent forward replicates."""
    burn_in = default_burn_in(N) if burn_in is None else burn_in
    rate = theta / (2.0 * N)
    if not 0 < rate < 1:
        raise DomainError("mutation rate outside (0, 1)")
    if n > N:
        raise ValidationError("n > N")
    types = _forward_types(N, rate, reps, burn_in, rng)
    # simple random sample without replacement, per replicate
    picks = np.argsort(rng.random((reps, N)), axis=1)[:, :n]
    sampled = np.take_along_axis(types, picks, axis=1)
    return _labels_to_rgs(sampled)


def stationary_sample_partition_batch(N: int, mutation_rate: float, n: int,
                                      reps: int,
                                      rng: np.random.Generator) -> np.ndarray:
    """Sampled type partitions via backward tracing of just the n sampled lineages.

    Returns an int matrix of RGS rows, one per replicate. Valid for
    parent-independent mutation: the partition of a simple random sample
    depends only on the sampled individuals' own lineage histories.
    """
    if not 0 < mutation_rate < 1:
        raise DomainError("mutation_rate must be in (0, 1)")
    if n < 1 or n > N:
        raise ValidationError("need 1 <= n <= N")
    if n > 32:
        raise ValidationError("sampled partition tracing supports n <= 32")
    # lineage tags: column index of the first sample in the same live lineage;
    # finished lineages carry unique negative codes
    tags = np.tile(np.arange(n, dtype=np.int64), (reps, 1))
    codes = np.zeros((reps, n), dtype=np.int64)  # 0 = live, negative = finished
    active_rows = np.ones(reps, dtype=bool)
    gen = 0
    while active_rows.any():
        gen += 1
        rows = np.nonzero(active_rows)[0]
        t = tags[rows]
        c = codes[rows]
        live = c == 0
        # one uniform per lineage slot, shared through the tag gather
        u = rng.random((len(rows), n))
        killed = (np.take_along_axis(u, t, axis=1) < mutation_rate) & live
        c[killed] = -(np.int64(gen) * n + t[killed] + 1)
        live = c == 0
        # count live lineages: live columns that are their own tag
        own = t == np.arange(n)[None, :]
        nlive = (own & live).sum(axis=1)
        solo = nlive == 1
        if solo.any():
            fin = live & solo[:, None]
            c[fin] = -(np.int64(gen) * n + n + 1)
            live = c == 0
        # survivors pick parents; equal parents merge
        par = rng.integers(0, N, size=(len(rows), n), dtype=np.int64)
        pval = np.take_along_axis(par, t, axis=1)
        pval[~live] = -1 - np.arange(n)[None, :].repeat(len(rows), axis=0)[~live]
        eq = pval[:, :, None] == pval[:, None, :]
        first = eq.argmax(axis=2)
        t = np.where(live, first, t)
        tags[rows] = t
        codes[rows] = c
        active_rows[rows] = live.any(axis=1)
    return _labels_to_rgs(codes)


def _labels_to_rgs(labels: np.ndarray) -> np.ndarray:
    """Canonical RGS rows from arbitrary per-row label vectors."""
    reps, n = labels.shape
    eq = labels[:, :, None] == labels[:, None, :]
    first = eq.argmax(axis=2)  # index of first occurrence of each label
    isrep = first == np.arange(n)[None, :]
    block_of_col = np.cumsum(isrep, axis=1) - 1
    return np.take_along_axis(block_of_col, first, axis=1).astype(np.int16)


@dataclass(frozen=True)
class KMoments:
    mean_k: float
    k32: float
    k2: float
    se_mean: float
    se_k32: float
    se_k2: float


def k_moments(samples: Sequence) -> KMoments:
    """Plug-in moments of the type count with jackknife standard errors."""
    ks = np.array([s.k if isinstance(s, WFPopulation) else int(s) for s in samples],
                  dtype=float)
    if len(ks) == 0:
        raise ValidationError("empty sample collection")

    def jack_se(vals: np.ndarray) -> float:
        m = len(vals)
        if m < 2:
            return 0.0
        tot = vals.sum()
        loo = (tot - vals) / (m - 1)
        return float(math.sqrt((m - 1) / m * ((loo - loo.mean()) ** 2).sum()))

    return KMoments(
        mean_k=float(ks.mean()),
        k32=float((ks ** 1.5).mean()),
        k2=float((ks ** 2).mean()),
        se_mean=jack_se(ks),
        se_k32=jack_se(ks ** 1.5),
        se_k2=jack_se(ks ** 2),
    )
