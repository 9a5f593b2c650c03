"""Core value types: atomic measures, set partitions, block profiles.

Set partitions of {1..n} are canonically encoded as restricted-growth
sequences (RGS): ``assignment[i]`` is the block index of element ``i+1``,
with block indices appearing in order of first occurrence. Two partitions
are equal iff their RGS encodings are identical, so hashing and equality
are cheap.

Atomic measures carry integer type labels (identity) plus a real location
in [0, 1] (used only when integrating a test function). Fresh labels make
"all atoms distinct" exact rather than a float coincidence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .config import TOL
from .errors import ResourceError, ValidationError


@dataclass(frozen=True)
class SetPartition:
    """Partition of {1..n} in restricted-growth form."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(b) for b in self.assignment))
        a = self.assignment
        if len(a) == 0:
            raise ValidationError("empty partition")
        if a[0] != 0:
            raise ValidationError("RGS must start at 0")
        top = 0
        for i in range(1, len(a)):
            if not 0 <= a[i] <= top + 1:
                raise ValidationError(f"not a restricted-growth sequence at position {i}")
            top = max(top, a[i])

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def block_count(self) -> int:
        return max(self.assignment) + 1

    def blocks(self) -> list[list[int]]:
        """Blocks as sorted lists of elements 1..n, in first-appearance order."""
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for i, b in enumerate(self.assignment):
            out[b].append(i + 1)
        return out

    def block_sizes(self) -> list[int]:
        sizes = [0] * self.block_count
        for b in self.assignment:
            sizes[b] += 1
        return sizes

    def to_string(self) -> str:
        # plain digit string when every block index is a single digit,
        # dot-separated decimal otherwise (n > 10 can exceed index 9)
        if max(self.assignment) <= 9:
            return "".join(str(b) for b in self.assignment)
        return ".".join(str(b) for b in self.assignment)

    @classmethod
    def from_string(cls, s: str) -> "SetPartition":
        if "." in s:
            return cls(tuple(int(tok) for tok in s.split(".")))
        return cls(tuple(int(ch) for ch in s))

    def __str__(self) -> str:
        return self.to_string()


def canonicalize_partition(blocks: Iterable[Iterable[int]]) -> SetPartition:
    """Canonical RGS form of a partition given as disjoint element blocks.

    Blocks must be nonempty, disjoint, and cover {1..n} exactly.
    """
    blocks = [frozenset(b) for b in blocks]
    if any(len(b) == 0 for b in blocks):
        raise ValidationError("empty block")
    n = sum(len(b) for b in blocks)
    seen: set[int] = set()
    for b in blocks:
        if seen & b:
            raise ValidationError("overlapping blocks")
        seen |= b
    if seen != set(range(1, n + 1)):
        raise ValidationError("blocks do not cover {1..n}")
    owner = {}
    for idx, b in enumerate(blocks):
        for el in b:
            owner[el] = idx
    assignment = []
    relabel: dict[int, int] = {}
    for el in range(1, n + 1):
        raw = owner[el]
        if raw not in relabel:
            relabel[raw] = len(relabel)
        assignment.append(relabel[raw])
    return SetPartition(tuple(assignment))


def partition_from_labels(labels: Iterable) -> SetPartition:
    """Partition of 1..n induced by equal labels, in canonical form."""
    assignment = []
    relabel: dict = {}
    for lab in labels:
        if lab not in relabel:
            relabel[lab] = len(relabel)
        assignment.append(relabel[lab])
    return SetPartition(tuple(assignment))


def enumerate_partitions(n: int, cap: int = TOL.enumeration_cap) -> Iterator[SetPartition]:
    """All set partitions of {1..n}, lexicographic in RGS, each exactly once."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n > cap:
        raise ResourceError(f"enumeration of Bell({n}) partitions exceeds cap {cap}")
    a = [0] * n
    tops = [0] * n  # tops[i] = max(a[0..i]), maintained incrementally
    while True:
        yield SetPartition(tuple(a))
        # advance to next RGS: rightmost position that can still grow
        i = n - 1
        while i > 0 and a[i] > tops[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        tops[i] = max(tops[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            tops[j] = tops[i]


@dataclass(frozen=True)
class BlockProfile:
    """Counts a_j of blocks of each size j; sum of j*a_j is n."""

    n: int
    counts: tuple[tuple[int, int], ...]  # sorted (size, count) pairs

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple((int(s), int(c)) for s, c in self.counts))
        if any(c < 0 or s < 1 for s, c in self.counts):
            raise ValidationError("invalid block profile entry")
        if sum(s * c for s, c in self.counts) != self.n:
            raise ValidationError("profile sizes do not sum to n")

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)


def block_profile(p: SetPartition) -> BlockProfile:
    counts: dict[int, int] = {}
    for s in p.block_sizes():
        counts[s] = counts.get(s, 0) + 1
    return BlockProfile(p.n, tuple(sorted(counts.items())))


def variation_distance(p: Mapping[SetPartition, float], q: Mapping[SetPartition, float],
                       sum_tol: float = TOL.dist_sum_tol) -> float:
    """Total variation distance between two distributions on partitions of the same n.

    Computed as half the l1 distance over the union of supports.
    """
    if not p or not q:
        raise ValidationError("empty distribution")
    ns = {pi.n for pi in p} | {pi.n for pi in q}
    if len(ns) != 1:
        raise ValidationError("distributions live on partitions of different n")
    for name, dist in (("p", p), ("q", q)):
        s = math.fsum(dist.values())
        if abs(s - 1.0) > sum_tol:
            raise ValidationError(f"distribution {name} sums to {s!r}, not 1")
        if any(v < -sum_tol for v in dist.values()):
            raise ValidationError(f"distribution {name} has negative mass")
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported probability measure with labelled atoms.

    ``atoms`` is a tuple of (label, location, mass). An explicit ``residual``
    records mass left unassigned by a truncated construction; masses plus
    residual must total 1. Truncation residue is never renormalized away.
    """

    atoms: tuple[tuple[int, float, float], ...]
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(tuple(a) for a in self.atoms))
        labels = [a[0] for a in self.atoms]
        if len(labels) != len(set(labels)):
            raise ValidationError("duplicate atom labels")
        if any(a[2] <= 0 for a in self.atoms):
            raise ValidationError("atom masses must be strictly positive")
        if self.residual < 0:
            raise ValidationError("negative residual")
        total = math.fsum(a[2] for a in self.atoms) + self.residual
        if abs(total - 1.0) > TOL.mass_tol:
            raise ValidationError(f"masses + residual sum to {total!r}, not 1")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(a[0] for a in self.atoms)

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(a[2] for a in self.atoms)

    @property
    def locations(self) -> tuple[float, ...]:
        return tuple(a[1] for a in self.atoms)

    def self_match_probability(self) -> float:
        """Probability two independent draws from this measure share a label."""
        return math.fsum(m * m for m in self.masses)

    def integrate(self, phi) -> float:
        """Integral of phi(location) against the atomic part."""
        return math.fsum(m * phi(x) for _, x, m in self.atoms)

    def to_json(self) -> str:
        return json.dumps(
            [{"label": l, "location": x, "mass": m} for l, x, m in self.atoms]
        )

    @classmethod
    def from_parts(cls, labels, locations, masses, residual: float = 0.0) -> "AtomicMeasure":
        return cls(tuple(zip(labels, locations, masses)), residual=residual)


@dataclass(frozen=True)
class MassVector:
    """Non-increasing mass sequence plus unassigned residual tail."""

    masses: tuple[float, ...]
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if any(m <= 0 for m in self.masses):
            raise ValidationError("masses must be strictly positive")
        if any(self.masses[i] < self.masses[i + 1] for i in range(len(self.masses) - 1)):
            raise ValidationError("masses must be non-increasing")
        if self.residual < 0:
            raise ValidationError("negative residual")
        total = math.fsum(self.masses) + self.residual
        if abs(total - 1.0) > TOL.mass_tol:
            raise ValidationError(f"masses + residual sum to {total!r}, not 1")

    def pair_sum(self) -> float:
        """sum over j != k of m_j * m_k, on the truncated masses."""
        s1 = math.fsum(self.masses)
        s2 = math.fsum(m * m for m in self.masses)
        return s1 * s1 - s2

    def triple_sum(self) -> float:
        """sum over distinct (i, j, k) of m_i * m_j * m_k."""
        s1 = math.fsum(self.masses)
        s2 = math.fsum(m * m for m in self.masses)
        s3 = math.fsum(m * m * m for m in self.masses)
        return s1**3 - 3 * s1 * s2 + 2 * s3
