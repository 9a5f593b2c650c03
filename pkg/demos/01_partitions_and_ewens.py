"""Exact partition laws and the Chinese restaurant process.

Walks through the canonical partition encoding, the exact Ewens law for
small n, and Monte Carlo convergence of sequential CRP sampling to it.
"""
import numpy as np

from pdwf.esf_crp import (crp_sample_batch, empirical_partition_distribution,
                          esf_distribution, expected_block_count)
from pdwf.measures import (SetPartition, canonicalize_partition,
                           enumerate_partitions, variation_distance)

# every partition of {1..n} has one restricted-growth string
p = canonicalize_partition([{1, 3}, {2}, {4}])
print(f"blocks {{1,3}},{{2}},{{4}} canonicalize to '{p}'")
print(f"there are {sum(1 for _ in enumerate_partitions(5))} partitions of 5 elements")

# exact law at n = 4, theta = 1, largest and smallest masses
theta = 1.0
dist = esf_distribution(4, theta)
ranked = sorted(dist.items(), key=lambda kv: -kv[1])
print(f"\nexact partition law, n=4, theta={theta}:")
for part, prob in ranked:
    print(f"  {part}   {prob:.4f}")

# sequential seating reproduces the law
rng = np.random.default_rng(0)
for reps in (10**3, 10**4, 10**5):
    emp = empirical_partition_distribution(crp_sample_batch(4, theta, reps, rng))
    print(f"TV(empirical, exact) with {reps:>6} draws: "
          f"{variation_distance(emp, dist):.4f}")

# the number of occupied blocks grows like the harmonic sum
for n in (10, 100, 1000):
    print(f"expected blocks after {n:>4} seatings: {expected_block_count(n, theta):.2f}")
