"""Stationary Wright-Fisher type counts, two independent ways.

The forward route burns in the chain from an all-distinct start; the
backward route traces lineages into the past, founding a type at every
mutation mark. Their type-count laws coincide.
"""
import numpy as np

from pdwf.wright_fisher import (backward_k_batch, exact_stationary_partition_pim,
                                forward_k_batch, k_moments, pim_model,
                                sample_partition, wf_stationary_sample)

N, theta = 100, 1.0
rng = np.random.default_rng(2)

pop = wf_stationary_sample(N, pim_model(N, theta), rng)
print(f"forward run at N={N}: {pop.k} types after {pop.generation} generations")
print(f"type-count trace started at {pop.k_trace[0]}, ended at {pop.k_trace[-1]}")
print(f"a 6-sample from it partitions as '{sample_partition(pop, 6, rng)}'")

part = exact_stationary_partition_pim(N, theta / (2 * N), rng)
print(f"backward draw partitions all {N} individuals into {part.block_count} types")

reps = 4000
fwd = forward_k_batch(N, theta, reps, rng)
bwd = backward_k_batch(N, theta / (2 * N), reps, rng)
mf, mb = k_moments(list(fwd)), k_moments(list(bwd))
print(f"\nmean K  forward {mf.mean_k:.2f} (se {mf.se_mean:.2f})  "
      f"backward {mb.mean_k:.2f} (se {mb.se_mean:.2f})")
print(f"E[K^2]  forward {mf.k2:.1f}           backward {mb.k2:.1f}")

hi = int(max(fwd.max(), bwd.max())) + 1
tv = 0.5 * np.abs(np.bincount(fwd, minlength=hi) / reps
                  - np.bincount(bwd, minlength=hi) / reps).sum()
print(f"plug-in TV between the two K laws: {tv:.3f}")
