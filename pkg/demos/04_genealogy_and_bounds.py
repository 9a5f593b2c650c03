"""Ancestral-count chain: simulation against closed-form second moments.

A population of N has its lineage count collapse by cell occupancy; the
time spent in a count interval and the lineages alive during it have
explicit (deliberately loose) second-moment bounds.
"""
import numpy as np

from pdwf.genealogy import (duration_sq_bound, edges_sq_bound, interval_stats,
                            occupancy_ge2_mean, simulate_trace,
                            simulate_traces_batch)

rng = np.random.default_rng(3)
N = 100

trace = simulate_trace(N, N, 1, rng)
print(f"one trace at N={N}: {trace.generations} generations, "
      f"first five counts {trace.path[:5]}")
st = interval_stats(trace, 5, 20)
print(f"in (5,20]: {st.gens} generations, {st.edges} lineages counted")

reps = 5000
stats = simulate_traces_batch(N, reps, floor=2, rng=rng, intervals=[(5, 20)])
gens, _ = stats[(5, 20)]
_, edges_full = stats["full"]
tau2 = (gens.astype(float) ** 2).mean()
e2 = (edges_full.astype(float) ** 2).mean()
print(f"\nMC E[duration^2] in (5,20]: {tau2:9.1f}   bound {duration_sq_bound(N, 5, 20):.2e}")
print(f"MC E[total lineages^2]:    {e2:9.1f}   bound {edges_sq_bound(N):.2e}")

# the collision count that drives the interval bound
for x in (5, 20, 50):
    print(f"expected multi-occupied cells with {x} balls in {N} cells: "
          f"{occupancy_ge2_mean(N, x):.3f} >= {x * (x - 1) / (6 * N):.3f}")
