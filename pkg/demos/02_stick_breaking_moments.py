"""Stick-breaking masses and their closed-form product moments.

The sum over distinct index pairs of mass products equals theta/(theta+1),
and the three-index analogue equals theta^2/((theta+1)(theta+2)); both are
the chance of sampling all-distinct blocks two or three times.
"""
import numpy as np

from pdwf.esf_crp import (gem_masses_batch, gem_stick_breaking,
                          paintbox_pair_moment, paintbox_triple_moment)

rng = np.random.default_rng(1)

v = gem_stick_breaking(1.0, 1e-10, rng)
print(f"one draw at theta=1: {len(v.masses)} sticks, residual {v.residual:.1e}")
print(f"largest five masses: {[round(m, 4) for m in v.masses[:5]]}")

reps = 50000
for theta in (0.5, 1.0, 2.0):
    masses, _ = gem_masses_batch(theta, reps, 1e-10, rng)
    s1 = masses.sum(axis=1)
    s2 = (masses**2).sum(axis=1)
    s3 = (masses**3).sum(axis=1)
    pair = (s1**2 - s2).mean()
    triple = (s1**3 - 3 * s1 * s2 + 2 * s3).mean()
    print(f"theta={theta}: pair sum {pair:.4f} (exact {paintbox_pair_moment(theta):.4f}), "
          f"triple sum {triple:.4f} (exact {paintbox_triple_moment(theta):.4f})")
