"""Exact transition sampling for the measure-valued dynamics.

The state at time t mixes a stick-breaking draw over the start measure's
samples plus the base measure, keyed by a pure death process coming down
from infinity. Feeding a stationary draw through the transition leaves the
two-sample match probability at 1/(theta+1) for every t.
"""
import numpy as np

from pdwf.esf_crp import dp_sample, match_probability_dp
from pdwf.fleming_viot import (expected_absorption_time, sample_death_level,
                               sample_transition, transition_match_stats)

theta = 1.0
rng = np.random.default_rng(4)

print(f"mean passage time to 0: {expected_absorption_time(theta):.3f} "
      f"(closed bound {2 * (theta + 1) / theta})")
for t in (0.05, 0.5, 5.0):
    levels = [sample_death_level(theta, t, 1e-3, rng) for _ in range(2000)]
    print(f"death level at t={t}: mean {np.mean(levels):6.1f}, "
          f"P(level=0) = {np.mean(np.array(levels) == 0):.3f}")

mu = dp_sample(theta, rng)
out = sample_transition(mu, theta, 0.5, rng)
print(f"\none transition draw at t=0.5: level {out.level}, "
      f"{len(out.measure.atoms)} atoms, base-measure weight {out.pi_mass:.3f}")

for t in (0.1, 1.0, 10.0):
    stats = transition_match_stats(theta, t, 20000, rng)
    print(f"t={t:>4}: match statistic {stats['match_mean']:.4f} "
          f"(target {match_probability_dp(theta):.4f}, se {stats['match_se']:.4f})")
