"""Seed plumbing.

Every sampler takes an explicit ``numpy.random.Generator``. Parallel or
replicated work derives child generators from a root seed with
``SeedSequence.spawn``, keyed by replicate (or chunk) index only, so results
do not depend on scheduling or worker count.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 0


def rng_from(seed_or_rng) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, Generator, or None into a Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    if seed_or_rng is None:
        seed_or_rng = DEFAULT_SEED
    return np.random.default_rng(seed_or_rng)


def spawn_rngs(seed, n: int) -> list[np.random.Generator]:
    """n independent child generators, deterministic in (seed, index)."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in root.spawn(n)]
