"""Centralized numeric tolerances and resource caps."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # mass bookkeeping for atomic measures / mass vectors
    mass_tol: float = 1e-12
    # tolerance for a finite distribution over partitions to sum to 1
    dist_sum_tol: float = 1e-9
    # tolerance for exact partition distributions (Ewens) to sum to 1
    prob_sum_tol: float = 1e-10
    # largest n for which full set-partition enumeration is allowed
    enumeration_cap: int = 12
    # largest cached row of the Stirling triangle
    stirling_cache_max: int = 2000
    # hard guard on the number of stick-breaking steps
    max_sticks: int = 10**6
    # default residual mass left unassigned by stick-breaking
    stick_residual: float = 1e-10


TOL = Tolerances()
