"""Exact-in-distribution sampling of the measure-valued transition at time t.

The transition law started from a measure mu is a mixture: run a pure death
process L from infinity with rates i(i - 1 + theta)/2; given L_t = n, draw
X_1..X_n i.i.d. from mu, form

    base_n = (1/(n+theta)) sum_i delta_{X_i} + (theta/(n+theta)) pi,

and the state at time t is a stick-breaking random measure with
concentration n + theta and atom distribution base_n. Coming down from
infinity is truncated at a finite entry level whose residual passage time
is controlled explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, polygamma

from .config import TOL
from .errors import DomainError, ValidationError
from .measures import AtomicMeasure

_EULER_GAMMA = 0.5772156649015328606


def death_rate(i: int, theta: float) -> float:
    return 0.5 * i * (i - 1 + theta)


def expected_absorption_time(theta: float) -> float:
    """Mean total passage time from infinity to 0: sum of 2/(n(n+theta-1))."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if abs(theta - 1.0) < 1e-9:
        return float(math.pi**2 / 3.0)
    a = theta - 1.0
    return float(2.0 * (digamma(a + 1.0) + _EULER_GAMMA) / a)


def death_tail_mean(level: int, theta: float) -> float:
    """Mean passage time from infinity down to ``level``: sum over n > level."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if level < 0:
        raise DomainError("level must be >= 0")
    if level == 0:
        return expected_absorption_time(theta)
    if abs(theta - 1.0) < 1e-9:
        return float(2.0 * polygamma(1, level + 1))
    a = theta - 1.0
    return float(2.0 * (digamma(level + 1.0 + a) - digamma(level + 1.0)) / a)


def choose_entry_level(theta: float, t: float, trunc_tol: float) -> int:
    """Smallest entry level whose mean residual passage time is below
    min(trunc_tol, t/100)."""
    if t <= 0:
        raise DomainError("t must be > 0")
    if trunc_tol <= 0:
        raise DomainError("trunc_tol must be > 0")
    threshold = min(trunc_tol, t / 100.0)
    # tail mean is at most 2/level, so 2/threshold is always enough
    lo, hi = 1, max(2, int(math.ceil(2.0 / threshold)) + 1)
    if death_tail_mean(lo, theta) < threshold:
        return lo
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if death_tail_mean(mid, theta) < threshold:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class DeathProcessPath:
    """Realized holding times of the death chain from a finite entry level.

    ``holding_times[k]`` is the time spent in level ``entry_level - k``; the
    path sits at ``entry_level`` from time 0 (truncation of the descent from
    infinity, bias controlled by the entry-level choice).
    """

    theta: float
    entry_level: int
    holding_times: tuple[float, ...]

    def __post_init__(self):
        if len(self.holding_times) != self.entry_level:
            raise ValidationError("need one holding time per level")
        if any(y <= 0 for y in self.holding_times):
            raise ValidationError("holding times must be positive")

    def value_at(self, t: float) -> int:
        if t < 0:
            raise DomainError("t must be >= 0")
        acc = 0.0
        level = self.entry_level
        for y in self.holding_times:
            acc += y
            if t < acc:
                return level
            level -= 1
        return 0

    @property
    def total_time(self) -> float:
        return float(math.fsum(self.holding_times))


def sample_death_path(theta: float, entry_level: int,
                      rng: np.random.Generator) -> DeathProcessPath:
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if entry_level < 1:
        raise DomainError("entry_level must be >= 1")
    levels = np.arange(entry_level, 0, -1, dtype=float)
    rates = 0.5 * levels * (levels - 1.0 + theta)
    times = rng.exponential(1.0 / rates)
    return DeathProcessPath(theta, entry_level, tuple(float(y) for y in times))


def sample_death_level(theta: float, t: float, trunc_tol: float,
                       rng: np.random.Generator) -> int:
    """Level of the death process at time t, truncated at a bias-controlled entry."""
    entry = choose_entry_level(theta, t, trunc_tol)
    levels = np.arange(entry, 0, -1, dtype=float)
    rates = 0.5 * levels * (levels - 1.0 + theta)
    times = rng.exponential(1.0 / rates)
    departed = int(np.searchsorted(np.cumsum(times), t, side="right"))
    return entry - departed


@dataclass(frozen=True)
class TransitionSample:
    """One draw of the time-t transition from ``mu``.

    ``base_atoms`` holds the empirical component of the mixing measure
    (grouped sample atoms with weight 1/(level+theta) each); the diffuse
    base-measure component has no finite-atom form, so its weight
    ``pi_mass`` = theta/(level+theta) is carried explicitly. ``measure`` is
    the realized stick-breaking draw; its masses sum to 1 up to the recorded
    truncation residual.
    """

    t: float
    level: int
    pi_mass: float
    base_atoms: tuple[tuple[int, float, float], ...]
    measure: AtomicMeasure

    def __post_init__(self):
        if self.level == 0 and abs(self.pi_mass - 1.0) > TOL.mass_tol:
            raise ValidationError("level 0 must mix over the base measure alone")
        emp = math.fsum(a[2] for a in self.base_atoms)
        if abs(emp + self.pi_mass - 1.0) > TOL.mass_tol:
            raise ValidationError("base masses must total 1")


def sample_transition(mu: AtomicMeasure, theta: float, t: float,
                      rng: np.random.Generator,
                      trunc_tol: float = 1e-3,
                      stick_residual: float = TOL.stick_residual,
                      fresh_label_start: int | None = None) -> TransitionSample:
    """Draw the state at time t of the measure-valued dynamics started at mu."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if t <= 0:
        raise DomainError("t must be > 0")
    level = sample_death_level(theta, t, trunc_tol, rng)
    mu_masses = np.array(mu.masses)
    mu_labels = mu.labels
    mu_locs = mu.locations
    if fresh_label_start is None:
        fresh_label_start = (max(mu_labels) + 1) if mu_labels else 0

    # empirical component of the mixing measure
    base_counts: dict[int, int] = {}
    if level > 0:
        # mu may carry a tiny truncation residual; draws land on its atoms
        # proportionally (bias bounded by the residual, carried in budgets)
        picks = rng.choice(len(mu_masses), size=level, p=mu_masses / mu_masses.sum())
        for i in picks:
            base_counts[int(i)] = base_counts.get(int(i), 0) + 1
    denom = level + theta
    base_atoms = tuple(
        (mu_labels[i], mu_locs[i], c / denom) for i, c in sorted(base_counts.items())
    )
    pi_mass = theta / denom

    # stick-breaking draw with concentration level + theta over the mixing measure
    sticks, remaining = _sticks(denom, stick_residual, rng)
    atom_masses: dict[int, float] = {}
    atom_locs: dict[int, float] = {}
    is_fresh = rng.random(len(sticks)) < pi_mass
    nfresh = int(is_fresh.sum())
    for j, m in enumerate(sticks[is_fresh]):
        lab = fresh_label_start + j
        atom_locs[lab] = float(rng.random())
        atom_masses[lab] = float(m)
    nemp = len(sticks) - nfresh
    if nemp:
        which_x = picks[rng.integers(0, level, size=nemp)]
        grouped = np.bincount(which_x, weights=sticks[~is_fresh], minlength=len(mu_masses))
        for i in np.nonzero(grouped)[0]:
            lab = mu_labels[int(i)]
            atom_locs[lab] = mu_locs[int(i)]
            atom_masses[lab] = float(grouped[i])
    measure = AtomicMeasure(
        tuple((lab, atom_locs[lab], atom_masses[lab]) for lab in sorted(atom_masses)),
        residual=float(remaining),
    )
    return TransitionSample(t, level, pi_mass, base_atoms, measure)


def _sticks(concentration: float, residual_tol: float,
            rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Stick masses at the given concentration, stopped below residual_tol."""
    target = -math.log(residual_tol)
    cum = np.cumsum(rng.exponential(1.0 / concentration,
                                    size=max(8, int(24 * concentration))))
    while cum[-1] < target:
        more = rng.exponential(1.0 / concentration, size=len(cum))
        cum = np.concatenate([cum, cum[-1] + np.cumsum(more)])
    stop = int(np.searchsorted(cum, target, side="left"))
    prev = np.concatenate([[0.0], cum[:stop]])
    e = np.diff(np.concatenate([[0.0], cum[: stop + 1]]))
    return np.exp(-prev) * (1.0 - np.exp(-e)), float(math.exp(-cum[stop]))


def sample_absorption_times(theta: float, entry_level: int, reps: int,
                            rng: np.random.Generator,
                            chunk: int = 2000) -> np.ndarray:
    """Total passage times from a finite entry level down to 0."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    if entry_level < 1:
        raise DomainError("entry_level must be >= 1")
    levels = np.arange(entry_level, 0, -1, dtype=float)
    inv_rates = 2.0 / (levels * (levels - 1.0 + theta))
    out = np.empty(reps)
    for lo in range(0, reps, chunk):
        hi = min(lo + chunk, reps)
        out[lo:hi] = rng.exponential(inv_rates, size=(hi - lo, entry_level)).sum(axis=1)
    return out


def transition_match_stats(theta: float, t: float, reps: int,
                           rng: np.random.Generator,
                           trunc_tol: float = 1e-3,
                           stick_residual: float = TOL.stick_residual) -> dict:
    """Stationarity check: feed stick-breaking draws through the transition and
    collect the two-sample match statistic of each output measure.

    Works on raw arrays for speed; one replicate is: draw mu, draw the death
    level, draw level-many samples from mu, stick-break the output, group
    output mass by atom label, record sum of squared grouped masses.
    """
    from .esf_crp import gem_sticks

    entry = choose_entry_level(theta, t, trunc_tol)
    levels = np.arange(entry, 0, -1, dtype=float)
    inv_rates = 2.0 / (levels * (levels - 1.0 + theta))
    stats = np.empty(reps)
    level_sum = 0
    for r in range(reps):
        mu_masses, _ = gem_sticks(theta, stick_residual, rng)
        times = rng.exponential(inv_rates)
        level = entry - int(np.searchsorted(np.cumsum(times), t, side="right"))
        level_sum += level
        denom = level + theta
        if level > 0:
            picks = rng.choice(len(mu_masses), size=level, p=mu_masses / mu_masses.sum())
        else:
            picks = np.empty(0, dtype=np.int64)
        masses, _ = _sticks(denom, stick_residual, rng)
        # atom choice per stick: fresh (all distinct) or one of the X-samples
        is_fresh = rng.random(len(masses)) < theta / denom
        fresh_part = float(np.sum(masses[is_fresh] ** 2))
        nemp = int((~is_fresh).sum())
        if nemp and level > 0:
            which_x = rng.integers(0, level, size=nemp)
            lab = picks[which_x]  # label = index of the mu atom
            grouped = np.bincount(lab, weights=masses[~is_fresh])
            emp_part = float(np.sum(grouped**2))
        else:
            emp_part = 0.0
        stats[r] = fresh_part + emp_part
    return {
        "theta": theta,
        "t": t,
        "reps": reps,
        "entry_level": entry,
        "mean_level": level_sum / reps,
        "match_mean": float(stats.mean()),
        "match_se": float(stats.std(ddof=1) / math.sqrt(reps)),
        "match_target": 1.0 / (theta + 1.0),
    }
