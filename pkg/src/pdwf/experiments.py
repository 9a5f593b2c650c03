"""End-to-end verification experiments.

Each experiment compares a Monte Carlo (or exact) quantity against the
matching closed-form bound or identity and reports PASS/FAIL per cell,
together with the inputs that produced the bound, so a failure can be
attributed to either side. Reports are plain dicts of JSON-safe values and
are byte-reproducible for a fixed seed.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bd
from . import esf_crp, fleming_viot, genealogy, wright_fisher
from .errors import ResourceError, ValidationError
from .measures import enumerate_partitions
from .rng import spawn_rngs


@dataclass(frozen=True)
class ExperimentManifest:
    """Identifies one experiment run; equal manifests mean identical outputs."""

    experiment: str
    params: dict

    @property
    def content_hash(self) -> str:
        blob = json.dumps({"experiment": self.experiment, "params": self.params},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params,
                "hash": self.content_hash}


@dataclass(frozen=True)
class TVEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    reps: int
    exact_id: str
    bias_bound: float

    def __post_init__(self):
        if not 0 <= self.estimate <= 1:
            raise ValidationError("TV estimate outside [0, 1]")
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValidationError("interval must contain the estimate")

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "reps": self.reps,
                "exact_id": self.exact_id, "bias_bound": self.bias_bound}


def tv_against_exact(assign: np.ndarray, exact: dict, n: int,
                     rng: np.random.Generator,
                     n_boot: int = 1000) -> TVEstimate:
    """Plug-in TV of an empirical RGS matrix against an exact partition law,
    with a percentile bootstrap interval."""
    parts = list(enumerate_partitions(n))
    probs = np.array([exact[p] for p in parts])
    code_of = {p.assignment: i for i, p in enumerate(parts)}
    reps = assign.shape[0]
    counts = np.zeros(len(parts), dtype=np.int64)
    codes = esf_crp.rgs_codes(assign)
    uniq, c = np.unique(codes, return_counts=True)
    base = n + 1
    for code, cnt in zip(uniq, c):
        digits = []
        v = int(code)
        for _ in range(n):
            digits.append(v % base)
            v //= base
        counts[code_of[tuple(digits)]] = cnt
    est = 0.5 * float(np.abs(counts / reps - probs).sum())
    boot = rng.multinomial(reps, counts / reps, size=n_boot) / reps
    tvs = 0.5 * np.abs(boot - probs[None, :]).sum(axis=1)
    lo, hi = np.percentile(tvs, [2.5, 97.5])
    bias = math.sqrt(len(parts) / (4.0 * reps))
    return TVEstimate(est, min(float(lo), est), max(float(hi), est), reps,
                      f"esf(n={n})", bias)


def estimate_tv_wf_vs_esf(N: int, theta: float, n: int, reps: int, seed,
                          source: str = "backward",
                          burn_in: int | None = None) -> TVEstimate:
    """Plug-in TV between sampled stationary n-partitions and the exact
    sampling formula, one partition per independent stationary replicate."""
    if n > 8:
        raise ResourceError("exact side limited to n <= 8")
    if reps < 1000:
        raise ValidationError("need reps >= 1000")
    if theta >= 2 * N:
        raise ValidationError("mutation rate theta/(2N) must stay below 1")
    rng_sim, rng_boot = spawn_rngs(seed, 2)
    rate = theta / (2.0 * N)
    if source == "backward":
        assign = wright_fisher.stationary_sample_partition_batch(N, rate, n, reps, rng_sim)
    elif source == "forward":
        assign = wright_fisher.forward_sample_partition_batch(N, theta, n, reps, rng_sim,
                                                              burn_in=burn_in)
    else:
        raise ValidationError(f"unknown source {source!r}")
    exact = esf_crp.esf_distribution(n, theta)
    exact_by_assign = {p.assignment: v for p, v in exact.items()}
    parts = list(enumerate_partitions(n))
    est = tv_against_exact(assign, {p: exact_by_assign[p.assignment] for p in parts},
                           n, rng_boot)
    return TVEstimate(est.estimate, est.ci_low, est.ci_high, reps,
                      f"esf(n={n},theta={theta})", est.bias_bound)


def verify_crp_gap(n_list, theta_list) -> dict:
    """Deterministic check: the exact match-probability gap between the
    n-sample empirical measure and the limit law never exceeds the
    corresponding two-sample functional bound."""
    tf = bd.ProductMomentClass(k=2, phi_sup=1.0)
    cells = []
    ok = True
    for theta in theta_list:
        for n in n_list:
            gap = (esf_crp.match_probability_empirical(n, theta)
                   - esf_crp.match_probability_dp(theta))
            bound = bd.crp_empirical_dp_bound(n, tf, theta)
            passed = gap <= bound
            ok = ok and passed
            cells.append({"n": n, "theta": theta, "gap": gap,
                          "bound": bound, "pass": passed})
    return {"experiment": "crp_gap", "pass": ok, "cells": cells,
            "test_class": {"kind": "product_moment", "k": 2, "phi_sup": 1.0}}


def verify_genealogy_bounds(N_list, intervals_by_N, reps, seed,
                            tau_scale: float = 1.0) -> dict:
    """Monte Carlo second moments of interval durations and lineage counts
    against their closed-form bounds.

    ``tau_scale`` exists for harness self-tests: scaling the simulated
    durations must flip cells to FAIL.
    """
    if reps < 1000:
        raise ValidationError("need reps >= 1000")
    rngs = spawn_rngs(seed, len(N_list))
    results = []
    ok = True
    for N, rng in zip(N_list, rngs):
        intervals = [tuple(iv) for iv in intervals_by_N[N]]
        stats = genealogy.simulate_traces_batch(N, reps, floor=2, rng=rng,
                                                intervals=intervals)
        for iv in intervals:
            gens, _ = stats[iv]
            tau2 = (gens.astype(float) * tau_scale) ** 2
            mean, se = float(tau2.mean()), float(tau2.std(ddof=1) / math.sqrt(reps))
            bound = genealogy.duration_sq_bound(N, iv[0], iv[1])
            passed = mean + 3 * se <= bound
            ok = ok and passed
            results.append({"N": N, "x": iv[0], "y": iv[1], "kind": "duration_sq",
                            "mc_mean": mean, "mc_se": se, "bound": bound,
                            "pass": passed})
        _, full_edges = stats["full"]
        e2 = (full_edges.astype(float) * tau_scale) ** 2
        mean, se = float(e2.mean()), float(e2.std(ddof=1) / math.sqrt(reps))
        bound = genealogy.edges_sq_bound(N)
        passed = mean + 3 * se <= bound
        ok = ok and passed
        results.append({"N": N, "x": 2, "y": N, "kind": "edges_sq",
                        "mc_mean": mean, "mc_se": se, "bound": bound,
                        "pass": passed})
    return {"experiment": "genealogy_bounds", "pass": ok, "reps": reps,
            "cells": results}


def verify_kn_moment(N_list, theta, reps, seed, slope_N_list=None) -> dict:
    """Second moment of the stationary type count against its bound, plus the
    log-growth diagnostic for the mean."""
    if reps < 500:
        raise ValidationError("need reps >= 500")
    slope_N_list = list(slope_N_list or N_list)
    all_N = sorted(set(N_list) | set(slope_N_list))
    rngs = dict(zip(all_N, spawn_rngs(seed, len(all_N))))
    k_by_N = {}
    cells = []
    ok = True
    for N in all_N:
        rate = theta / (2.0 * N)
        ks = wright_fisher.backward_k_batch(N, rate, reps, rngs[N])
        k_by_N[N] = ks
        if N in N_list:
            k2 = ks.astype(float) ** 2
            mean, se = float(k2.mean()), float(k2.std(ddof=1) / math.sqrt(reps))
            bound = bd.stationary_types_sq_bound(N, rate)
            passed = mean + 3 * se <= bound
            ok = ok and passed
            cells.append({"N": N, "theta": theta, "p_sup": rate,
                          "mc_mean_k2": mean, "mc_se": se, "bound": bound,
                          "pass": passed})
    logs = np.array([math.log(N) for N in slope_N_list])
    means = np.array([float(k_by_N[N].mean()) for N in slope_N_list])
    slope = float(np.polyfit(logs, means, 1)[0]) if len(slope_N_list) > 1 else 0.0
    return {"experiment": "kn_moment", "pass": ok, "reps": reps, "cells": cells,
            "mean_k_by_N": {str(N): float(k_by_N[N].mean()) for N in slope_N_list},
            "log_slope": slope}


def verify_binomial_moments(n_max: int = 12, p_step: float = 0.05) -> dict:
    """Exhaustive check of the binomial moment bounds on a p-grid."""
    from math import comb
    ok = True
    worst = 0.0
    cells = 0
    for n in range(0, n_max + 1):
        ps = [round(i * p_step, 10) for i in range(int(round(1 / p_step)) + 1)]
        for p in ps:
            pmf = np.array([comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)])
            ks = np.arange(n + 1, dtype=float)
            m4 = float(np.sum(pmf * (ks - n * p) ** 4))
            m3 = float(np.sum(pmf * ks**3))
            m2 = float(np.sum(pmf * ks**2))
            b4, b3, b2 = bd.binomial_moment_bounds(n, p)
            closed = bd.binomial_central4_exact(n, p)
            gap = abs(m4 - closed)
            worst = max(worst, gap)
            here = (m4 <= b4 + 1e-12 and m3 <= b3 + 1e-12 and m2 <= b2 + 1e-12
                    and gap <= 1e-12)
            ok = ok and here
            cells += 1
    return {"experiment": "binomial_moments", "pass": ok, "cells": cells,
            "worst_central4_gap": worst}


def verify_fv_stationarity(theta, t_list, reps, seed, time_reps=3000) -> dict:
    """Transition sampler fixed-point check plus the passage-time mean bound."""
    rngs = spawn_rngs(seed, len(t_list) + 1)
    cells = []
    ok = True
    for t, rng in zip(t_list, rngs[:-1]):
        stats = fleming_viot.transition_match_stats(theta, t, reps, rng)
        dev = abs(stats["match_mean"] - stats["match_target"])
        tol = 5 * stats["match_se"] + 2e-10
        passed = dev <= tol
        ok = ok and passed
        cells.append({**stats, "abs_dev": dev, "tol": tol, "pass": passed})
    entry = fleming_viot.choose_entry_level(theta, t=1.0, trunc_tol=1e-3)
    times = fleming_viot.sample_absorption_times(theta, entry, time_reps, rngs[-1])
    t_mean = float(times.mean())
    t_se = float(times.std(ddof=1) / math.sqrt(time_reps))
    t_bound = 2.0 * (theta + 1.0) / theta
    t_pass = t_mean <= t_bound + 3 * t_se
    ok = ok and t_pass
    return {"experiment": "fv_stationarity", "pass": ok, "cells": cells,
            "absorption": {"entry_level": entry, "mean": t_mean, "se": t_se,
                           "bound": t_bound, "pass": t_pass}}


def verify_all(seed: int = 0) -> dict:
    """Desk-scale run of every verification experiment; byte-reproducible."""
    manifest = ExperimentManifest("verify_all", {
        "seed": seed,
        "prop_n": [1, 2, 3, 5, 10, 100, 1000, 10000],
        "prop_theta": [0.5, 1.0, 2.0, 5.0],
        "genealogy_N": [50, 100],
        "genealogy_reps": 1500,
        "kn_N": [100, 200],
        "kn_reps": 800,
        "fv_reps": 4000,
        "tv_N": 100,
        "tv_reps": 20000,
    })
    p = manifest.params
    seeds = np.random.SeedSequence(seed).spawn(5)
    gene_intervals = {50: [(2, 10), (5, 25)], 100: [(2, 20), (10, 50)]}
    tv = estimate_tv_wf_vs_esf(p["tv_N"], 1.0, 3, p["tv_reps"], seeds[3])
    tv_bound = bd.wf_sampling_tv_bound(
        3, bd.pim_inputs(p["tv_N"], 1.0,
                         k32=bd.k32_from_types_sq_bound(p["tv_N"], 1.0 / (2 * p["tv_N"])),
                         k32_mode="bound"))
    report = {
        "manifest": manifest.to_dict(),
        "crp_gap": verify_crp_gap(p["prop_n"], p["prop_theta"]),
        "genealogy_bounds": verify_genealogy_bounds(p["genealogy_N"], gene_intervals,
                                                    p["genealogy_reps"], seeds[0]),
        "kn_moment": verify_kn_moment(p["kn_N"], 1.0, p["kn_reps"], seeds[1],
                                      slope_N_list=[100, 200, 400]),
        "binomial_moments": verify_binomial_moments(),
        "fv_stationarity": verify_fv_stationarity(1.0, [1.0], p["fv_reps"], seeds[2]),
        "tv_wf_vs_esf": {"experiment": "tv_wf_vs_esf", "N": p["tv_N"], "n": 3,
                         "theta": 1.0, **tv.to_dict(),
                         "bound": tv_bound,
                         "pass": tv.estimate <= min(1.0, tv_bound)},
    }
    report["pass"] = all(
        report[k]["pass"] for k in ("crp_gap", "genealogy_bounds", "kn_moment",
                                    "binomial_moments", "fv_stationarity", "tv_wf_vs_esf"))
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
