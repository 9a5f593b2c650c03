"""Poisson-Dirichlet / Ewens sampling toolkit with Wright-Fisher simulators
and closed-form approximation bounds, verified against exact small-instance
and Monte Carlo oracles."""

from .measures import (AtomicMeasure, BlockProfile, MassVector, SetPartition,
                       block_profile, canonicalize_partition,
                       enumerate_partitions, partition_from_labels,
                       variation_distance)
from .esf_crp import (crp_empirical_measure, crp_sample, dp_sample,
                      esf_distribution, esf_set_partition_prob,
                      gem_stick_breaking, match_probability_dp,
                      match_probability_empirical, paintbox_pair_moment,
                      paintbox_triple_moment)
from .genealogy import (AncestralTrace, IntervalStats, ancestral_step,
                        ancestral_transition_prob, duration_sq_bound,
                        edges_sq_bound, interval_stats, occupancy_ge2_mean,
                        simulate_trace, stirling2_log)
from .wright_fisher import (KernelTable, MutationModel, StepDetail,
                            WFPopulation, custom_model,
                            exact_stationary_partition_pim, k_moments,
                            pim_model, sample_partition, wf_stationary_sample,
                            wf_step)
from .fleming_viot import (DeathProcessPath, TransitionSample,
                           expected_absorption_time, sample_death_level,
                           sample_transition)
from .bounds import (BoundReport, ProductMomentClass, SmoothStatisticClass,
                     WFBoundInputs, binomial_moment_bounds,
                     crp_empirical_dp_bound, order_constants,
                     partition_stein_constants, pim_inputs, stein_constants,
                     stationary_types_sq_bound, wf_dp_bound, wf_error_terms,
                     wf_sampling_tv_bound)
from .experiments import (ExperimentManifest, TVEstimate,
                          estimate_tv_wf_vs_esf, verify_all,
                          verify_genealogy_bounds, verify_kn_moment,
                          verify_crp_gap)

__version__ = "0.1.0"
