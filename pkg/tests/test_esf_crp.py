import math

import numpy as np
import pytest

from pdwf.errors import DomainError, NumericalError, ResourceError
from pdwf.esf_crp import (crp_empirical_measure, crp_sample, crp_sample_batch,
                          dp_sample, empirical_partition_distribution,
                          esf_distribution, esf_set_partition_prob,
                          expected_block_count, gem_masses_batch, gem_sticks,
                          gem_stick_breaking, log_rising_factorial,
                          match_probability_dp, match_probability_empirical,
                          paintbox_pair_moment, paintbox_triple_moment)
from pdwf.measures import (SetPartition, block_profile, enumerate_partitions,
                           variation_distance)


def crp_tree_distribution(n, theta):
    """Oracle: accumulate probability over every sequential seating path."""
    dist = {}

    def recurse(blocks, prob):
        i = sum(len(b) for b in blocks) + 1
        if i > n:
            p = canonical(blocks)
            dist[p] = dist.get(p, 0.0) + prob
            return
        denom = i - 1 + theta
        for b in range(len(blocks)):
            recurse([blk | {i} if j == b else blk for j, blk in enumerate(blocks)],
                    prob * len(blocks[b]) / denom)
        recurse(blocks + [{i}], prob * theta / denom)

    def canonical(blocks):
        from pdwf.measures import canonicalize_partition
        return canonicalize_partition(blocks)

    recurse([{1}], 1.0)
    return dist


class TestEsfProb:
    def test_n1(self):
        for theta in (0.1, 1.0, 7.5):
            assert esf_set_partition_prob(SetPartition((0,)), theta) == pytest.approx(1.0)

    def test_n2_theta1(self):
        assert esf_set_partition_prob(SetPartition.from_string("00"), 1.0) == pytest.approx(0.5)
        assert esf_set_partition_prob(SetPartition.from_string("01"), 1.0) == pytest.approx(0.5)

    def test_n3_theta1_all_singletons(self):
        assert esf_set_partition_prob(SetPartition.from_string("012"), 1.0) == pytest.approx(1 / 6)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_matches_seating_tree_oracle(self, n, theta):
        oracle = crp_tree_distribution(n, theta)
        for p, prob in oracle.items():
            assert esf_set_partition_prob(p, theta) == pytest.approx(prob, rel=1e-12)

    def test_theta_domain(self):
        with pytest.raises(DomainError):
            esf_set_partition_prob(SetPartition((0,)), 0.0)

    def test_small_theta_concentrates_on_one_block(self):
        assert esf_set_partition_prob(SetPartition.from_string("0000"), 1e-6) > 1 - 1e-5

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exchangeability(self, n):
        # probability depends on the block profile only
        by_profile = {}
        for p in enumerate_partitions(n):
            by_profile.setdefault(block_profile(p).counts, []).append(
                esf_set_partition_prob(p, 1.7))
        for vals in by_profile.values():
            assert max(vals) - min(vals) < 1e-15


class TestEsfDistribution:
    @pytest.mark.parametrize("n", range(1, 9))
    @pytest.mark.parametrize("theta", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    def test_sums_to_one(self, n, theta):
        dist = esf_distribution(n, theta)
        assert abs(math.fsum(dist.values()) - 1.0) < 1e-10

    def test_n2_values(self):
        dist = esf_distribution(2, 1.0)
        assert dist[SetPartition.from_string("00")] == pytest.approx(0.5)
        assert dist[SetPartition.from_string("01")] == pytest.approx(0.5)

    def test_large_theta_concentrates_on_singletons(self):
        theta = 1e4
        dist = esf_distribution(2, theta)
        assert dist[SetPartition.from_string("01")] == pytest.approx(theta / (theta + 1))

    def test_cap(self):
        with pytest.raises(ResourceError):
            esf_distribution(13, 1.0)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_kingman_consistency(self, n):
        # deleting the last element maps the n-law onto the (n-1)-law exactly
        theta = 1.3
        marg = {}
        for p, prob in esf_distribution(n, theta).items():
            q_blocks = [set(b) - {n} for b in p.blocks()]
            from pdwf.measures import canonicalize_partition
            q = canonicalize_partition([b for b in q_blocks if b])
            marg[q] = marg.get(q, 0.0) + prob
        for q, prob in esf_distribution(n - 1, theta).items():
            assert marg[q] == pytest.approx(prob, rel=1e-12)


class TestCrpSample:
    def test_n1(self):
        rng = np.random.default_rng(0)
        assert crp_sample(1, 1.0, rng).to_string() == "0"

    def test_batch_matches_scalar_law(self):
        # same distribution from the loop sampler and the vectorized one
        n, theta, reps = 4, 1.0, 40000
        rng = np.random.default_rng(42)
        scalar = {}
        for _ in range(reps):
            p = crp_sample(n, theta, rng)
            scalar[p] = scalar.get(p, 0.0) + 1.0 / reps
        batch = empirical_partition_distribution(crp_sample_batch(n, theta, reps, rng))
        assert variation_distance(scalar, batch) < 0.02

    def test_batch_converges_to_exact(self):
        n, theta, reps = 5, 1.0, 200000
        rng = np.random.default_rng(7)
        emp = empirical_partition_distribution(crp_sample_batch(n, theta, reps, rng))
        tv = variation_distance(emp, esf_distribution(n, theta))
        assert tv <= 3 * math.sqrt(52 / (4 * reps))


class TestEmpiricalMeasure:
    def test_n1(self):
        m = crp_empirical_measure(1, 1.0, np.random.default_rng(0))
        assert m.masses == (1.0,)

    def test_masses_are_block_frequencies(self):
        rng = np.random.default_rng(3)
        m = crp_empirical_measure(40, 1.0, rng)
        assert math.fsum(m.masses) == pytest.approx(1.0)
        assert all(mass > 0 for mass in m.masses)
        assert len(set(m.labels)) == len(m.labels)

    def test_expected_atom_count(self):
        rng = np.random.default_rng(12)
        reps = 3000
        counts = [len(crp_empirical_measure(100, 1.0, rng).atoms) for _ in range(reps)]
        target = expected_block_count(100, 1.0)
        assert target == pytest.approx(sum(1 / i for i in range(1, 101)))
        se = np.std(counts, ddof=1) / math.sqrt(reps)
        assert abs(np.mean(counts) - target) < 5 * se


class TestStickBreaking:
    def test_residual_below_tol(self):
        rng = np.random.default_rng(1)
        for theta in (0.5, 1.0, 2.0):
            v = gem_stick_breaking(theta, 1e-8, rng)
            assert v.residual < 1e-8
            assert list(v.masses) == sorted(v.masses, reverse=True)

    def test_first_stick_mean(self):
        # first (size-biased) stick is Beta(1, theta); mean 1/(1+theta)
        rng = np.random.default_rng(2)
        reps = 20000
        firsts = np.array([gem_sticks(1.0, 1e-6, rng)[0][0] for _ in range(reps)])
        se = firsts.std(ddof=1) / math.sqrt(reps)
        assert abs(firsts.mean() - 0.5) < 5 * se

    def test_pair_sum_matches_match_probability(self):
        rng = np.random.default_rng(3)
        reps, tol = 20000, 1e-10
        vals = np.empty(reps)
        for i in range(reps):
            masses, _ = gem_sticks(1.0, tol, rng)
            vals[i] = float(np.sum(masses) ** 2 - np.sum(masses**2))
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - paintbox_pair_moment(1.0)) < 5 * se + 2 * tol

    def test_nontermination_guard(self):
        rng = np.random.default_rng(4)
        with pytest.raises(NumericalError):
            gem_sticks(1.0, 1e-8, rng, max_sticks=3)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(9)
        reps, tol, theta = 5000, 1e-10, 1.0
        masses, residuals = gem_masses_batch(theta, reps, tol, rng)
        assert (residuals < tol).all()
        sums = masses.sum(axis=1) + residuals
        assert np.abs(sums - 1.0).max() < 1e-9
        # stick-count law agrees with the scalar sampler
        batch_counts = (masses > 0).sum(axis=1)
        scalar_counts = np.array([len(gem_sticks(theta, tol, rng)[0]) for _ in range(reps)])
        assert abs(batch_counts.mean() - scalar_counts.mean()) < 5 * (
            scalar_counts.std(ddof=1) * math.sqrt(2.0 / reps))


class TestMoments:
    def test_paintbox_values(self):
        assert paintbox_pair_moment(1.0) == pytest.approx(0.5)
        assert paintbox_triple_moment(1.0) == pytest.approx(1 / 6)
        assert paintbox_pair_moment(1e9) == pytest.approx(1.0, abs=1e-8)
        assert paintbox_triple_moment(1e9) == pytest.approx(1.0, abs=1e-8)

    def test_match_probabilities(self):
        assert match_probability_dp(1.0) == pytest.approx(0.5)
        assert match_probability_empirical(1, 3.0) == pytest.approx(1.0)
        assert match_probability_empirical(2, 1.0) == pytest.approx(0.75)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("n", [1, 2, 10, 1000])
    def test_match_gap_identity(self, theta, n):
        gap = match_probability_empirical(n, theta) - match_probability_dp(theta)
        assert gap == pytest.approx(theta / (n * (theta + 1)), rel=1e-12)

    def test_pair_moment_equals_two_sample_block_law(self):
        # all-distinct two-sample probability read off the exact n=2 law
        theta = 1.7
        dist = esf_distribution(2, theta)
        assert paintbox_pair_moment(theta) == pytest.approx(
            dist[SetPartition.from_string("01")])
        assert match_probability_dp(theta) == pytest.approx(
            dist[SetPartition.from_string("00")])

    def test_triple_moment_equals_three_sample_singleton_law(self):
        theta = 0.8
        dist = esf_distribution(3, theta)
        assert paintbox_triple_moment(theta) == pytest.approx(
            dist[SetPartition.from_string("012")])


class TestLogRising:
    def test_small_values(self):
        assert log_rising_factorial(1.0, 3) == pytest.approx(math.log(6))
        assert log_rising_factorial(2.5, 0) == 0.0

    def test_large_n_no_overflow(self):
        val = log_rising_factorial(1.0, 10**6)
        assert math.isfinite(val) and val > 0


class TestDpSample:
    def test_measure_is_valid(self):
        m = dp_sample(1.0, np.random.default_rng(0))
        assert m.residual < 1e-9
        assert len(set(m.labels)) == len(m.labels)
