"""Ground-truth computations on raw symbol streams."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnpsketch import oracle
from bnpsketch.genmodel import PriorParams, RawSample, sample_pyp_sequence
from bnpsketch.numkit import DomainError


def sample_with_weights(symbols, weights):
    ids = np.array(sorted(weights), dtype=np.int64)
    w = np.array([weights[i] for i in ids], dtype=float)
    return RawSample(symbols=np.array(symbols, dtype=np.int64), atom_ids=ids, atom_weights=w)


class TestPartitionStats:
    def test_simple(self):
        stats = oracle.partition_stats(RawSample(symbols=np.array([7, 7, 9])))
        assert stats.k == 2
        assert stats.m[1] == 1 and stats.m[2] == 1

    def test_empty(self):
        stats = oracle.partition_stats(RawSample(symbols=np.empty(0, dtype=np.int64)))
        assert stats.k == 0 and stats.n == 0

    def test_constant_stream(self):
        stats = oracle.partition_stats(RawSample(symbols=np.zeros(9, dtype=np.int64)))
        assert stats.k == 1 and stats.m[9] == 1

    @given(st.lists(st.integers(0, 20), max_size=300))
    @settings(max_examples=60, deadline=None)
    def test_identities(self, ids):
        stats = oracle.partition_stats(RawSample(symbols=np.array(ids, dtype=np.int64)))
        assert int(stats.m.sum()) == stats.k
        assert int(np.dot(np.arange(stats.m.size), stats.m)) == len(ids)


class TestTrueCoverage:
    def test_worked_example(self):
        s = sample_with_weights([1, 1, 2], {1: 0.5, 2: 0.3})
        assert abs(oracle.true_coverage(s, 0) - 0.2) < 1e-15
        assert abs(oracle.true_coverage(s, 1) - 0.3) < 1e-15
        assert abs(oracle.true_coverage(s, 2) - 0.5) < 1e-15

    def test_empty_sample(self):
        s = sample_with_weights([], {1: 0.4})
        assert oracle.true_coverage(s, 0) == 1.0

    def test_total_mass_one_for_generated_sample(self):
        smp = sample_pyp_sequence(PriorParams(0.4, 3.0), 20_000, seed=4)
        stats = oracle.partition_stats(smp)
        top = int(stats.m.nonzero()[0].max())
        profile = oracle.true_coverage_profile(smp, top)
        assert abs(profile.sum() - 1.0) < 1e-12

    def test_requires_weights(self):
        with pytest.raises(DomainError):
            oracle.true_coverage(RawSample(symbols=np.array([1, 2])), 0)


class TestRawCoverageEstimator:
    def test_single_observation(self):
        stats = oracle.partition_stats(RawSample(symbols=np.array([5])))
        for alpha, theta in ((0.3, 1.0), (0.0, 2.0)):
            got = oracle.raw_bnp_coverage(stats, 1, PriorParams(alpha, theta), 0)
            assert abs(got - (theta + alpha) / (theta + 1)) < 1e-15

    def test_zero_discount_missing_mass_ignores_k(self):
        p = PriorParams(0.0, 2.0)
        for ids in ([1, 1, 1], [1, 2, 3]):
            stats = oracle.partition_stats(RawSample(symbols=np.array(ids)))
            assert abs(oracle.raw_bnp_coverage(stats, 3, p, 0) - 2.0 / 5.0) < 1e-15

    @given(st.lists(st.integers(0, 12), min_size=1, max_size=120))
    @settings(max_examples=60, deadline=None)
    def test_normalization(self, ids):
        stats = oracle.partition_stats(RawSample(symbols=np.array(ids, dtype=np.int64)))
        p = PriorParams(0.4, 1.7)
        total = sum(
            oracle.raw_bnp_coverage(stats, len(ids), p, r) for r in range(len(ids) + 1)
        )
        assert abs(total - 1.0) < 1e-12


class TestGoodTuring:
    def test_formula(self):
        stats = oracle.partition_stats(RawSample(symbols=np.array([1, 1, 2, 3])))
        # two singletons: missing-mass estimate 2/4
        assert abs(oracle.good_turing_coverage(stats, 0) - 0.5) < 1e-15
        # one doubleton: order-1 estimate 2*1/4
        assert abs(oracle.good_turing_coverage(stats, 1) - 0.5) < 1e-15
        assert oracle.good_turing_coverage(stats, 2) == 0.0
