import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfsim.errors import ConfigurationError
from cfsim.grouping import (
    CooperationMap,
    SubgroupPlan,
    assign_pilots,
    beta_vectors,
    build_dcc,
    common_average_gain,
    kmeans_partition,
    make_plan,
    within_cluster_ss,
)


def partition_sets(assignment):
    return frozenset(
        frozenset(np.nonzero(assignment == g)[0].tolist()) for g in np.unique(assignment)
    )


def brute_force_two_partition(features):
    """Oracle: best WCSS over all 2-partitions, by exhaustive enumeration."""
    n = len(features)
    best, best_sets = np.inf, None
    for mask_bits in range(1, 2 ** (n - 1)):  # point 0 fixed in part A: unlabeled partitions
        mask = np.array([(mask_bits >> i) & 1 for i in range(n)], dtype=bool)
        wcss = 0.0
        for part in (features[~mask], features[mask]):
            wcss += np.sum((part - part.mean(axis=0)) ** 2)
        if wcss < best:
            best = wcss
            best_sets = frozenset(
                [frozenset(np.nonzero(~mask)[0].tolist()), frozenset(np.nonzero(mask)[0].tolist())]
            )
    return best, best_sets


class TestBetaVectors:
    def test_db_transform(self):
        beta = np.array([[1.0, 2.0], [3.0, 4.0]])  # (L=2, K=2)
        feats = beta_vectors(beta)
        np.testing.assert_allclose(feats[0], [0.0, 10 * np.log10(3.0)])
        np.testing.assert_allclose(feats[1], [10 * np.log10(2.0), 10 * np.log10(4.0)])

    def test_identical_columns_identical_features(self):
        beta = np.tile(np.array([[0.5], [0.1]]), (1, 4))
        feats = beta_vectors(beta)
        assert np.all(feats == feats[0])

    def test_finite(self):
        beta = np.random.default_rng(0).uniform(1e-14, 1e-3, (10, 20))
        assert np.all(np.isfinite(beta_vectors(beta)))


class TestKmeans:
    def test_single_group(self):
        feats = np.random.default_rng(0).normal(size=(8, 3))
        assert np.all(kmeans_partition(feats, 1, np.random.default_rng(1)) == 0)

    def test_singletons(self):
        feats = np.random.default_rng(0).normal(size=(8, 3))
        np.testing.assert_array_equal(
            kmeans_partition(feats, 8, np.random.default_rng(1)), np.arange(8)
        )

    def test_out_of_range_groups(self):
        feats = np.zeros((4, 2))
        with pytest.raises(ConfigurationError):
            kmeans_partition(feats, 0, np.random.default_rng(0))
        with pytest.raises(ConfigurationError):
            kmeans_partition(feats, 5, np.random.default_rng(0))

    def test_two_hotspots_match_brute_force(self):
        rng = np.random.default_rng(6)
        feats = np.vstack(
            [rng.normal(0.0, 0.05, (5, 2)), rng.normal(10.0, 0.05, (5, 2))]
        )
        assignment = kmeans_partition(feats, 2, np.random.default_rng(7))
        _, oracle_sets = brute_force_two_partition(feats)
        assert partition_sets(assignment) == oracle_sets

    def test_objective_non_increasing(self):
        feats = np.random.default_rng(3).normal(size=(40, 5))
        trace = []
        kmeans_partition(feats, 6, np.random.default_rng(4), trace=trace)
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(2, 12).flatmap(
            lambda k: st.tuples(st.just(k), st.integers(1, k), st.integers(0, 2**31))
        )
    )
    def test_partition_disjoint_exhaustive_nonempty(self, args):
        k, g, seed = args
        feats = np.random.default_rng(seed).normal(size=(k, 3))
        assignment = kmeans_partition(feats, g, np.random.default_rng(seed + 1))
        assert assignment.shape == (k,)
        sizes = np.bincount(assignment, minlength=g)
        assert sizes.sum() == k
        assert np.all(sizes >= 1)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31))
    def test_label_invariance_under_permutation(self, seed):
        rng = np.random.default_rng(seed)
        feats = rng.normal(size=(12, 4))
        perm = rng.permutation(12)
        a = kmeans_partition(feats, 3, np.random.default_rng(99))
        b = kmeans_partition(feats[perm], 3, np.random.default_rng(99))
        # partition of original indices must coincide up to subgroup relabeling
        b_sets = frozenset(
            frozenset(perm[np.nonzero(b == g)[0]].tolist()) for g in np.unique(b)
        )
        assert partition_sets(a) == b_sets


class TestPilots:
    def test_distinct_when_under_cap(self):
        pilot_of, tau_p = assign_pilots(10)
        assert tau_p == 10
        assert len(set(pilot_of.tolist())) == 10

    def test_round_robin_load(self):
        pilot_of, tau_p = assign_pilots(100, tau_p_cap=20)
        assert tau_p == 20
        counts = np.bincount(pilot_of, minlength=20)
        assert np.all(counts == 5)

    def test_single_group(self):
        pilot_of, tau_p = assign_pilots(1)
        assert tau_p == 1
        np.testing.assert_array_equal(pilot_of, [0])


class TestDcc:
    def test_single_group_served_by_all(self):
        beta = np.random.default_rng(0).uniform(1e-8, 1e-3, (6, 5))
        plan = make_plan(beta, 1, np.random.default_rng(1))
        coop = build_dcc(beta, plan)
        assert coop.serves.all()

    def test_distinct_pilots_everyone_serves(self):
        beta = np.random.default_rng(2).uniform(1e-8, 1e-3, (6, 9))
        plan = make_plan(beta, 3, np.random.default_rng(3))
        coop = build_dcc(beta, plan)
        assert coop.serves.all()
        assert coop.n_overrides == 0

    def test_argmax_on_shared_pilot(self):
        # two singleton subgroups forced onto one pilot; AP0 gains (0.3, 0.1)
        beta = np.array([[0.3, 0.1], [0.1, 0.4]])
        pilot_of, tau_p = assign_pilots(2, tau_p_cap=1)
        plan = SubgroupPlan(2, np.array([0, 1]), pilot_of, tau_p)
        coop = build_dcc(beta, plan)
        np.testing.assert_array_equal(coop.serves, [[True, False], [False, True]])
        assert coop.n_overrides == 0

    def test_orphan_subgroup_rescued_by_override(self):
        # a single AP must pick one co-pilot subgroup; the loser is added back
        beta = np.array([[0.3, 0.1]])
        pilot_of, tau_p = assign_pilots(2, tau_p_cap=1)
        plan = SubgroupPlan(2, np.array([0, 1]), pilot_of, tau_p)
        coop = build_dcc(beta, plan)
        assert coop.serves.all() and coop.n_overrides == 1

    def test_every_subgroup_served_and_per_pilot_uniqueness(self):
        rng = np.random.default_rng(5)
        beta = rng.uniform(1e-8, 1e-3, (10, 30))
        plan = make_plan(beta, 25, rng, tau_p_cap=20)
        coop = build_dcc(beta, plan)
        assert coop.serves.any(axis=0).all()
        # without overrides, each AP serves exactly one subgroup per pilot
        if coop.n_overrides == 0:
            for p in range(plan.tau_p):
                cands = np.nonzero(plan.pilot_of == p)[0]
                assert np.all(coop.serves[:, cands].sum(axis=1) == 1)

    def test_duties_and_served_by(self):
        beta = np.array([[0.3, 0.1], [0.1, 0.4]])
        plan = SubgroupPlan(2, np.array([0, 1]), *assign_pilots(2, tau_p_cap=1))
        coop = build_dcc(beta, plan)
        for g in range(2):
            for l in coop.served_by(g):
                assert g in coop.duties(l)

    def test_common_average_gain(self):
        beta = np.array([[1.0, 3.0, 10.0]])
        plan = SubgroupPlan(2, np.array([0, 0, 1]), np.array([0, 1]), 2)
        gains = common_average_gain(beta, plan)
        np.testing.assert_allclose(gains, [[2.0, 10.0]])


def test_plan_validation():
    with pytest.raises(ConfigurationError):
        SubgroupPlan(2, np.array([0, 0]), np.array([0, 1]), 2)  # empty subgroup
    with pytest.raises(ConfigurationError):
        SubgroupPlan(2, np.array([0, 1]), np.array([0, 5]), 2)  # pilot out of range


def test_wcss_helper():
    feats = np.array([[0.0], [2.0]])
    assignment = np.array([0, 0])
    assert within_cluster_ss(feats, assignment, np.array([[1.0]])) == pytest.approx(2.0)
