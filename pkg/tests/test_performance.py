import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfsim.channel import ChannelRealization, sample_realization
from cfsim.errors import ConfigurationError
from cfsim.estimation import composite_statistics, mmse_estimate, observe_pilots
from cfsim.grouping import CooperationMap, SubgroupPlan, assign_pilots
from cfsim.performance import (
    SinrAccumulator,
    accumulate,
    aggregate_se,
    empirical_cdf,
    finalize,
    finalize_sinr,
    se_group,
    se_user,
)
from cfsim.precoding import PowerAllocation, PrecoderConfig, PrecoderSet, apa_power, build_precoders
from tests.test_estimation import cov_from_matrices, tile_cov, tile_stats

PP = 100.0


def closed_form_sinr_singletons(betas, rhos, tau_p, pp, sigma_u2, sigma_d2):
    """Analytic hardening-bound SINR for 1 AP, N = 1, uncorrelated channels,
    singleton subgroups on orthogonal pilots, CB precoding.

    All moments are scalar complex-Gaussian identities: for h ~ CN(0, b),
    E|h|^2 = b and E|h|^4 = 2 b^2; the MMSE estimate is c * y with
    c = tpp*b / (tpp*b + sigma_u2) and y = sqrt(tpp) * h + n.
    """
    betas = np.asarray(betas, dtype=float)
    tpp = tau_p * pp
    rg = tpp * betas
    gam = rg + sigma_u2
    q = rg**2 / gam  # E |hhat|^2
    c = rg / gam
    m1 = np.sqrt(rhos / q) * c * np.sqrt(tpp) * betas
    m2_own = (rhos / q) * c**2 * (tpp * 2 * betas**2 + betas * sigma_u2)
    gammas = np.empty_like(betas)
    for k in range(len(betas)):
        cross = sum(rhos[c_] * betas[k] for c_ in range(len(betas)) if c_ != k)
        gammas[k] = m1[k] ** 2 / (m2_own[k] + cross - m1[k] ** 2 + sigma_d2)
    return gammas


def make_acc(sum_gain, sum_sq, n, sigma_d2, own):
    return SinrAccumulator(
        sum_gain=np.asarray(sum_gain, dtype=complex),
        sum_sq=np.asarray(sum_sq, dtype=float),
        n_samples=n,
        sigma_d2_mw=sigma_d2,
        own_group=np.asarray(own),
    )


class TestAccumulator:
    def setup_toy(self):
        plan = SubgroupPlan(1, np.array([0]), *assign_pilots(1))
        coop = CooperationMap(serves=np.ones((1, 1), dtype=bool))
        return plan, coop

    def test_zero_precoders_zero_stats(self):
        plan, coop = self.setup_toy()
        acc = SinrAccumulator.empty(plan, sigma_d2_mw=1.0)
        real = ChannelRealization(h=np.ones((1, 1, 2), dtype=complex))
        prec = PrecoderSet(w=np.zeros((1, 1, 2), dtype=complex), v=np.zeros((1, 1, 2)),
                           denominator=np.ones((1, 1)))
        accumulate(real, prec, coop, plan, acc)
        assert acc.sum_gain[0] == 0 and acc.sum_sq[0, 0] == 0 and acc.n_samples == 1

    def test_single_term_inner_product(self):
        plan, coop = self.setup_toy()
        acc = SinrAccumulator.empty(plan, sigma_d2_mw=1.0)
        h = np.array([[[1.0 + 1j, 2.0]]])
        w = np.array([[[0.5, 0.25j]]])
        accumulate(ChannelRealization(h=h), PrecoderSet(w=w, v=w, denominator=np.ones((1, 1))),
                   coop, plan, acc)
        expect = np.vdot(h[0, 0], w[0, 0])
        assert acc.sum_gain[0] == pytest.approx(expect)
        assert acc.sum_sq[0, 0] == pytest.approx(abs(expect) ** 2)

    def test_running_mean_of_identical_samples(self):
        plan, coop = self.setup_toy()
        acc = SinrAccumulator.empty(plan, sigma_d2_mw=1.0)
        h = np.array([[[0.3 - 0.4j]]])
        w = np.array([[[1.0 + 0j]]])
        prec = PrecoderSet(w=w, v=w, denominator=np.ones((1, 1)))
        for _ in range(7):
            accumulate(ChannelRealization(h=h), prec, coop, plan, acc)
        assert acc.sum_gain[0] / acc.n_samples == pytest.approx(np.vdot(h[0, 0], w[0, 0]))

    def test_merge_matches_sequential(self):
        # accumulating [a | b] in one pass equals merging the two halves
        rng = np.random.default_rng(0)
        plan = SubgroupPlan(2, np.array([0, 1, 1]), *assign_pilots(2))
        coop = CooperationMap(serves=np.ones((2, 2), dtype=bool))
        reals, precs = [], []
        for _ in range(10):
            h = rng.normal(size=(2, 3, 4)) + 1j * rng.normal(size=(2, 3, 4))
            w = rng.normal(size=(2, 2, 4)) + 1j * rng.normal(size=(2, 2, 4))
            reals.append(ChannelRealization(h=h))
            precs.append(PrecoderSet(w=w, v=w, denominator=np.ones((2, 2))))
        whole = SinrAccumulator.empty(plan, 0.5)
        for real, prec in zip(reals, precs):
            accumulate(real, prec, coop, plan, whole)
        parts = []
        for lo, hi in ((0, 4), (4, 10)):
            part = SinrAccumulator.empty(plan, 0.5)
            for real, prec in zip(reals[lo:hi], precs[lo:hi]):
                accumulate(real, prec, coop, plan, part)
            parts.append(part)
        merged = parts[0].merge(parts[1])
        assert merged.n_samples == whole.n_samples == 10
        np.testing.assert_allclose(merged.sum_gain, whole.sum_gain, rtol=1e-12)
        np.testing.assert_allclose(merged.sum_sq, whole.sum_sq, rtol=1e-12)
        np.testing.assert_allclose(finalize_sinr(merged), finalize_sinr(whole), rtol=1e-12)

    def test_merge_rejects_mismatched(self):
        a = make_acc(np.zeros(2), np.zeros((2, 2)), 1, 0.5, [0, 1])
        b = make_acc(np.zeros(3), np.zeros((3, 3)), 1, 0.5, [0, 1, 2])
        with pytest.raises(ValueError):
            a.merge(b)


class TestFinalize:
    def test_hand_example(self):
        # mean gain 1, own second moment 1, sigma_d2 = 1 -> gamma = 1
        acc = make_acc([10.0], [[10.0]], 10, 1.0, [0])
        assert finalize_sinr(acc)[0] == pytest.approx(1.0)

    def test_zero_desired_gain(self):
        acc = make_acc([0.0], [[5.0]], 10, 1.0, [0])
        assert finalize_sinr(acc)[0] == 0.0

    def test_needs_two_samples(self):
        acc = make_acc([1.0], [[1.0]], 1, 1.0, [0])
        with pytest.raises(RuntimeError):
            finalize_sinr(acc)

    def test_denominator_clamped_at_noise(self):
        # pathological finite-sample case: |m1|^2 slightly above sum m2
        acc = make_acc([10.0], [[9.9]], 10, 0.25, [0])
        assert finalize_sinr(acc)[0] == pytest.approx(1.0**2 / 0.25)

    @given(st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
    def test_more_noise_never_helps(self, m1, extra, sigma):
        acc1 = make_acc([m1 * 8], [[(m1**2 + extra) * 8]], 8, sigma, [0])
        acc2 = make_acc([m1 * 8], [[(m1**2 + extra) * 8]], 8, 2 * sigma, [0])
        assert finalize_sinr(acc2)[0] <= finalize_sinr(acc1)[0] + 1e-12


class TestSpectralEfficiency:
    def test_prelog_example(self):
        assert se_user(np.array([1.0]), 20, 200)[0] == pytest.approx(0.9)

    def test_zero_gamma(self):
        assert se_user(np.array([0.0]), 20, 200)[0] == 0.0

    def test_log2_example(self):
        assert se_user(np.array([3.0]), 20, 200)[0] == pytest.approx(1.8)

    def test_invalid_tau(self):
        with pytest.raises(ConfigurationError):
            se_user(np.array([1.0]), 200, 200)

    def test_group_min(self):
        plan = SubgroupPlan(2, np.array([0, 0, 0, 1]), np.array([0, 1]), 2)
        se = se_group(np.array([2.0, 1.5, 3.0, 0.7]), plan)
        np.testing.assert_allclose(se, [1.5, 0.7])

    def test_aggregate_examples(self):
        plan = SubgroupPlan(2, np.array([0, 0, 0, 1, 1]), np.array([0, 1]), 2)
        assert aggregate_se(np.array([1.0, 2.0]), plan) == pytest.approx(3 * 1.0 + 2 * 2.0)
        assert aggregate_se(np.array([1.0, 2.0]), plan, weighting="groups") == pytest.approx(3.0)

    def test_unicast_equals_sum_rate(self):
        plan = SubgroupPlan(4, np.arange(4), *assign_pilots(4))
        se = np.array([0.5, 1.0, 2.0, 0.1])
        assert aggregate_se(se_group(se, plan), plan) == pytest.approx(se.sum())

    def test_single_group_k_times_min(self):
        plan = SubgroupPlan(1, np.zeros(5, dtype=int), *assign_pilots(1))
        se = np.array([0.5, 1.0, 2.0, 0.1, 0.4])
        assert aggregate_se(se_group(se, plan), plan) == pytest.approx(5 * 0.1)

    @given(st.lists(st.floats(0.0, 50.0), min_size=2, max_size=8))
    def test_group_rate_bounded_by_members(self, gammas):
        k = len(gammas)
        plan = SubgroupPlan(1, np.zeros(k, dtype=int), *assign_pilots(1))
        se = se_user(np.array(gammas), 1, 200)
        assert se_group(se, plan)[0] <= se.min() + 1e-12


class TestEmpiricalCdf:
    def test_single_sample(self):
        values, probs = empirical_cdf([5.0])
        np.testing.assert_array_equal(values, [5.0])
        np.testing.assert_array_equal(probs, [1.0])

    def test_quartiles(self):
        values, probs = empirical_cdf([1.0, 2.0, 3.0, 4.0])
        assert probs[np.searchsorted(values, 2.0)] == pytest.approx(0.5)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30))
    def test_permutation_invariant(self, samples):
        v1, p1 = empirical_cdf(samples)
        v2, p2 = empirical_cdf(list(reversed(samples)))
        np.testing.assert_array_equal(v1, v2)
        np.testing.assert_array_equal(p1, p2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_cdf([])


class TestClosedFormOracle:
    """Full-pipeline SINR vs analytic Gaussian moments (N=1, CB, uncorrelated)."""

    def run_pipeline(self, betas, sigma_u2, sigma_d2, draws, seed):
        k = len(betas)
        cov = cov_from_matrices([np.array([[b]], dtype=complex) for b in betas])
        plan = SubgroupPlan(k, np.arange(k), *assign_pilots(k))
        stats = composite_statistics(cov, plan, PP, sigma_u2)
        coop = CooperationMap(serves=np.ones((1, k), dtype=bool))
        cfg = PrecoderConfig("cb", pdl_mw=200.0, nu=0.0)
        power = apa_power(stats, coop, cfg)

        big_cov, big_stats = tile_cov(cov, draws), tile_stats(stats, draws)
        big_coop = CooperationMap(serves=np.ones((draws, k), dtype=bool))
        big_power = PowerAllocation(rho=np.broadcast_to(power.rho, (draws, k)))
        real = sample_realization(big_cov, np.random.default_rng(seed))
        obs = observe_pilots(real, plan, PP, sigma_u2, np.random.default_rng(seed + 1))
        est = mmse_estimate(obs, big_stats, plan)
        prec = build_precoders(est, big_stats, big_coop, big_power, cfg)

        # per-draw effective gains (the single-AP case of effective_gains)
        gains = np.einsum("bk,bc->bkc", real.h[:, :, 0].conj(), prec.w[:, :, 0])

        # validate the accumulate() op against the batched sums on a slice
        n_check = 200
        acc = SinrAccumulator.empty(plan, sigma_d2)
        for b in range(n_check):
            accumulate(
                ChannelRealization(h=real.h[b : b + 1]),
                PrecoderSet(w=prec.w[b : b + 1], v=prec.w[b : b + 1],
                            denominator=np.ones((1, k))),
                coop, plan, acc,
            )
        np.testing.assert_allclose(
            acc.sum_gain, gains[:n_check, np.arange(k), np.arange(k)].sum(axis=0), rtol=1e-10
        )
        np.testing.assert_allclose(
            acc.sum_sq, (np.abs(gains[:n_check]) ** 2).sum(axis=0), rtol=1e-10
        )

        full = make_acc(
            gains[:, np.arange(k), np.arange(k)].sum(axis=0),
            (np.abs(gains) ** 2).sum(axis=0),
            draws, sigma_d2, np.arange(k),
        )
        return finalize_sinr(full), power.rho[0]

    def test_two_subgroup_toy_matches_analytics(self):
        betas = [2.0, 0.5]
        sigma_u2, sigma_d2 = 5.0, 40.0
        gamma, rho = self.run_pipeline(betas, sigma_u2, sigma_d2, draws=100_000, seed=50)
        expect = closed_form_sinr_singletons(betas, rho, 2, PP, sigma_u2, sigma_d2)
        np.testing.assert_allclose(gamma, expect, rtol=0.03)

    def test_order_invariance_of_accumulation(self):
        betas = [1.0]
        gamma_fwd, _ = self.run_pipeline(betas, 1.0, 5.0, draws=5_000, seed=51)
        gamma_fwd2, _ = self.run_pipeline(betas, 1.0, 5.0, draws=5_000, seed=51)
        np.testing.assert_allclose(gamma_fwd, gamma_fwd2, rtol=1e-12)


def test_finalize_bundle():
    plan = SubgroupPlan(2, np.array([0, 1]), *assign_pilots(2))
    acc = make_acc([4.0, 2.0], [[4.0, 0.0], [0.0, 2.0]], 2, 1.0, [0, 1])
    res = finalize(acc, plan, tau_c=200)
    assert res.prelog == pytest.approx(1 - 2 / 200)
    assert res.ase == pytest.approx(res.se_group.sum())
    assert np.all(res.gamma >= 0)
