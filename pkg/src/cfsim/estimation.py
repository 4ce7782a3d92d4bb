"""Uplink pilot observation and composite MMSE channel estimation.

All UEs of a subgroup send the same pilot, so each AP can only estimate the
composite channel

    h_l^g = sqrt(tau_p * Pp) / K_g * sum_{k in K_g} h_lk  ~  CN(0, R_l^g),
    R_l^g = tau_p * Pp / K_g^2 * sum_{k in K_g} R_lk.

Projecting the received pilot block onto pilot p gives, per AP,

    y_l^p = sqrt(tau_p * Pp) * sum_{i on pilot p} h_li + n,   n ~ CN(0, sigma_u^2 I),

identical for every subgroup sharing the pilot (pilot contamination).  The
MMSE estimate is hhat_l^g = K_g * R_l^g * Gamma_lp^{-1} * y_l^p with
Gamma_lp = tau_p * Pp * sum_{i on pilot p} R_li + sigma_u^2 I.  Gamma carries
an AP index here: its summands are AP-dependent, so a per-AP matrix is the
only dimensionally consistent reading.

The full tau_p-length pilot block is never materialized; projecting
orthonormal pilots leaves exactly one CN(0, sigma_u^2 I) noise vector per
(AP, pilot), which is what gets drawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ChannelRealization, CovarianceSet
from .errors import ConfigurationError
from .grouping import SubgroupPlan


@dataclass
class CompositeStatistics:
    """Deployment-level second-order statistics for one subgroup plan.

    estimator[l, g] = K_g * R_l^g * Gamma_lp^{-1} (computed with Cholesky
    solves, no explicit inverse) turns projected observations into MMSE
    estimates; mean_sq_norm[l, g] = E{||hhat_l^g||^2} in closed form.
    """

    Rg: np.ndarray  # (L, G, N, N) composite covariances
    Gamma: np.ndarray  # (L, P, N, N) observation covariances per pilot
    mean_sq_norm: np.ndarray  # (L, G) real
    estimator: np.ndarray  # (L, G, N, N)
    tau_p_pp_mw: float  # tau_p * Pp, the pilot-energy scale

    @property
    def shape(self) -> tuple[int, int, int]:
        L, G, N, _ = self.Rg.shape
        return L, G, N


@dataclass(frozen=True)
class PilotObservation:
    """Projected pilot observations y[l, g] for one fading realization.

    Co-pilot subgroups at the same AP hold identical vectors by construction.
    """

    y: np.ndarray  # (L, G, N)


@dataclass
class EstimateSet:
    """Composite MMSE estimates, optionally alongside the true composites."""

    hhat: np.ndarray  # (L, G, N)
    composite_true: np.ndarray | None = None


def _group_covariance_sums(cov: CovarianceSet, plan: SubgroupPlan) -> np.ndarray:
    L, _, N, _ = cov.R.shape
    sums = np.zeros((L, plan.n_groups, N, N), dtype=complex)
    for g in range(plan.n_groups):
        sums[:, g] = cov.R[:, plan.members(g)].sum(axis=1)
    return sums


def composite_statistics(
    cov: CovarianceSet, plan: SubgroupPlan, pp_mw: float, sigma_u2_mw: float
) -> CompositeStatistics:
    """R_l^g, Gamma_lp, the MMSE estimator matrices and E{||hhat||^2}."""
    if sigma_u2_mw < 0:
        raise ConfigurationError(f"sigma_u2_mw must be >= 0, got {sigma_u2_mw}")
    if pp_mw <= 0:
        raise ConfigurationError(f"pp_mw must be positive, got {pp_mw}")
    pilot_load = np.bincount(plan.pilot_of, minlength=plan.tau_p)
    if sigma_u2_mw == 0 and np.any(pilot_load > 1):
        # the noiseless mode exists for exact limit tests only
        raise ConfigurationError("sigma_u2_mw = 0 requires contamination-free pilots")

    L, _, N, _ = cov.R.shape
    G, P = plan.n_groups, plan.tau_p
    tp_pp = plan.tau_p * pp_mw
    sizes = plan.group_sizes

    group_sums = _group_covariance_sums(cov, plan)
    Rg = group_sums * (tp_pp / sizes.astype(float) ** 2)[None, :, None, None]
    pilot_sums = np.zeros((L, P, N, N), dtype=complex)
    for g in range(G):
        pilot_sums[:, plan.pilot_of[g]] += group_sums[:, g]
    Gamma = tp_pp * pilot_sums + sigma_u2_mw * np.eye(N)

    estimator = np.empty((L, G, N, N), dtype=complex)
    mean_sq_norm = np.empty((L, G))
    for l in range(L):
        chol = [cho_factor(Gamma[l, p], lower=True) for p in range(P)]
        for g in range(G):
            x = cho_solve(chol[plan.pilot_of[g]], Rg[l, g])  # Gamma^{-1} R_l^g
            estimator[l, g] = sizes[g] * x.conj().T
            mean_sq_norm[l, g] = sizes[g] ** 2 * np.trace(Rg[l, g] @ x).real
    return CompositeStatistics(
        Rg=Rg, Gamma=Gamma, mean_sq_norm=mean_sq_norm, estimator=estimator, tau_p_pp_mw=tp_pp
    )


def observe_pilots(
    real: ChannelRealization,
    plan: SubgroupPlan,
    pp_mw: float,
    sigma_u2_mw: float,
    rng: np.random.Generator,
) -> PilotObservation:
    """Projected pilot observations for one fading realization.

    Noise is drawn once per (AP, pilot) and shared by the co-pilot
    subgroups, matching the physical projection of a single received block.
    """
    L, K, N = real.h.shape
    scale = np.sqrt(plan.tau_p * pp_mw)
    indicator = np.zeros((K, plan.tau_p))
    indicator[np.arange(K), plan.user_pilots()] = 1.0
    y_pilot = scale * np.einsum("lkn,kp->lpn", real.h, indicator)
    noise = (
        rng.standard_normal((L, plan.tau_p, N)) + 1j * rng.standard_normal((L, plan.tau_p, N))
    ) * np.sqrt(sigma_u2_mw / 2.0)
    y_pilot = y_pilot + noise
    return PilotObservation(y=y_pilot[:, plan.pilot_of, :])


def mmse_estimate(obs: PilotObservation, stats: CompositeStatistics, plan: SubgroupPlan) -> EstimateSet:
    """hhat[l, g] = K_g * R_l^g * Gamma^{-1} * y[l, g], linear in y."""
    if obs.y.shape[1] != plan.n_groups or stats.estimator.shape[1] != plan.n_groups:
        raise ValueError(
            f"observation/statistics cover {obs.y.shape[1]}/{stats.estimator.shape[1]} "
            f"subgroups, plan has {plan.n_groups}"
        )
    hhat = np.einsum("lgmn,lgn->lgm", stats.estimator, obs.y)
    return EstimateSet(hhat=hhat)


def true_composite(real: ChannelRealization, plan: SubgroupPlan, pp_mw: float) -> np.ndarray:
    """The composite channels h_l^g (L, G, N) for one realization."""
    K = real.h.shape[1]
    indicator = np.zeros((K, plan.n_groups))
    indicator[np.arange(K), plan.assignment] = 1.0
    sums = np.einsum("lkn,kg->lgn", real.h, indicator)
    scale = np.sqrt(plan.tau_p * pp_mw) / plan.group_sizes.astype(float)
    return sums * scale[None, :, None]
