"""Hardening-bound SINR estimation and spectral-efficiency aggregation.

The achievable-SE bound treats the mean effective gain as known at the
receiver:

    gamma_k = |E{a_kg}|^2 / (sum_c E{|a_kc|^2} - |E{a_kg}|^2 + sigma_d^2),
    a_kc = sum_{l serving c} h_lk^H w_lc,

with expectations over small-scale fading and noise, conditioned on the
deployment.  Sample moments are gathered one realization at a time by an
accumulator that merges associatively, so realizations can be processed in
any partition order.

SE_k = (1 - tau_p / tau_c) * log2(1 + gamma_k); each subgroup's rate is its
worst member's; the aggregated SE weights every subgroup rate by the number
of members that decode it (so unicast reduces to the plain sum rate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigurationError
from .grouping import CooperationMap, SubgroupPlan
from .precoding import PrecoderSet


@dataclass
class SinrAccumulator:
    """Running fading-average moments of the effective gains.

    sum_gain[k] accumulates a_k,g(k) for the own subgroup; sum_sq[k, c]
    accumulates |a_kc|^2 for every subgroup c.
    """

    sum_gain: np.ndarray  # (K,) complex
    sum_sq: np.ndarray  # (K, G) real
    n_samples: int
    sigma_d2_mw: float
    own_group: np.ndarray  # (K,)

    @classmethod
    def empty(cls, plan: SubgroupPlan, sigma_d2_mw: float) -> "SinrAccumulator":
        K, G = plan.n_users, plan.n_groups
        return cls(
            sum_gain=np.zeros(K, dtype=complex),
            sum_sq=np.zeros((K, G)),
            n_samples=0,
            sigma_d2_mw=sigma_d2_mw,
            own_group=plan.assignment.copy(),
        )

    def merge(self, other: "SinrAccumulator") -> "SinrAccumulator":
        """Combine statistics gathered over disjoint realization sets."""
        if self.sum_sq.shape != other.sum_sq.shape or self.sigma_d2_mw != other.sigma_d2_mw:
            raise ValueError("accumulators come from different configurations")
        return SinrAccumulator(
            sum_gain=self.sum_gain + other.sum_gain,
            sum_sq=self.sum_sq + other.sum_sq,
            n_samples=self.n_samples + other.n_samples,
            sigma_d2_mw=self.sigma_d2_mw,
            own_group=self.own_group,
        )


def effective_gains(real: ChannelRealization, prec: PrecoderSet, coop: CooperationMap) -> np.ndarray:
    """a_kc = sum_l h_lk^H w_lc for one realization, shape (K, G).

    Non-serving APs contribute nothing: their precoders are exactly zero.
    """
    L, K, N = real.h.shape
    G = prec.w.shape[1]
    h_flat = real.h.transpose(0, 2, 1).reshape(L * N, K)
    w_flat = np.where(coop.serves[..., None], prec.w, 0.0).transpose(0, 2, 1).reshape(L * N, G)
    return h_flat.conj().T @ w_flat


def accumulate(
    real: ChannelRealization,
    prec: PrecoderSet,
    coop: CooperationMap,
    plan: SubgroupPlan,
    acc: SinrAccumulator,
) -> SinrAccumulator:
    """Add one fading realization's effective gains to the running moments."""
    gains = effective_gains(real, prec, coop)
    if gains.shape != acc.sum_sq.shape:
        raise ValueError(f"gain shape {gains.shape} does not match accumulator {acc.sum_sq.shape}")
    acc.sum_gain += gains[np.arange(gains.shape[0]), acc.own_group]
    acc.sum_sq += np.abs(gains) ** 2
    acc.n_samples += 1
    return acc


def finalize_sinr(acc: SinrAccumulator) -> np.ndarray:
    """Per-user SINR from the accumulated moments.

    The unbiased interference term sum_c m2 - |m1|^2 can dip slightly below
    zero at finite sample counts for the own-group entry, so the denominator
    is clamped below at sigma_d^2; converged results are unaffected.
    """
    if acc.n_samples < 2:
        raise RuntimeError(f"need at least 2 realizations to estimate SINR, got {acc.n_samples}")
    mean_gain = acc.sum_gain / acc.n_samples
    second = acc.sum_sq / acc.n_samples
    desired = np.abs(mean_gain) ** 2
    denom = np.maximum(second.sum(axis=1) - desired, 0.0) + acc.sigma_d2_mw
    return desired / denom


def se_user(gamma: np.ndarray, tau_p: int, tau_c: int) -> np.ndarray:
    """SE_k = (1 - tau_p/tau_c) * log2(1 + gamma_k) in bit/s/Hz."""
    if not 0 < tau_p < tau_c:
        raise ConfigurationError(f"need 0 < tau_p < tau_c, got tau_p={tau_p}, tau_c={tau_c}")
    return (1.0 - tau_p / tau_c) * np.log2(1.0 + np.asarray(gamma))


def se_group(se_users: np.ndarray, plan: SubgroupPlan) -> np.ndarray:
    """Subgroup rate = min over members (all decode the common stream)."""
    out = np.empty(plan.n_groups)
    for g in range(plan.n_groups):
        out[g] = np.min(se_users[plan.members(g)])
    return out


def aggregate_se(se_groups: np.ndarray, plan: SubgroupPlan, weighting: str = "members") -> float:
    """Aggregated SE: sum_g |K_g| * SE_g, or the unweighted sum of subgroup
    rates with ``weighting="groups"``."""
    if weighting == "members":
        return float(np.sum(plan.group_sizes * se_groups))
    if weighting == "groups":
        return float(np.sum(se_groups))
    raise ConfigurationError(f"ase weighting must be 'members' or 'groups', got {weighting!r}")


def empirical_cdf(samples) -> tuple[np.ndarray, np.ndarray]:
    """Step CDF at the sorted sample points, p_i = i/n."""
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    return values, np.arange(1, values.size + 1) / values.size


@dataclass
class SeResults:
    """Finalized per-deployment performance figures."""

    gamma: np.ndarray  # (K,)
    se_user: np.ndarray  # (K,)
    se_group: np.ndarray  # (G,)
    ase: float
    prelog: float


def finalize(acc: SinrAccumulator, plan: SubgroupPlan, tau_c: int, weighting: str = "members") -> SeResults:
    gamma = finalize_sinr(acc)
    se_k = se_user(gamma, plan.tau_p, tau_c)
    se_g = se_group(se_k, plan)
    return SeResults(
        gamma=gamma,
        se_user=se_k,
        se_group=se_g,
        ase=aggregate_se(se_g, plan, weighting),
        prelog=1.0 - plan.tau_p / tau_c,
    )
