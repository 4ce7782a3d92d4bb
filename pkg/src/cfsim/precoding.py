"""Distributed conjugate-beamforming precoders and per-AP power allocation.

Every AP builds its transmit vector for subgroup g locally as

    w_lg = sqrt(rho_lg) * v_lg / sqrt(E{||v_lg||^2}),

which gives E{||w_lg||^2} = rho_lg exactly.  The three beamforming
directions, all derived from the local composite estimate hhat:

    cb   v = hhat                       E{||v||^2} = tr(K_g^2 R^g Gamma^-1 R^g)
    ncb  v = hhat / ||hhat||            E{||v||^2} = 1 (per-realization power)
    ecb  v = hhat / ||hhat||^2          E{||v||^2} = E{||hhat||^-2}, sampled offline

The ecb expectation has no closed form and diverges for N = 1, so it is
estimated once per deployment by Monte Carlo and N >= 2 is enforced.

Powers follow the adaptive rule rho_lg = Pdl * (tr R_l^g)^nu /
sum_{c served by l} (tr R_l^c)^nu, so every serving AP spends its full
budget and nu trades fairness against performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import covariance_factor
from .errors import ConfigurationError
from .estimation import CompositeStatistics, EstimateSet
from .grouping import CooperationMap, SubgroupPlan

VARIANTS = ("cb", "ncb", "ecb")

# ||hhat|| below this is treated as an exact zero (probability-zero event);
# the direction becomes the zero vector instead of blowing up.
NORM_FLOOR = 1e-30


@dataclass(frozen=True)
class PrecoderConfig:
    variant: str
    pdl_mw: float = 200.0
    nu: float = 0.6
    ecb_mc_samples: int = 1000

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"precoder variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.pdl_mw <= 0:
            raise ConfigurationError(f"pdl_mw must be positive, got {self.pdl_mw}")
        if self.ecb_mc_samples < 100:
            raise ConfigurationError(f"ecb_mc_samples must be >= 100, got {self.ecb_mc_samples}")


@dataclass(frozen=True)
class PowerAllocation:
    rho: np.ndarray  # (L, G) mW, zero where the AP does not serve the subgroup


@dataclass
class PrecoderSet:
    """Transmit vectors w (L, G, N) plus the pieces they were built from."""

    w: np.ndarray
    v: np.ndarray  # beamforming directions before normalization
    denominator: np.ndarray  # (L, G) statistical normalization sqrt(E||v||^2)
    zero_norm_count: int = 0


def apa_power(stats: CompositeStatistics, coop: CooperationMap, cfg: PrecoderConfig) -> PowerAllocation:
    """Adaptive power allocation over each AP's served subgroups.

    An AP with no duties gets an all-zero row; serving APs split pdl_mw
    exactly (nu = 0 gives the exact equal split).
    """
    traces = np.einsum("lgnn->lg", stats.Rg).real
    weights = np.where(coop.serves, traces**cfg.nu, 0.0)
    row_sums = weights.sum(axis=1, keepdims=True)
    return PowerAllocation(rho=cfg.pdl_mw * weights / np.where(row_sums > 0, row_sums, 1.0))


def direction(variant: str, hhat: np.ndarray) -> np.ndarray:
    """Beamforming direction for a single estimate vector."""
    if variant == "cb":
        return np.array(hhat, copy=True)
    norm = np.linalg.norm(hhat)
    if norm < NORM_FLOOR:
        return np.zeros_like(hhat)
    if variant == "ncb":
        return hhat / norm
    if variant == "ecb":
        return hhat / norm**2
    raise ConfigurationError(f"unknown precoder variant {variant!r}")


def _directions(variant: str, hhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched directions (L, G, N) plus the mask of zero-norm estimates."""
    if variant == "cb":
        return hhat, np.zeros(hhat.shape[:2], dtype=bool)
    norms = np.linalg.norm(hhat, axis=-1)
    tiny = norms < NORM_FLOOR
    safe = np.where(tiny, 1.0, norms)
    power = 1 if variant == "ncb" else 2
    v = hhat / safe[..., None] ** power
    v[tiny] = 0.0
    return v, tiny


def normalization_denominator(
    variant: str, stats: CompositeStatistics, ecb_inv_norm_mean: np.ndarray | None = None
) -> np.ndarray:
    """sqrt(E{||v_lg||^2}) per (AP, subgroup); inf marks degenerate pairs
    whose precoder is forced to zero."""
    if variant == "cb":
        msn = stats.mean_sq_norm
        return np.where(msn > 0, np.sqrt(np.where(msn > 0, msn, 1.0)), np.inf)
    if variant == "ncb":
        return np.ones_like(stats.mean_sq_norm)
    if variant == "ecb":
        if ecb_inv_norm_mean is None:
            raise ConfigurationError("ecb requires the offline E{||hhat||^-2} factor")
        f = ecb_inv_norm_mean
        return np.where(f > 0, np.sqrt(np.where(f > 0, f, 1.0)), np.inf)
    raise ConfigurationError(f"unknown precoder variant {variant!r}")


def ecb_offline_factor(
    stats: CompositeStatistics,
    plan: SubgroupPlan,
    coop: CooperationMap,
    cfg: PrecoderConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monte Carlo E{||hhat_l^g||^-2} for every served pair, once per deployment.

    Estimates are drawn from their exact distribution CN(0, K_g^2 R^g
    Gamma^-1 R^g).  The expectation diverges for N = 1 (inverse chi-square
    with one complex dimension), hence the guard.
    """
    L, G, N = stats.shape
    if N < 2:
        raise ConfigurationError("ecb requires n_antennas >= 2: E{||hhat||^-2} diverges for N = 1")
    out = np.zeros((L, G))
    n_samples = cfg.ecb_mc_samples
    for l, g in zip(*np.nonzero(coop.serves)):
        q = plan.group_sizes[g] * (stats.estimator[l, g] @ stats.Rg[l, g])
        q = (q + q.conj().T) / 2.0
        if np.trace(q).real <= 0:
            continue  # degenerate pair, precoder forced to zero downstream
        factor = covariance_factor(q)
        z = (rng.standard_normal((N, n_samples)) + 1j * rng.standard_normal((N, n_samples))) / np.sqrt(2.0)
        norms2 = np.sum(np.abs(factor @ z) ** 2, axis=0)
        out[l, g] = float(np.mean(1.0 / norms2))
    return out


def build_precoders(
    est: EstimateSet,
    stats: CompositeStatistics,
    coop: CooperationMap,
    power: PowerAllocation,
    cfg: PrecoderConfig,
    ecb_inv_norm_mean: np.ndarray | None = None,
) -> PrecoderSet:
    """w_lg = sqrt(rho_lg) * v_lg / sqrt(E||v_lg||^2); zero when not serving."""
    v, tiny = _directions(cfg.variant, est.hhat)
    denom = normalization_denominator(cfg.variant, stats, ecb_inv_norm_mean)
    w = (np.sqrt(power.rho) / denom)[..., None] * v
    w = np.where(coop.serves[..., None], w, 0.0)
    return PrecoderSet(w=w, v=v, denominator=denom, zero_norm_count=int(np.sum(tiny & coop.serves)))
