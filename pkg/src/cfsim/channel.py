"""Large-scale gains, spatial covariance matrices and fading realizations.

Each AP-UE pair gets an N x N Hermitian PSD covariance R whose trace/N is the
large-scale gain beta (log-distance path loss plus log-normal shadowing).
Spatial correlation follows the Gaussian local-scattering model for a
half-wavelength uniform linear array: entry (m, n) of the unit-diagonal
correlation matrix is

    exp(j*pi*(m-n)*sin(theta)) * exp(-(asd^2/2) * (pi*(m-n)*cos(theta))^2)

with theta the nominal bearing and asd the angular standard deviation in
radians (small-angle closed form).  ``uncorrelated`` mode returns beta * I.

All powers are linear milliwatts; dBm fields are converted on access.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .geometry import NetworkGeometry, pairwise_bearings, pairwise_distances

CORRELATION_MODES = ("local-scattering", "uncorrelated")


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class PropagationModel:
    """Path loss, shadowing, noise and spatial-correlation parameters."""

    pathloss_ref_db: float = -30.5
    pathloss_exp: float = 3.67
    shadow_std_db: float = 4.0
    noise_ul_dbm: float = -94.0
    noise_dl_dbm: float = -94.0
    asd_deg: float = 15.0
    correlation_mode: str = "local-scattering"
    min_distance_m: float = 1.0

    def __post_init__(self):
        if self.pathloss_exp <= 0:
            raise ConfigurationError(f"pathloss_exp must be positive, got {self.pathloss_exp}")
        if self.shadow_std_db < 0:
            raise ConfigurationError(f"shadow_std_db must be >= 0, got {self.shadow_std_db}")
        if self.asd_deg < 0:
            raise ConfigurationError(f"asd_deg must be >= 0, got {self.asd_deg}")
        if self.correlation_mode not in CORRELATION_MODES:
            raise ConfigurationError(
                f"correlation_mode must be one of {CORRELATION_MODES}, got {self.correlation_mode!r}"
            )
        if self.min_distance_m <= 0:
            raise ConfigurationError(f"min_distance_m must be positive, got {self.min_distance_m}")

    @property
    def noise_ul_mw(self) -> float:
        return dbm_to_mw(self.noise_ul_dbm)

    @property
    def noise_dl_mw(self) -> float:
        return dbm_to_mw(self.noise_dl_dbm)


@dataclass
class CovarianceSet:
    """Per-pair covariance matrices R (L,K,N,N) and gains beta (L,K).

    The symmetric square-root factors used for sampling are computed once on
    first use and cached (eigendecomposition with negative eigenvalues
    clamped at zero, tolerance 1e-10 * trace).
    """

    R: np.ndarray
    beta: np.ndarray
    _factors: np.ndarray | None = None

    @property
    def n_antennas(self) -> int:
        return self.R.shape[-1]

    def factors(self) -> np.ndarray:
        if self._factors is None:
            self._factors = covariance_factor(self.R)
        return self._factors


@dataclass(frozen=True)
class ChannelRealization:
    """One correlated Rayleigh fading draw: h (L,K,N) complex."""

    h: np.ndarray


def large_scale_gain(d, model: PropagationModel, rng: np.random.Generator):
    """Linear gain 10^(beta_dB/10), beta_dB = ref - 10*exp*log10(d) + shadowing.

    ``d`` may be a scalar or an array; one independent shadowing sample is
    drawn per entry even when the standard deviation is zero, so the stream
    position does not depend on the model.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive; apply the minimum-distance floor first")
    shadow = rng.normal(0.0, model.shadow_std_db, size=d.shape)
    beta_db = model.pathloss_ref_db - 10.0 * model.pathloss_exp * np.log10(d) + shadow
    return 10.0 ** (beta_db / 10.0)


def scattering_correlation(theta, asd_rad: float, n_antennas: int) -> np.ndarray:
    """Unit-diagonal local-scattering correlation, batched over theta."""
    offsets = np.arange(n_antennas)[:, None] - np.arange(n_antennas)[None, :]
    theta = np.asarray(theta, dtype=float)[..., None, None]
    phase = np.exp(1j * np.pi * offsets * np.sin(theta))
    damping = np.exp(-0.5 * (asd_rad * np.pi * offsets * np.cos(theta)) ** 2)
    return phase * damping


def spatial_covariance(theta: float, beta: float, n_antennas: int, model: PropagationModel) -> np.ndarray:
    """N x N Hermitian PSD covariance with trace beta * N."""
    if n_antennas < 1:
        raise ConfigurationError(f"n_antennas must be >= 1, got {n_antennas}")
    if model.correlation_mode == "uncorrelated":
        return beta * np.eye(n_antennas, dtype=complex)
    corr = scattering_correlation(theta, np.deg2rad(model.asd_deg), n_antennas)
    return beta * corr


def build_covariances(
    geom: NetworkGeometry,
    model: PropagationModel,
    n_antennas: int,
    rng: np.random.Generator | None = None,
    beta: np.ndarray | None = None,
) -> CovarianceSet:
    """Covariances for every AP-UE pair of a deployment.

    Distance -> large-scale gain -> spatial covariance at the wrap-aware
    bearing from AP to UE.  A precomputed ``beta`` (L,K) may be passed to
    reuse one shadowing draw across several antenna counts; otherwise the
    gains are drawn here from ``rng``.
    """
    dist = pairwise_distances(geom.ap_positions, geom.ue_positions, geom.area)
    dist = np.maximum(dist, model.min_distance_m)
    if beta is None:
        if rng is None:
            raise ValueError("build_covariances needs an rng when beta is not supplied")
        beta = large_scale_gain(dist, model, rng)
    if model.correlation_mode == "uncorrelated":
        R = beta[..., None, None] * np.eye(n_antennas, dtype=complex)
    else:
        theta = pairwise_bearings(geom.ap_positions, geom.ue_positions, geom.area)
        corr = scattering_correlation(theta, np.deg2rad(model.asd_deg), n_antennas)
        R = beta[..., None, None] * corr
    return CovarianceSet(R=R, beta=beta)


def covariance_factor(R: np.ndarray) -> np.ndarray:
    """Symmetric square root F with F @ F^H = R, batched over leading axes.

    Eigendecomposition based so rank-deficient matrices (zero angular spread)
    factor cleanly; eigenvalues below -1e-10 * trace indicate a non-PSD input.
    """
    R = np.asarray(R)
    if not np.allclose(R, np.conj(np.swapaxes(R, -1, -2)), atol=1e-10 * (1 + np.abs(R).max())):
        raise ValueError("covariance matrices must be Hermitian")
    w, v = np.linalg.eigh(R)
    tol = -1e-10 * np.maximum(np.trace(R, axis1=-2, axis2=-1).real, 1e-300)[..., None]
    if np.any(w < tol):
        raise ValueError("covariance matrices must be positive semi-definite")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def sample_realization(cov: CovarianceSet, rng: np.random.Generator) -> ChannelRealization:
    """One independent CN(0, R_lk) draw per AP-UE pair."""
    F = cov.factors()
    shape = cov.R.shape[:-1]  # (L, K, N)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    h = np.einsum("lkmn,lkn->lkm", F, z)
    return ChannelRealization(h=h)
