"""UE subgrouping, pilot assignment and AP cooperation clustering.

UEs are partitioned into G multicast subgroups by K-means on their
large-scale fading vectors expressed in dB (linear gains span many orders
of magnitude and would collapse the clustering onto the nearest AP).
Subgroups are mapped round-robin onto tau_p = min(G, cap) pilots, and each
AP then picks, per pilot, the subgroup with the strongest common average
gain; a fallback guarantees every subgroup at least one serving AP.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6


@dataclass(frozen=True)
class SubgroupPlan:
    """Partition of the K UEs into subgroups plus their pilot map."""

    n_groups: int
    assignment: np.ndarray  # (K,) subgroup index per UE
    pilot_of: np.ndarray  # (G,) pilot index per subgroup
    tau_p: int

    def __post_init__(self):
        sizes = np.bincount(self.assignment, minlength=self.n_groups)
        if np.any(sizes == 0):
            raise ConfigurationError("every subgroup must be non-empty")
        if np.any(self.pilot_of < 0) or np.any(self.pilot_of >= self.tau_p):
            raise ConfigurationError("pilot indices must lie in [0, tau_p)")

    @property
    def n_users(self) -> int:
        return self.assignment.shape[0]

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_groups)

    def members(self, g: int) -> np.ndarray:
        return np.nonzero(self.assignment == g)[0]

    def user_pilots(self) -> np.ndarray:
        """Pilot index per UE (K,)."""
        return self.pilot_of[self.assignment]


@dataclass(frozen=True)
class CooperationMap:
    """Which APs serve which subgroups (serves[l, g] true <=> AP l transmits to g)."""

    serves: np.ndarray  # (L, G) bool
    n_overrides: int = 0  # fallback assignments added so no subgroup is orphaned

    def served_by(self, g: int) -> np.ndarray:
        return np.nonzero(self.serves[:, g])[0]

    def duties(self, l: int) -> np.ndarray:
        return np.nonzero(self.serves[l])[0]


def _beta_of(cov_or_beta) -> np.ndarray:
    """Accept either a CovarianceSet or a raw (L, K) gain matrix."""
    beta = getattr(cov_or_beta, "beta", cov_or_beta)
    return np.asarray(beta, dtype=float)


def beta_vectors(cov_or_beta) -> np.ndarray:
    """K-means feature vectors: per-UE large-scale gains in dB, shape (K, L)."""
    return 10.0 * np.log10(_beta_of(cov_or_beta).T)


def _keyed_uniforms(salt: int, features: np.ndarray) -> np.ndarray:
    """One uniform in (0, 1) per point, keyed on the point's VALUE.

    Keying on values instead of indices makes every randomized selection
    commute with permutations of the input rows, so relabeling UEs only
    relabels the resulting partition.
    """
    prefix = salt.to_bytes(8, "big")
    out = np.empty(features.shape[0])
    for i, row in enumerate(features):
        digest = hashlib.sha256(prefix + row.tobytes()).digest()
        out[i] = (int.from_bytes(digest[:8], "big") + 0.5) / 2.0**64
    return out


def _kmeans_pp_init(features: np.ndarray, n_groups: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding via the Gumbel-max trick over D^2 weights."""
    centroids = np.empty((n_groups, features.shape[1]))
    gumbel = -np.log(-np.log(_keyed_uniforms(int(rng.integers(2**62)), features)))
    centroids[0] = features[np.argmax(gumbel)]
    d2 = np.sum((features - centroids[0]) ** 2, axis=1)
    for g in range(1, n_groups):
        gumbel = -np.log(-np.log(_keyed_uniforms(int(rng.integers(2**62)), features)))
        with np.errstate(divide="ignore"):
            score = np.where(d2 > 0, np.log(np.where(d2 > 0, d2, 1.0)), -np.inf) + gumbel
        if np.all(np.isneginf(score)):
            score = gumbel  # every point coincides with a centroid
        centroids[g] = features[np.argmax(score)]
        d2 = np.minimum(d2, np.sum((features - centroids[g]) ** 2, axis=1))
    return centroids


def _assign(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = np.sum((features[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)  # argmin takes the lowest index on ties


def within_cluster_ss(features: np.ndarray, assignment: np.ndarray, centroids: np.ndarray) -> float:
    return float(np.sum((features - centroids[assignment]) ** 2))


def kmeans_partition(
    features: np.ndarray,
    n_groups: int,
    rng: np.random.Generator,
    trace: list | None = None,
) -> np.ndarray:
    """Lloyd iterations with k-means++ seeding, deterministic given ``rng``.

    Runs at most 100 iterations or until the largest centroid movement falls
    below 1e-6.  Empty clusters are repaired by moving in the point farthest
    from its own centroid (lowest point index on ties, donors must keep at
    least one member).  ``trace``, when given, collects the within-cluster
    sum of squares after every assignment step.
    """
    features = np.asarray(features, dtype=float)
    n = features.shape[0]
    if not 1 <= n_groups <= n:
        raise ConfigurationError(f"groups must satisfy 1 <= G <= K, got G={n_groups}, K={n}")
    if n_groups == 1:
        return np.zeros(n, dtype=int)
    if n_groups == n:
        return np.arange(n)

    centroids = _kmeans_pp_init(features, n_groups, rng)
    assignment = _assign(features, centroids)
    for _ in range(KMEANS_MAX_ITER):
        # repair empty clusters before recomputing means
        sizes = np.bincount(assignment, minlength=n_groups)
        for g in np.nonzero(sizes == 0)[0]:
            d2 = np.sum((features - centroids[assignment]) ** 2, axis=1)
            d2[sizes[assignment] < 2] = -np.inf
            donor = int(np.argmax(d2))
            sizes[assignment[donor]] -= 1
            assignment[donor] = g
            sizes[g] = 1
            centroids[g] = features[donor]
        new_centroids = np.stack(
            [features[assignment == g].mean(axis=0) for g in range(n_groups)]
        )
        movement = np.max(np.linalg.norm(new_centroids - centroids, axis=1))
        centroids = new_centroids
        assignment = _assign(features, centroids)
        if trace is not None:
            trace.append(within_cluster_ss(features, assignment, centroids))
        if movement < KMEANS_TOL:
            break
    # final repair so the returned partition never has an empty subgroup
    sizes = np.bincount(assignment, minlength=n_groups)
    for g in np.nonzero(sizes == 0)[0]:
        d2 = np.sum((features - centroids[assignment]) ** 2, axis=1)
        d2[sizes[assignment] < 2] = -np.inf
        donor = int(np.argmax(d2))
        sizes[assignment[donor]] -= 1
        assignment[donor] = g
        sizes[g] = 1
        centroids[g] = features[donor]
    return assignment


def assign_pilots(n_groups: int, tau_p_cap: int = 20) -> tuple[np.ndarray, int]:
    """Round-robin pilot map: tau_p = min(G, cap), pilot_of[g] = g mod tau_p."""
    if n_groups < 1:
        raise ConfigurationError(f"n_groups must be >= 1, got {n_groups}")
    tau_p = min(n_groups, tau_p_cap)
    return np.arange(n_groups) % tau_p, tau_p


def make_plan(
    cov_or_beta, n_groups: int, rng: np.random.Generator, tau_p_cap: int = 20
) -> SubgroupPlan:
    assignment = kmeans_partition(beta_vectors(cov_or_beta), n_groups, rng)
    pilot_of, tau_p = assign_pilots(n_groups, tau_p_cap)
    return SubgroupPlan(n_groups=n_groups, assignment=assignment, pilot_of=pilot_of, tau_p=tau_p)


def common_average_gain(cov_or_beta, plan: SubgroupPlan) -> np.ndarray:
    """Per-(AP, subgroup) average gain over members: (1/|K_g|) sum beta_lk."""
    beta = _beta_of(cov_or_beta)
    gains = np.empty((beta.shape[0], plan.n_groups))
    for g in range(plan.n_groups):
        gains[:, g] = beta[:, plan.members(g)].mean(axis=1)
    return gains


def build_dcc(cov_or_beta, plan: SubgroupPlan) -> CooperationMap:
    """Subgroup-centric dynamic cooperation clustering.

    Per AP and pilot, serve exactly the co-pilot subgroup with the strongest
    common average gain (lowest index on ties).  Any subgroup left without a
    serving AP is then assigned its strongest AP on top of that AP's
    existing duties, so every subgroup's minimum rate stays finite;
    ``n_overrides`` counts these additions.
    """
    gains = common_average_gain(cov_or_beta, plan)
    L = gains.shape[0]
    serves = np.zeros((L, plan.n_groups), dtype=bool)
    for p in range(plan.tau_p):
        candidates = np.nonzero(plan.pilot_of == p)[0]
        if candidates.size == 0:
            continue
        winner = candidates[np.argmax(gains[:, candidates], axis=1)]
        serves[np.arange(L), winner] = True
    n_overrides = 0
    for g in np.nonzero(~serves.any(axis=0))[0]:
        serves[int(np.argmax(gains[:, g])), g] = True
        n_overrides += 1
    return CooperationMap(serves=serves, n_overrides=n_overrides)
