"""AP and UE placement on a wrap-around square, plus the toroidal metric.

The coverage area is a square of side ``side_m`` with optional wrap-around,
so the network behaves like a torus and has no boundary effects.  Distances
and bearings use the minimum-image convention, which on a torus equals the
minimum over the nine shifted copies of the target point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class AreaSpec:
    """Square coverage area."""

    side_m: float = 1000.0
    wrap_around: bool = True

    def __post_init__(self):
        if self.side_m <= 0:
            raise ConfigurationError(f"side_m must be positive, got {self.side_m}")


@dataclass(frozen=True)
class ClusterSpec:
    """A batch of identical hotspots: ``count`` squares holding
    ``users_per_cluster`` UEs each."""

    count: int
    users_per_cluster: int
    hotspot_side_m: float = 10.0


@dataclass(frozen=True)
class ScenarioSpec:
    """UE composition: a uniform component plus zero or more hotspot batches."""

    name: str
    n_uniform: int = 0
    clusters: tuple[ClusterSpec, ...] = ()

    def __post_init__(self):
        if self.n_uniform < 0:
            raise ConfigurationError(f"n_uniform must be >= 0, got {self.n_uniform}")
        for c in self.clusters:
            if c.count < 0 or c.users_per_cluster < 0:
                raise ConfigurationError(f"cluster counts must be >= 0, got {c}")
            if c.hotspot_side_m <= 0:
                raise ConfigurationError(
                    f"hotspot_side_m must be positive, got {c.hotspot_side_m}"
                )

    @property
    def n_users(self) -> int:
        return self.n_uniform + sum(c.count * c.users_per_cluster for c in self.clusters)


@dataclass(frozen=True)
class NetworkGeometry:
    """One deployment: AP and UE coordinates in meters."""

    ap_positions: np.ndarray  # (L, 2)
    ue_positions: np.ndarray  # (K, 2)
    area: AreaSpec
    scenario: ScenarioSpec

    @property
    def n_aps(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def n_users(self) -> int:
        return self.ue_positions.shape[0]


# Named deployments used throughout the evaluation.  The uniform case is the
# degenerate clustered one (every cluster holds a single UE), so it is stored
# as a plain uniform draw.  Heterogeneous mixes all sum to 500 UEs.
SCENARIO_PRESETS: dict[str, ScenarioSpec] = {
    "uniform-100": ScenarioSpec("uniform-100", n_uniform=100),
    "clustered-10x10": ScenarioSpec("clustered-10x10", clusters=(ClusterSpec(10, 10),)),
    "clustered-1x100": ScenarioSpec("clustered-1x100", clusters=(ClusterSpec(1, 100),)),
    "het-1": ScenarioSpec(
        "het-1",
        n_uniform=10,
        clusters=(ClusterSpec(2, 10), ClusterSpec(4, 20), ClusterSpec(3, 30), ClusterSpec(6, 50)),
    ),
    "het-2": ScenarioSpec(
        "het-2",
        n_uniform=20,
        clusters=(ClusterSpec(2, 10), ClusterSpec(3, 20), ClusterSpec(5, 30), ClusterSpec(5, 50)),
    ),
    "het-3": ScenarioSpec(
        "het-3",
        n_uniform=100,
        clusters=(ClusterSpec(5, 10), ClusterSpec(5, 20), ClusterSpec(5, 30), ClusterSpec(2, 50)),
    ),
}


def place_aps(n_aps: int, area: AreaSpec, rng: np.random.Generator, layout: str = "uniform") -> np.ndarray:
    """Draw AP positions, i.i.d. uniform over the square by default.

    ``layout="grid"`` places the nearest square grid instead (debug aid);
    any leftover APs beyond the grid are drawn uniformly.
    """
    if n_aps < 1:
        raise ConfigurationError(f"n_aps must be >= 1, got {n_aps}")
    if layout == "uniform":
        return rng.uniform(0.0, area.side_m, size=(n_aps, 2))
    if layout == "grid":
        side = int(np.floor(np.sqrt(n_aps)))
        step = area.side_m / side
        xs, ys = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
        pts = np.column_stack([(xs.ravel() + 0.5) * step, (ys.ravel() + 0.5) * step])
        extra = n_aps - side * side
        if extra > 0:
            pts = np.vstack([pts, rng.uniform(0.0, area.side_m, size=(extra, 2))])
        return pts
    raise ConfigurationError(f"ap_layout must be 'uniform' or 'grid', got {layout!r}")


def place_ues(scenario: ScenarioSpec, area: AreaSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw UE positions: uniform component first, then each hotspot batch.

    Hotspot centers are drawn so the whole hotspot square stays inside the
    area (no wrap-split hotspots); users are uniform inside their square.
    """
    if scenario.n_users < 1:
        raise ConfigurationError(f"scenario {scenario.name!r} places no UEs")
    points = []
    if scenario.n_uniform > 0:
        points.append(rng.uniform(0.0, area.side_m, size=(scenario.n_uniform, 2)))
    for c in scenario.clusters:
        if c.hotspot_side_m > area.side_m:
            raise ConfigurationError(
                f"hotspot_side_m {c.hotspot_side_m} exceeds area side {area.side_m}"
            )
        half = c.hotspot_side_m / 2.0
        for _ in range(c.count):
            center = rng.uniform(half, area.side_m - half, size=2)
            points.append(center + rng.uniform(-half, half, size=(c.users_per_cluster, 2)))
    return np.concatenate(points, axis=0)


def _min_image(delta: np.ndarray, area: AreaSpec) -> np.ndarray:
    if area.wrap_around:
        delta = delta - area.side_m * np.round(delta / area.side_m)
    return delta


def distance(p, q, area: AreaSpec) -> float:
    """Distance between two points, toroidal when the area wraps around."""
    delta = _min_image(np.asarray(q, dtype=float) - np.asarray(p, dtype=float), area)
    return float(np.hypot(delta[0], delta[1]))


def pairwise_distances(a: np.ndarray, b: np.ndarray, area: AreaSpec) -> np.ndarray:
    """All distances between point sets ``a`` (M,2) and ``b`` (N,2) -> (M,N)."""
    delta = _min_image(b[None, :, :] - a[:, None, :], area)
    return np.hypot(delta[..., 0], delta[..., 1])


def pairwise_bearings(a: np.ndarray, b: np.ndarray, area: AreaSpec) -> np.ndarray:
    """Bearing (radians) of the shortest displacement from each ``a`` to each ``b``."""
    delta = _min_image(b[None, :, :] - a[:, None, :], area)
    return np.arctan2(delta[..., 1], delta[..., 0])


def generate_geometry(
    n_aps: int,
    scenario: ScenarioSpec,
    area: AreaSpec,
    ap_rng: np.random.Generator,
    ue_rng: np.random.Generator,
    ap_layout: str = "uniform",
) -> NetworkGeometry:
    return NetworkGeometry(
        ap_positions=place_aps(n_aps, area, ap_rng, layout=ap_layout),
        ue_positions=place_ues(scenario, area, ue_rng),
        area=area,
        scenario=scenario,
    )
