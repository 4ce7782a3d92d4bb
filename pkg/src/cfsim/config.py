"""Run configuration: dataclass, key/value config files, CLI overrides.

Config files are plain ``key = value`` lines with ``#`` comments; lists are
comma separated.  A scenario is either a preset name or ``custom`` with
``n_uniform`` / ``clusters`` (e.g. ``clusters = 2x10, 4x20`` meaning two
hotspots of 10 UEs plus four of 20).  All power keys are dBm or mW exactly
as named.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .channel import PropagationModel
from .errors import ConfigurationError
from .geometry import SCENARIO_PRESETS, AreaSpec, ClusterSpec, ScenarioSpec
from .precoding import VARIANTS


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    area: AreaSpec = field(default_factory=AreaSpec)
    n_aps: int = 100
    n_antennas: tuple[int, ...] = (4,)
    groups: tuple[int, ...] = (1, 10, 100)
    precoders: tuple[str, ...] = ("cb", "ncb", "ecb")
    propagation: PropagationModel = field(default_factory=PropagationModel)
    tau_c: int = 200
    tau_p_cap: int = 20
    pp_mw: float = 100.0
    pdl_mw: float = 200.0
    nu: float = 0.6
    ecb_mc_samples: int = 1000
    n_deployments: int = 500
    n_fading: int = 100
    master_seed: int = 1
    out_dir: str = "results"
    workers: int = 1
    ap_layout: str = "uniform"
    ase_weighting: str = "members"

    @property
    def n_users(self) -> int:
        return self.scenario.n_users

    def validate(self) -> None:
        """Raise ConfigurationError naming the first offending field."""
        if self.n_aps < 1:
            raise ConfigurationError(f"L: must be >= 1, got {self.n_aps}")
        if self.scenario.n_users < 1:
            raise ConfigurationError(f"scenario: {self.scenario.name!r} places no UEs")
        if not self.n_antennas or any(n < 1 for n in self.n_antennas):
            raise ConfigurationError(f"N: antenna counts must be >= 1, got {self.n_antennas}")
        if not self.groups:
            raise ConfigurationError("groups: at least one subgroup count required")
        for g in self.groups:
            if not 1 <= g <= self.n_users:
                raise ConfigurationError(f"groups: need 1 <= G <= K={self.n_users}, got {g}")
        if self.tau_p_cap < 1:
            raise ConfigurationError(f"tau_p_cap: must be >= 1, got {self.tau_p_cap}")
        for g in self.groups:
            tau_p = min(g, self.tau_p_cap)
            if tau_p >= self.tau_c:
                raise ConfigurationError(
                    f"tau_c: tau_p = min(G={g}, cap={self.tau_p_cap}) = {tau_p} must be < tau_c = {self.tau_c}"
                )
        if not self.precoders:
            raise ConfigurationError("precoders: at least one variant required")
        for p in self.precoders:
            if p not in VARIANTS:
                raise ConfigurationError(f"precoders: unknown variant {p!r}, expected one of {VARIANTS}")
        if "ecb" in self.precoders and any(n < 2 for n in self.n_antennas):
            raise ConfigurationError("precoders: ecb requires every antenna count >= 2 (N=1 diverges)")
        if self.pp_mw <= 0:
            raise ConfigurationError(f"pp_mw: must be positive, got {self.pp_mw}")
        if self.pdl_mw <= 0:
            raise ConfigurationError(f"pdl_mw: must be positive, got {self.pdl_mw}")
        if self.ecb_mc_samples < 100:
            raise ConfigurationError(f"ecb_mc_samples: must be >= 100, got {self.ecb_mc_samples}")
        if self.n_deployments < 1:
            raise ConfigurationError(f"n_deployments: must be >= 1, got {self.n_deployments}")
        if self.n_fading < 2:
            raise ConfigurationError(f"n_fading: must be >= 2 to estimate variances, got {self.n_fading}")
        if self.workers < 1:
            raise ConfigurationError(f"workers: must be >= 1, got {self.workers}")
        if self.ase_weighting not in ("members", "groups"):
            raise ConfigurationError(f"ase_weighting: must be 'members' or 'groups', got {self.ase_weighting}")
        if self.ap_layout not in ("uniform", "grid"):
            raise ConfigurationError(f"ap_layout: must be 'uniform' or 'grid', got {self.ap_layout}")


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigurationError(f"{key}: expected a comma-separated integer list, got {raw!r}") from None


def parse_clusters(key: str, raw: str, hotspot_side_m: float) -> tuple[ClusterSpec, ...]:
    """Parse ``2x10, 4x20`` into ClusterSpec batches."""
    specs = []
    for tok in raw.replace(",", " ").split():
        parts = tok.lower().split("x")
        if len(parts) != 2:
            raise ConfigurationError(f"{key}: expected COUNTxUSERS entries, got {tok!r}")
        try:
            count, users = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigurationError(f"{key}: expected COUNTxUSERS entries, got {tok!r}") from None
        specs.append(ClusterSpec(count, users, hotspot_side_m))
    return tuple(specs)


def parse_config_text(text: str) -> dict[str, str]:
    """Key/value pairs from a config file body; later keys win."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value', got {line.rstrip()!r}")
        key, value = stripped.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def resolve_scenario(entries: dict[str, str]) -> ScenarioSpec:
    name = entries.get("scenario", "uniform-100")
    if name != "custom":
        if name not in SCENARIO_PRESETS:
            raise ConfigurationError(
                f"scenario: unknown preset {name!r}; presets are {sorted(SCENARIO_PRESETS)} or 'custom'"
            )
        return SCENARIO_PRESETS[name]
    hotspot_side = float(entries.get("hotspot_side_m", 10.0))
    return ScenarioSpec(
        name=entries.get("scenario_name", "custom"),
        n_uniform=int(entries.get("n_uniform", 0)),
        clusters=parse_clusters("clusters", entries.get("clusters", ""), hotspot_side),
    )


_CONFIG_KEYS = {
    "scenario", "scenario_name", "n_uniform", "clusters", "hotspot_side_m",
    "side_m", "wrap_around", "L", "N", "groups", "precoders",
    "tau_c", "tau_p_cap", "pp_mw", "pdl_mw",
    "noise_ul_dbm", "noise_dl_dbm", "pathloss_ref_db", "pathloss_exp",
    "shadow_std_db", "asd_deg", "correlation_mode", "min_distance_m",
    "nu", "ecb_mc_samples", "n_deployments", "n_fading",
    "master_seed", "out_dir", "workers", "ap_layout", "ase_weighting",
}


def config_from_entries(entries: dict[str, str]) -> RunConfig:
    for key in entries:
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"{key}: unknown config key")
    try:
        scenario = resolve_scenario(entries)
        area = AreaSpec(
            side_m=float(entries.get("side_m", 1000.0)),
            wrap_around=_parse_bool("wrap_around", entries.get("wrap_around", "true")),
        )
        propagation = PropagationModel(
            pathloss_ref_db=float(entries.get("pathloss_ref_db", -30.5)),
            pathloss_exp=float(entries.get("pathloss_exp", 3.67)),
            shadow_std_db=float(entries.get("shadow_std_db", 4.0)),
            noise_ul_dbm=float(entries.get("noise_ul_dbm", -94.0)),
            noise_dl_dbm=float(entries.get("noise_dl_dbm", -94.0)),
            asd_deg=float(entries.get("asd_deg", 15.0)),
            correlation_mode=entries.get("correlation_mode", "local-scattering"),
            min_distance_m=float(entries.get("min_distance_m", 1.0)),
        )
        precoders_raw = entries.get("precoders", "cb,ncb,ecb").strip().lower()
        precoders = VARIANTS if precoders_raw == "all" else tuple(
            tok for tok in precoders_raw.replace(",", " ").split()
        )
        cfg = RunConfig(
            scenario=scenario,
            area=area,
            n_aps=int(entries.get("L", 100)),
            n_antennas=_parse_int_list("N", entries.get("N", "4")),
            groups=_parse_int_list("groups", entries.get("groups", "1,10,100")),
            precoders=precoders,
            propagation=propagation,
            tau_c=int(entries.get("tau_c", 200)),
            tau_p_cap=int(entries.get("tau_p_cap", 20)),
            pp_mw=float(entries.get("pp_mw", 100.0)),
            pdl_mw=float(entries.get("pdl_mw", 200.0)),
            nu=float(entries.get("nu", 0.6)),
            ecb_mc_samples=int(entries.get("ecb_mc_samples", 1000)),
            n_deployments=int(entries.get("n_deployments", 500)),
            n_fading=int(entries.get("n_fading", 100)),
            master_seed=int(entries.get("master_seed", 1)),
            out_dir=entries.get("out_dir", "results"),
            workers=int(entries.get("workers", 1)),
            ap_layout=entries.get("ap_layout", "uniform"),
            ase_weighting=entries.get("ase_weighting", "members"),
        )
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_entries(parse_config_text(fh.read()))


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Replace fields from CLI flags; None values are ignored."""
    updates = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "scenario":
            if value not in SCENARIO_PRESETS:
                raise ConfigurationError(
                    f"scenario: unknown preset {value!r}; presets are {sorted(SCENARIO_PRESETS)}"
                )
            updates["scenario"] = SCENARIO_PRESETS[value]
        elif key == "precoders":
            updates["precoders"] = VARIANTS if value == "all" else (value,)
        else:
            updates[key] = value
    return replace(cfg, **updates) if updates else cfg
