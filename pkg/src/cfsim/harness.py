"""Experiment orchestration: deployment loop, fading loop, sweeps, output.

One deployment is a pure function of (config, deployment index): geometry,
shadowing, subgroup plans, cooperation maps, statistics and powers are
derived from per-purpose seed streams, then the fading loop accumulates
SINR moments for every (N, G, precoder) combination.  All precoder variants
and all subgroup counts see the same fading realizations (paired
comparison); deployments are independent work units, so running them on a
pool of workers yields byte-identical output to a serial run.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .channel import build_covariances, large_scale_gain, sample_realization
from .config import RunConfig
from .estimation import composite_statistics, mmse_estimate, observe_pilots
from .geometry import generate_geometry, pairwise_distances
from .grouping import SubgroupPlan, assign_pilots, beta_vectors, build_dcc, kmeans_partition
from .performance import SinrAccumulator, accumulate, finalize
from .precoding import PrecoderConfig, apa_power, build_precoders, ecb_offline_factor
from .seeding import derive_rng, derive_seed

CSV_HEADER = (
    "scenario,precoder,G,N,deployment,seed,ase_bits_per_hz,se_group_min,se_group_median"
)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    precoder: str
    n_groups: int
    n_antennas: int
    deployment: int
    seed: int
    ase_bits_per_hz: float
    se_group_min: float
    se_group_median: float

    def as_csv(self) -> list:
        return [
            self.scenario,
            self.precoder,
            self.n_groups,
            self.n_antennas,
            self.deployment,
            self.seed,
            repr(float(self.ase_bits_per_hz)),
            repr(float(self.se_group_min)),
            repr(float(self.se_group_median)),
        ]


@dataclass
class RunResult:
    rows: list[ResultRow]
    csv_path: Path | None = None
    manifest_path: Path | None = None


def run_deployment(cfg: RunConfig, d: int) -> list[ResultRow]:
    """Simulate one deployment across the (N, G, precoder) sweep."""
    seed = cfg.master_seed
    dep_seed = derive_seed(seed, ("deployment", d))
    geom = generate_geometry(
        cfg.n_aps,
        cfg.scenario,
        cfg.area,
        ap_rng=derive_rng(seed, "aps", d),
        ue_rng=derive_rng(seed, "ues", d),
        ap_layout=cfg.ap_layout,
    )
    dist = pairwise_distances(geom.ap_positions, geom.ue_positions, geom.area)
    dist = np.maximum(dist, cfg.propagation.min_distance_m)
    beta = large_scale_gain(dist, cfg.propagation, derive_rng(seed, "shadow", d))
    features = beta_vectors(beta)

    # subgroup plans and cooperation maps depend on beta only: shared across N
    plans: dict[int, SubgroupPlan] = {}
    coops = {}
    for G in cfg.groups:
        assignment = kmeans_partition(features, G, derive_rng(seed, "kmeans", d, G))
        pilot_of, tau_p = assign_pilots(G, cfg.tau_p_cap)
        plans[G] = SubgroupPlan(n_groups=G, assignment=assignment, pilot_of=pilot_of, tau_p=tau_p)
        coops[G] = build_dcc(beta, plans[G])

    sigma_u2 = cfg.propagation.noise_ul_mw
    sigma_d2 = cfg.propagation.noise_dl_mw
    pcfgs = {
        v: PrecoderConfig(v, pdl_mw=cfg.pdl_mw, nu=cfg.nu, ecb_mc_samples=cfg.ecb_mc_samples)
        for v in cfg.precoders
    }

    rows: list[ResultRow] = []
    for N in cfg.n_antennas:
        cov = build_covariances(geom, cfg.propagation, N, beta=beta)
        stats = {G: composite_statistics(cov, plans[G], cfg.pp_mw, sigma_u2) for G in cfg.groups}
        powers = {G: apa_power(stats[G], coops[G], pcfgs[cfg.precoders[0]]) for G in cfg.groups}
        ecb_factors = {}
        if "ecb" in cfg.precoders:
            for G in cfg.groups:
                ecb_factors[G] = ecb_offline_factor(
                    stats[G], plans[G], coops[G], pcfgs["ecb"], derive_rng(seed, "ecb", d, N, G)
                )
        accs = {
            (G, v): SinrAccumulator.empty(plans[G], sigma_d2)
            for G in cfg.groups
            for v in cfg.precoders
        }
        for r in range(cfg.n_fading):
            real = sample_realization(cov, derive_rng(seed, "fading", d, N, r))
            for G in cfg.groups:
                obs = observe_pilots(
                    real, plans[G], cfg.pp_mw, sigma_u2, derive_rng(seed, "noise", d, N, G, r)
                )
                est = mmse_estimate(obs, stats[G], plans[G])
                for v in cfg.precoders:
                    prec = build_precoders(
                        est, stats[G], coops[G], powers[G], pcfgs[v], ecb_factors.get(G)
                    )
                    accumulate(real, prec, coops[G], plans[G], accs[(G, v)])
        for G in cfg.groups:
            for v in cfg.precoders:
                res = finalize(accs[(G, v)], plans[G], cfg.tau_c, cfg.ase_weighting)
                rows.append(
                    ResultRow(
                        scenario=cfg.scenario.name,
                        precoder=v,
                        n_groups=G,
                        n_antennas=N,
                        deployment=d,
                        seed=dep_seed,
                        ase_bits_per_hz=res.ase,
                        se_group_min=float(np.min(res.se_group)),
                        se_group_median=float(np.median(res.se_group)),
                    )
                )
    return rows


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def manifest_dict(cfg: RunConfig) -> dict:
    return {
        "tool": "cfsim",
        "version": __version__,
        "config": asdict(cfg),
        "deployment_seeds": [
            derive_seed(cfg.master_seed, ("deployment", d)) for d in range(cfg.n_deployments)
        ],
    }


def run(cfg: RunConfig, progress=None, write_files: bool = True) -> RunResult:
    """Execute the full experiment and (optionally) persist CSV + manifest.

    Output is a pure function of the config: rows appear in (deployment, N,
    G, precoder) order whatever the worker count.
    """
    cfg.validate()
    worker = partial(run_deployment, cfg)
    rows: list[ResultRow] = []
    if cfg.workers == 1:
        iterator = map(worker, range(cfg.n_deployments))
    else:
        executor = ProcessPoolExecutor(max_workers=cfg.workers)
        iterator = executor.map(worker, range(cfg.n_deployments))
    done = 0
    for dep_rows in iterator:
        rows.extend(dep_rows)
        done += 1
        if progress is not None:
            progress(done, cfg.n_deployments)
    if cfg.workers > 1:
        executor.shutdown()

    result = RunResult(rows=rows)
    if write_files:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        result.csv_path = out_dir / "results.csv"
        result.csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
        result.manifest_path = out_dir / "manifest.json"
        result.manifest_path.write_text(
            json.dumps(manifest_dict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return result
