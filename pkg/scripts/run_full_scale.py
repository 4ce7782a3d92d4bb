#!/usr/bin/env python3
"""Full-size evaluation runs: uniform / clustered CDFs and heterogeneous G sweeps.

At full scale (L=100, K=100 or 500, 500 deployments x 100 fading
realizations, N in {4, 8, 16}) this is hours of compute; --deployments,
--fading and --antennas scale it down for exploratory runs.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[1] / "src"))

from cfsim.config import RunConfig, apply_overrides
from cfsim.geometry import SCENARIO_PRESETS

from cfsim.harness import run

CDF_SCENARIOS = ("uniform-100", "clustered-10x10", "clustered-1x100")
SWEEP_SCENARIOS = ("het-1", "het-2", "het-3")
SWEEP_GROUPS = (1, 2, 5, 10, 25, 50, 100, 250, 500)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/full", help="output root")
    parser.add_argument("--deployments", type=int, default=500)
    parser.add_argument("--fading", type=int, default=100)
    parser.add_argument("--antennas", default="4,8,16")
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--scenarios", default=",".join(CDF_SCENARIOS + SWEEP_SCENARIOS),
        help="comma-separated preset names to run",
    )
    args = parser.parse_args()
    antennas = tuple(int(t) for t in args.antennas.replace(",", " ").split())

    for name in args.scenarios.replace(",", " ").split():
        groups = SWEEP_GROUPS if name.startswith("het") else (1, 10, 100)
        cfg = RunConfig(
            scenario=SCENARIO_PRESETS[name],
            n_antennas=antennas,
            groups=groups,
            n_deployments=args.deployments,
            n_fading=args.fading,
            master_seed=args.seed,
            out_dir=str(Path(args.out) / name),
            workers=args.workers,
        )
        cfg = apply_overrides(cfg)
        cfg.validate()
        start = time.time()
        result = run(cfg, progress=lambda d, t: print(f"\r{name}: deployment {d}/{t}", end="", flush=True))
        print(f"\n== {name}: {len(result.rows)} rows in {time.time() - start:.0f}s -> {result.csv_path}")


if __name__ == "__main__":
    main()
