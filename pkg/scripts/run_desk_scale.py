#!/usr/bin/env python3
"""Run the five desk-scale scenarios and print a median-ASE summary.

These are the same configs the acceptance suite simulates
(configs/acceptance/*.cfg); CSVs land under results/ by default.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parents[1] / "src"))

from cfsim.config import apply_overrides, load_config
from cfsim.harness import run

CONFIG_DIR = Path(__file__).parents[1] / "configs" / "acceptance"
SCENARIOS = ("a1_uniform", "a2_clustered", "a3_concentrated", "a4_heterogeneous", "a5_uniform_n8")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="output root (default: results)")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    for name in SCENARIOS:
        cfg = load_config(str(CONFIG_DIR / f"{name}.cfg"))
        cfg = apply_overrides(cfg, out_dir=str(Path(args.out) / name), workers=args.workers)
        start = time.time()
        result = run(cfg)
        print(f"== {name} ({time.time() - start:.0f}s, {len(result.rows)} rows -> {result.csv_path})")
        ases = {}
        for row in result.rows:
            ases.setdefault((row.precoder, row.n_groups), []).append(row.ase_bits_per_hz)
        for prec in sorted({p for p, _ in ases}):
            groups = sorted(g for p, g in ases if p == prec)
            summary = "  ".join(f"G{g}={np.median(ases[(prec, g)]):.2f}" for g in groups)
            print(f"   {prec}: median ASE  {summary}")


if __name__ == "__main__":
    main()
