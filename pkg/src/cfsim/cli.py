"""Command-line entry point.

    cfsim run --config FILE [--scenario S] [--precoder P] [--groups LIST]
              [--antennas LIST] [--seed U64] [--out DIR] [--deployments M]
              [--fading M] [--workers W] [--quiet]
    cfsim scenarios
    cfsim validate --config FILE

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import apply_overrides, load_config
from .errors import ConfigurationError
from .geometry import SCENARIO_PRESETS
from .harness import run


def _int_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the Monte Carlo experiment")
    run_p.add_argument("--config", required=True, help="key/value config file")
    run_p.add_argument("--scenario", help="override: scenario preset name")
    run_p.add_argument("--precoder", choices=["cb", "ncb", "ecb", "all"], help="override: precoder sweep")
    run_p.add_argument("--groups", type=_int_list, help="override: subgroup counts, e.g. 1,10,100")
    run_p.add_argument("--antennas", type=_int_list, help="override: antennas per AP, e.g. 4,8,16")
    run_p.add_argument("--nu", type=float, help="override: power-allocation fairness exponent")
    run_p.add_argument("--seed", type=int, help="override: master seed")
    run_p.add_argument("--out", help="override: output directory")
    run_p.add_argument("--deployments", type=int, help="override: number of deployments")
    run_p.add_argument("--fading", type=int, help="override: fading realizations per deployment")
    run_p.add_argument("--workers", type=int, help="override: parallel workers over deployments")
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    sub.add_parser("scenarios", help="list the named scenario presets")

    val_p = sub.add_parser("validate", help="check a config file without running")
    val_p.add_argument("--config", required=True)
    return parser


def _load_with_overrides(args):
    cfg = load_config(args.config)
    return apply_overrides(
        cfg,
        scenario=args.scenario,
        precoders=args.precoder,
        groups=args.groups,
        n_antennas=args.antennas,
        nu=args.nu,
        master_seed=args.seed,
        out_dir=args.out,
        n_deployments=args.deployments,
        n_fading=args.fading,
        workers=args.workers,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "scenarios":
            for name, spec in SCENARIO_PRESETS.items():
                parts = [f"{spec.n_uniform} uniform"] if spec.n_uniform else []
                parts += [f"{c.count}x{c.users_per_cluster} (side {c.hotspot_side_m} m)" for c in spec.clusters]
                print(f"{name:<16} K={spec.n_users:<4} {' + '.join(parts)}")
            return 0

        if args.command == "validate":
            cfg = load_config(args.config)
            cfg.validate()
            taus = {g: min(g, cfg.tau_p_cap) for g in cfg.groups}
            print(f"ok: scenario={cfg.scenario.name} K={cfg.n_users} L={cfg.n_aps}")
            print(f"ok: N={list(cfg.n_antennas)} G={list(cfg.groups)} tau_p={taus} tau_c={cfg.tau_c}")
            print(f"ok: precoders={list(cfg.precoders)} deployments={cfg.n_deployments} fading={cfg.n_fading}")
            return 0

        cfg = _load_with_overrides(args)
        cfg.validate()
        progress = None
        if not args.quiet:
            def progress(done, total):
                print(f"deployment {done}/{total}", file=sys.stderr)
        result = run(cfg, progress=progress)
        if not args.quiet:
            print(f"wrote {result.csv_path} ({len(result.rows)} rows) and {result.manifest_path}")
        return 0
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
