"""Command-line entry point.

    cfplot cdf   --in results.csv [results2.csv ...] --out fig.png
    cfplot sweep --in results.csv [...] --out fig.png [--stat median|mean]

Exit codes: 0 success, 1 bad input data (message names the problem), 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureDataError, FigureSpec, MissingColumnError, plot_ase_vs_g, plot_cdf


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfplot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("cdf", "empirical ASE CDFs"), ("sweep", "ASE versus G")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--in", dest="inputs", nargs="+", required=True, help="results.csv paths")
        p.add_argument("--out", required=True, help="output image path")
        if name == "sweep":
            p.add_argument("--stat", choices=["median", "mean"], default="median")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        inputs=tuple(args.inputs),
        output=args.out,
        kind="cdf" if args.command == "cdf" else "ase-vs-g",
        stat=getattr(args, "stat", "median"),
    )
    try:
        if args.command == "cdf":
            plot_cdf(spec)
        else:
            plot_ase_vs_g(spec)
        return 0
    except (MissingColumnError, FigureDataError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
