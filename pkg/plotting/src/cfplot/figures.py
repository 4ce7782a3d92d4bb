"""Figures from simulator CSVs: ASE CDFs and ASE-vs-G sweep curves.

Input is the results.csv schema written by cfsim (one ASE sample per
deployment and per scenario/precoder/G/N combination).  Both figure kinds
are pure functions of the CSV content and return a summary of the
conclusions they draw (medians per curve, ASE-maximizing G, unimodality),
which is also printed so batch logs carry the verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("scenario", "precoder", "G", "N", "deployment", "ase_bits_per_hz")

PRECODER_COLORS = {"cb": "tab:blue", "ncb": "tab:orange", "ecb": "tab:green"}
LINE_STYLES = ("-", "--", ":", "-.", (0, (3, 1, 1, 1)))


class MissingColumnError(ValueError):
    """The input CSV lacks a required column; the message names it."""


class FigureDataError(ValueError):
    """The input CSV cannot support the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    output: str
    kind: str = "cdf"  # cdf | ase-vs-g
    stat: str = "median"  # central statistic for the sweep figure


def load_results(paths) -> pd.DataFrame:
    frames = []
    for path in paths:
        frame = pd.read_csv(path)
        for column in REQUIRED_COLUMNS:
            if column not in frame.columns:
                raise MissingColumnError(f"{path}: missing required column {column!r}")
        frames.append(frame)
    if not frames:
        raise FigureDataError("no input CSVs given")
    data = pd.concat(frames, ignore_index=True)
    if data.empty:
        raise FigureDataError("input CSVs contain no data rows")
    return data


def ecdf(samples) -> tuple[np.ndarray, np.ndarray]:
    values = np.sort(np.asarray(samples, dtype=float))
    return values, np.arange(1, values.size + 1) / values.size


def _style_maps(data: pd.DataFrame):
    g_values = sorted(data["G"].unique())
    n_values = sorted(data["N"].unique())
    styles = {g: LINE_STYLES[i % len(LINE_STYLES)] for i, g in enumerate(g_values)}
    widths = {n: 1.2 + 0.8 * i for i, n in enumerate(n_values)}
    return styles, widths


def plot_cdf(spec: FigureSpec) -> dict:
    """One empirical ASE CDF curve per (precoder, G, N) combination.

    Colors encode the precoder, line styles the subgroup count, line widths
    the antenna count.  Returns (and prints) per-(scenario, precoder, N)
    medians by G and the ASE-maximizing G.
    """
    data = load_results(spec.inputs)
    styles, widths = _style_maps(data)
    fig, ax = plt.subplots(figsize=(8, 5))
    n_curves = 0
    for (precoder, g, n), block in sorted(data.groupby(["precoder", "G", "N"])):
        values, probs = ecdf(block["ase_bits_per_hz"])
        ax.plot(
            values, probs,
            color=PRECODER_COLORS.get(precoder, "tab:gray"),
            linestyle=styles[g], linewidth=widths[n],
            drawstyle="steps-post",
            label=f"{precoder}, G={g}, N={n}",
        )
        n_curves += 1
    ax.set_xlabel("aggregated SE [bit/s/Hz]")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, ncol=max(1, n_curves // 8))
    scenarios = ", ".join(sorted(data["scenario"].unique()))
    ax.set_title(f"ASE CDF: {scenarios}")
    fig.savefig(spec.output, dpi=150, bbox_inches="tight")
    plt.close(fig)

    summary = {"figure": str(spec.output), "n_curves": n_curves, "groups": {}}
    for (scenario, precoder, n), block in sorted(data.groupby(["scenario", "precoder", "N"])):
        medians = {int(g): float(sub["ase_bits_per_hz"].median()) for g, sub in block.groupby("G")}
        best_g = max(medians, key=medians.get)
        summary["groups"][(scenario, precoder, int(n))] = {"medians": medians, "best_g": best_g}
        listing = ", ".join(f"G={g}: {m:.2f}" for g, m in sorted(medians.items()))
        print(f"{scenario} {precoder} N={n}: median ASE {listing}; best G={best_g}")
    return summary


def _unimodal(values) -> bool:
    diffs = np.sign(np.diff(np.asarray(values, dtype=float)))
    diffs = diffs[diffs != 0]
    # one sign change at most, rising then falling
    return bool(np.all(np.diff(diffs) <= 0))


def plot_ase_vs_g(spec: FigureSpec) -> dict:
    """Central ASE (median by default) with IQR band versus G, log-scaled G
    axis, one panel per precoder and one curve per N.

    Refuses single-G inputs.  Flags interior maxima (unimodal sweeps) in the
    returned summary and on the console.
    """
    data = load_results(spec.inputs)
    g_values = sorted(data["G"].unique())
    if len(g_values) < 2:
        raise FigureDataError(f"ase-vs-g needs a sweep over G, found only G={g_values[0]}")
    if spec.stat not in ("median", "mean"):
        raise FigureDataError(f"stat must be 'median' or 'mean', got {spec.stat!r}")

    precoders = sorted(data["precoder"].unique())
    n_values = sorted(data["N"].unique())
    fig, axes = plt.subplots(
        1, len(precoders), figsize=(4.2 * len(precoders), 4.2), sharey=True, squeeze=False
    )
    summary = {"figure": str(spec.output), "groups": {}}
    for ax, precoder in zip(axes[0], precoders):
        for n in n_values:
            block = data[(data["precoder"] == precoder) & (data["N"] == n)]
            if block.empty:
                continue
            centers, lows, highs, gs = [], [], [], []
            for g in g_values:
                samples = block.loc[block["G"] == g, "ase_bits_per_hz"]
                if samples.empty:
                    continue
                center = samples.median() if spec.stat == "median" else samples.mean()
                centers.append(float(center))
                lows.append(float(samples.quantile(0.25)))
                highs.append(float(samples.quantile(0.75)))
                gs.append(int(g))
            ax.plot(gs, centers, marker="o", label=f"N={n}")
            ax.fill_between(gs, lows, highs, alpha=0.2)
            best_g = gs[int(np.argmax(centers))]
            interior = best_g not in (gs[0], gs[-1])
            for scenario in sorted(block["scenario"].unique()):
                summary["groups"][(scenario, precoder, int(n))] = {
                    "centers": dict(zip(gs, centers)),
                    "best_g": best_g,
                    "interior_max": interior,
                    "unimodal": _unimodal(centers),
                }
                note = "interior maximum" if interior else "maximum at the sweep edge"
                print(
                    f"{scenario} {precoder} N={n}: ASE-maximizing G={best_g} ({note}, "
                    f"{spec.stat} {max(centers):.2f})"
                )
        ax.set_xscale("log")
        ax.set_xlabel("number of subgroups G")
        ax.set_title(precoder)
        ax.grid(alpha=0.3, which="both")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel(f"{spec.stat} aggregated SE [bit/s/Hz]")
    fig.savefig(spec.output, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return summary
