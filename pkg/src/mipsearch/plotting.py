"""Figures for benchmark and lattice sweeps, written next to their CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .studies import BenchRow, SweepRow, median_times, fit_report  # noqa: E402


def figure_path(csv_path, suffix: str = ".png") -> Path:
    """``out.csv`` becomes ``out.png`` (same directory, same stem)."""
    return Path(csv_path).with_suffix(suffix)


def plot_bench(rows: Sequence[BenchRow], path) -> Path:
    """Wall time against n: log-log for the search, semi-log for enumeration."""
    algos = sorted({r.algo for r in rows})
    fits = fit_report(rows)
    fig, axes = plt.subplots(1, len(algos), figsize=(4.5 * len(algos), 3.6), squeeze=False)
    for ax, algo in zip(axes[0], algos):
        ns, t = median_times(rows, algo)
        pts = [(r.n, r.wall_time) for r in rows if r.algo == algo]
        ax.plot(*zip(*pts), "o", color="0.6", ms=4, label="runs")
        ax.plot(ns, t, "-D", color="C0", ms=5, label="median")
        fit = fits.get(algo)
        if fit is not None:
            grid = np.linspace(ns.min(), ns.max(), 50)
            if fit["model"] == "loglog":
                y = 2.0 ** (fit["slope"] * np.log2(grid) + fit["intercept"])
                ax.set_xscale("log", base=2)
            else:
                y = 2.0 ** (fit["slope"] * grid + fit["intercept"])
            ax.plot(grid, y, "--", color="C3", label=f"fit, slope {fit['slope']:.2f}")
        ax.set_yscale("log", base=2)
        ax.set_xlabel("n")
        ax.set_ylabel("wall time [s]")
        ax.set_title(algo)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_sweep(rows: Sequence[SweepRow], path) -> Path:
    """Detection rate of the weak link against the connection parameter."""
    d = np.array([r.delta for r in rows])
    p = np.array([r.p_hat for r in rows])
    runs = np.array([r.runs for r in rows])
    err = np.sqrt(p * (1 - p) / runs)
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ax.errorbar(d, p, yerr=err, fmt="o-", color="C0", capsize=3)
    ax.set_xlabel(r"connection parameter $\delta$")
    ax.set_ylabel("fraction of runs cut at the weak link")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
