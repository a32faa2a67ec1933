"""Static SVG figures for sweeps.  Uses the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bounds import empirical_rank1_bound  # noqa: E402
from .experiments import ExperimentRecord, PowerLawFit, fit_power_law, mean_by  # noqa: E402

# Keep text as text so labels can be checked in the SVG source.
matplotlib.rcParams["svg.fonttype"] = "none"

DIMENSION_SERIES = ("Projection error", "ALS residual", "Noise norm", "Empirical bound")


def _require(records):
    records = list(records)
    if not records:
        raise ValueError("cannot plot an empty record list")
    return records


def plot_dimension_sweep(records: Sequence[ExperimentRecord], path: str | Path) -> Path:
    """Mean projection error, ALS residual and noise norm against ``d``, one
    panel per noise ratio, with the empirical rank-one bound overlaid."""
    records = _require(records)
    ratios = sorted({r.noise_ratio for r in records})
    fig, axes = plt.subplots(1, len(ratios), figsize=(5 * len(ratios), 4), squeeze=False)
    for ax, ratio in zip(axes[0], ratios):
        sub = [r for r in records if r.noise_ratio == ratio]
        dims = sorted({r.d for r in sub})

        def mean(field):
            return [np.mean([getattr(r, field) for r in sub if r.d == d]) for d in dims]

        bound = [np.mean([empirical_rank1_bound(d, r.M, r.noise_norm) for r in sub if r.d == d])
                 for d in dims]
        for label, values, style in zip(
                DIMENSION_SERIES, (mean("epsilon"), mean("residual"), mean("noise_norm"), bound),
                ("o-", "s--", "^:", "-")):
            ax.plot(dims, values, style, label=label)
        ax.set_yscale("log")
        ax.set_xlabel("d")
        ax.set_ylabel("Frobenius norm")
        ax.set_title(f"noise ratio {ratio:g}")
        ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_rank_sweep(records: Sequence[ExperimentRecord], path: str | Path,
                    fit: PowerLawFit | None = None) -> Path:
    """Log-log scatter of mean ``eps`` vs rank with the ``C r^alpha`` fit.

    The fit line is drawn only when at least 3 distinct ranks are present.
    """
    records = _require(records)
    means = mean_by(records, lambda r: r.rank)
    ranks = np.array(list(means), dtype=float)
    eps = np.array(list(means.values()))
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ranks, eps, "o", label="Projection error")
    if len(ranks) >= 3:
        fit = fit or fit_power_law(zip(ranks, eps))
        grid = np.geomspace(ranks.min(), ranks.max(), 50)
        ax.plot(grid, fit(grid), "-",
                label=f"C r^alpha fit (C={fit.C:.3g}, alpha={fit.alpha:.3g})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("rank r")
    ax.set_ylabel("mean projection error")
    ax.set_title(f"{records[0].format.value} rank sweep")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def emit_plot(records: Sequence[ExperimentRecord], kind: str, path: str | Path) -> Path:
    if kind == "dimension":
        return plot_dimension_sweep(records, path)
    if kind == "rank":
        return plot_rank_sweep(records, path)
    raise ValueError(f"unknown plot kind {kind!r}")
