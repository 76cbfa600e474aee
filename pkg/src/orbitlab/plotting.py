"""Figures written next to the CSV output of the ``lil`` and ``clt`` commands."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .lilclt import REFERENCE, normal_cdf  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "savefig.dpi": 120,
}

# PNG metadata left empty so repeated runs give identical files
_META = {"Software": None}


def _figure(width=6.0, ncols=1):
    return plt.subplots(1, ncols, figsize=(width, width * GOLDEN))


def plot_lil(trajectories, path, title=None):
    """L(N) against N on a log axis, with the 1/sqrt(2) reference line."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        for tr in trajectories:
            ax.plot(tr.n_grid, tr.statistic, color="0.5", alpha=0.6)
        if trajectories:
            med = np.median(np.vstack([tr.statistic for tr in trajectories]), axis=0)
            ax.plot(trajectories[0].n_grid, med, color="k", label="median")
        ax.axhline(REFERENCE.lil_power_orbit, color="C3", ls="--", label=r"$1/\sqrt{2}$")
        ax.set_xscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel(r"$\sqrt{N}\,D_N / \sqrt{\log\log N}$")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, metadata=_META)
        plt.close(fig)


def plot_clt(sample, path, title=None):
    """Histogram of the normalized sums against the normal density, and the
    empirical distribution function against Phi."""
    t = np.sort(sample.normalized_sums)
    grid = np.linspace(-4, 4, 401)
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = _figure(width=8.0, ncols=2)
        ax1.hist(t, bins=40, density=True, color="0.7", edgecolor="0.4")
        ax1.plot(grid, np.exp(-grid**2 / 2) / math.sqrt(2 * math.pi), color="C3")
        ax1.set_xlabel("T")
        ax1.set_ylabel("density")
        ecdf = np.arange(1, t.size + 1) / t.size
        ax2.step(t, ecdf, where="post", color="k", label="empirical")
        ax2.plot(grid, normal_cdf(grid), color="C3", ls="--", label=r"$\Phi$")
        ax2.set_xlabel("t")
        ax2.legend(loc="lower right")
        ax2.set_title(f"KS = {sample.ks_distance:.4f}")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, metadata=_META)
        plt.close(fig)
