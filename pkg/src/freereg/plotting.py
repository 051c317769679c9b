"""Figures written next to the CSV/JSON outputs.

Rendering uses the non-interactive Agg backend and strips the software stamp
from PNG metadata, so a figure is byte-identical across reruns with the same
inputs.
"""

from __future__ import annotations

import math
import os
import tempfile

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_spectrum", "plot_decay", "plot_moments"]

_STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "path.simplify": False,
}


def _save(fig, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", metadata={"Software": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)


def plot_spectrum(hist, path: str, reference=None, title: str | None = None) -> None:
    """Histogram density with an optional reference density overlaid."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        widths = np.diff(hist.edges)
        ax.bar(hist.edges[:-1], hist.density, width=widths, align="edge",
               color="0.75", edgecolor="0.35", linewidth=0.4, label="eigenvalues")
        if reference is not None:
            xs = np.linspace(hist.edges[0], hist.edges[-1], 600)
            ax.plot(xs, [reference.density(x) for x in xs], color="C3", lw=1.4, label=reference.name)
        ax.set_xlabel("spectral value")
        ax.set_ylabel("density")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def plot_decay(report, path: str) -> None:
    """Window masses against window size on log-log axes, with the fitted slope."""
    eps = np.asarray(report.eps)
    mass = np.asarray(report.masses)
    keep = mass > 0
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.loglog(eps[keep], mass[keep], "o", color="C0", label="window mass")
        if keep.sum() >= 2:
            x = np.log(eps[keep])
            c = np.mean(np.log(mass[keep]) - report.alpha * x)
            ax.loglog(eps[keep], np.exp(c + report.alpha * x), "-", color="C3",
                      label=f"slope {report.alpha:.3f}")
        side = "[t, t+eps]" if report.one_sided else "[t-eps, t+eps]"
        ax.set_xlabel("eps")
        ax.set_ylabel(f"mass of {side}")
        ax.set_title(f"t = {report.t:g}")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_moments(rows: list[dict], path: str) -> None:
    """Absolute gap between Monte Carlo and exact moments, per order."""
    js = [r["j"] for r in rows]
    gaps = [max(r["gap"], 1e-16) for r in rows]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(js, gaps, "o-", color="C0")
        ax.set_xlabel("moment order j")
        ax.set_ylabel("|MC - exact|")
        ax.set_xticks(js)
        ax.set_ylim(bottom=10 ** math.floor(math.log10(min(gaps))))
        _save(fig, path)
