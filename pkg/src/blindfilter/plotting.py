"""Static SVG figures for benchmark summaries and single recoveries."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp, so reruns give identical files
matplotlib.rcParams["svg.hashsalt"] = "blindfilter"
_SVG_META = {"Date": None, "Creator": None}


def plot_scenario(cells, path, title: str = "") -> Path:
    """Mean error against ``1/SNR`` with one-standard-error bars, one line per method.

    ``cells`` are :class:`~blindfilter.bench.CellSummary` rows of one scenario.
    The axes are logarithmic unless a noiseless (``snr = inf``) level is present.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    finite = all(not math.isinf(c.snr) for c in cells)
    for method in dict.fromkeys(c.method for c in cells):
        rows = sorted((c for c in cells if c.method == method), key=lambda c: -c.snr)
        inv = np.array([0.0 if math.isinf(c.snr) else 1.0 / c.snr for c in rows])
        mean = np.array([c.mean_error for c in rows])
        se = np.array([0.0 if math.isnan(c.stderr) else c.stderr for c in rows])
        ax.errorbar(inv, mean, yerr=se, marker="o", ms=4, capsize=3, label=method)
    if finite:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("1 / SNR")
    ax.set_ylabel("mean l2 error")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def plot_recovery(y, x_hat, path, x=None, title: str = "") -> Path:
    """Real parts of the observations, the estimate and (optionally) the truth.

    2-D signals are shown as images side by side.
    """
    path = Path(path)
    panels = [("observations", y), ("estimate", x_hat)] + ([("truth", x)] if x is not None else [])
    if y.ndim == 1:
        fig, ax = plt.subplots(figsize=(6, 3.2))
        for label, sig in panels:
            t = np.arange(sig.window[0][0], sig.window[0][1] + 1)
            style = {"observations": dict(ls="", marker=".", ms=3, alpha=0.6)}.get(label, {})
            ax.plot(t, sig.values.real, label=label, **style)
        ax.set_xlabel("t")
        ax.legend()
    else:
        fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.2))
        for ax, (label, sig) in zip(axes, panels):
            ax.imshow(sig.values.real, cmap="gray")
            ax.set_title(label)
            ax.set_xticks([])
            ax.set_yticks([])
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path
