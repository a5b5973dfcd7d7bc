"""Matplotlib figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import Params, slow_manifold, steady_states  # noqa: E402
from .svg import AXIS_NAMES, PLANES  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 0.8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

# keeps PNG bytes independent of the matplotlib version
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_projections(states: np.ndarray, params: Params, path, max_points: int = 200_000) -> Path:
    """Three coordinate-plane projections with L and Ss2/Ss3 overlaid."""
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    if states.shape[0] > max_points:
        states = states[:: states.shape[0] // max_points + 1]
    ss = steady_states(params)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 3, figsize=(10, 3.2))
        for ax, (name, (i, j)) in zip(axes, PLANES.items()):
            ax.plot(states[:, i], states[:, j], lw=0.3, color="#1f4e9a")
            if params.A > 0:
                L = slow_manifold(params)
                ends = [ss["Ss2"].point] + ([ss["Ss3"].point] if ss["Ss3"].defined else [])
                seg = np.array([L.point_at(float(L.axial(e))) for e in ends])
                ax.plot(seg[:, i], seg[:, j], "--", color="#c0392b", lw=1.0, label="L")
            for e in ss:
                if e.admissible and e.label in ("Ss2", "Ss3"):
                    pt = e.point.as_array()
                    ax.plot(pt[i], pt[j], "o", mfc="none", color="#c0392b", ms=4)
                    ax.annotate(e.label, (pt[i], pt[j]), xytext=(4, 4), textcoords="offset points")
            ax.set_xlabel(AXIS_NAMES[i])
            ax.set_ylabel(AXIS_NAMES[j])
            ax.set_title(name)
        fig.suptitle(f"A={params.A:g}  B={params.B:g}  C={params.C:g}")
        fig.tight_layout()
        return _save(fig, path)


def plot_scan(result, path) -> Path:
    """Hole radius and angular coverage against A for a surgery scan."""
    a = np.array([e.A for e in result.entries])
    md = np.array([np.nan if e.metrics is None else e.metrics.min_distance for e in result.entries])
    cov = np.array([np.nan if e.metrics is None else e.metrics.angular_coverage for e in result.entries])
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
        ax1.semilogy(a, md, "o-", color="#1f4e9a")
        # the threshold is only meaningful where the orbit was measured
        eps = np.where(np.isfinite(md), [e.shape.eps_hole if e.shape else np.nan for e in result.entries], np.nan)
        ax1.semilogy(a, eps, ":", color="0.4", label="hole threshold")
        for e, y in zip(result.entries, md):
            if np.isfinite(y):
                ax1.annotate(e.verdict, (e.A, y), xytext=(3, 3), textcoords="offset points", fontsize=7)
            else:
                ax1.axvline(e.A, color="0.8", lw=0.8)
                ax1.annotate(e.verdict, (e.A, 0.5), xycoords=("data", "axes fraction"), rotation=90,
                             ha="right", va="center", fontsize=7, color="0.4")
        ax1.set_ylabel("min distance to L")
        if np.isfinite(md).any():
            ax1.legend(frameon=False)
        ax2.plot(a, cov, "s-", color="#1f4e9a")
        ax2.axhline(result.thresholds.c_min, ls=":", color="0.4")
        ax2.set_ylim(0, 1.05)
        ax2.set_ylabel("angular coverage")
        ax2.set_xlabel("A")
        fig.suptitle(f"B={result.B:g}  C={result.C:g}")
        fig.tight_layout()
        return _save(fig, path)
