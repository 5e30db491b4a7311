"""Figure rendering for run reports.

matplotlib is imported lazily so the solvers work without it; only the
``--figures`` path of the CLI needs it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

PHASE_STYLE = dict(s=0.3, c="k", alpha=0.5, linewidths=0, rasterized=True)
_META = {"Software": None}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _phase_axes(ax, ens, title):
    ax.scatter(ens.pos, ens.vel, **PHASE_STYLE)
    ax.set_xlabel(r"$r$")
    ax.set_ylabel(r"$v_r$")
    ax.set_title(title, fontsize=9)


def plot_snapshots(snapshots, path, solver=""):
    """One phase-space scatter per snapshot time; ``snapshots`` maps t -> beam."""
    plt = _pyplot()
    times = sorted(snapshots)
    fig, axes = plt.subplots(1, len(times), figsize=(3.2 * len(times), 3.0), squeeze=False)
    for ax, t in zip(axes[0], times):
        _phase_axes(ax, snapshots[t], f"{solver} t = {t:g}".strip())
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return Path(path)


def plot_comparison(reference, two_scale, path):
    """Reference beams on the top row, reconstructed two-scale beams below."""
    plt = _pyplot()
    times = sorted(reference)
    fig, axes = plt.subplots(2, len(times), figsize=(3.2 * len(times), 6.0),
                             squeeze=False, sharex="col", sharey="col")
    for j, t in enumerate(times):
        _phase_axes(axes[0, j], reference[t], f"reference t = {t:g}")
        _phase_axes(axes[1, j], two_scale[t], f"two-scale t = {t:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return Path(path)


def plot_moments(series_by_solver, path):
    """rms radius and emittance against time for each solver."""
    plt = _pyplot()
    fig, (ax_r, ax_e) = plt.subplots(1, 2, figsize=(8.0, 3.0))
    for name, series in series_by_solver.items():
        t = np.array([s[0] for s in series])
        ax_r.plot(t, [np.sqrt(m.r2) for _, m in series], lw=0.8, label=name)
        ax_e.plot(t, [m.emittance for _, m in series], lw=0.8, label=name)
    ax_r.set_xlabel("t")
    ax_r.set_ylabel("rms radius")
    ax_e.set_xlabel("t")
    ax_e.set_ylabel("emittance")
    ax_r.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return Path(path)


def plot_convergence(steps, errors, path, xlabel, order=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.0, 3.2))
    ax.loglog(steps, errors, "o-", color="k")
    if order is not None:
        ax.set_title(f"fitted order {order:.2f}", fontsize=9)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("max error")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return Path(path)


PLOT_SCRIPT = '''\
"""Phase-space scatter plots of the snapshot CSVs in this directory."""
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "snapshot_*.csv"))):
    with open(path) as fh:
        meta = fh.readline().lstrip("#").strip()
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(data[:, 0], data[:, 1], s=0.3, c="k", alpha=0.5, linewidths=0)
    ax.set_xlabel("r")
    ax.set_ylabel("v_r")
    ax.set_title(meta, fontsize=8)
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=150)
    plt.close(fig)
'''


def write_plot_script(directory) -> Path:
    path = Path(directory) / "plot_snapshots.py"
    path.write_text(PLOT_SCRIPT)
    return path
