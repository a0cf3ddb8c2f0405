"""The four figure kinds, each a pure file-to-image transformation.

Nothing here recomputes any physics: inputs are the spinctl CSV/JSON outputs
and the result is a raster image. Rendering is deterministic for fixed input
and style.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import (SchemaError, read_histogram, read_state, read_sweep,
                     read_wigner_grid)

__all__ = ["wigner_sphere", "rho_bars", "histograms", "squeeze_curve", "FIGURE_KINDS"]

_SAVE_OPTS = dict(dpi=150, metadata={"Software": "plotkit"})


def _finish(fig, out_path):
    directory = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(directory, exist_ok=True)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def wigner_sphere(in_path, out_path, cmap="RdBu_r"):
    """Two orthographic hemispheres (front: phi in [-pi/2, pi/2], back: the
    rest), colored by W."""
    theta, phi, _, w = read_wigner_grid(in_path)
    thetas = np.unique(theta)
    phis = np.unique(phi)
    grid = w.reshape(len(thetas), len(phis))
    span = max(abs(w.min()), abs(w.max())) or 1.0

    fig, axes = plt.subplots(1, 2, figsize=(8, 4), subplot_kw={"aspect": "equal"})
    for ax, front in zip(axes, (True, False)):
        # orthographic projection: x = sin(theta) sin(phi), y = cos(theta)
        pgrid, tgrid = np.meshgrid(phis, thetas)
        visible = np.cos(pgrid) >= 0 if front else np.cos(pgrid) < 0
        x = np.sin(tgrid) * np.sin(pgrid)
        y = np.cos(tgrid)
        vals = np.where(visible, grid, np.nan)
        ax.scatter(x[visible], y[visible], c=vals[visible], cmap=cmap,
                   vmin=-span, vmax=span, s=14, edgecolors="none")
        circle = plt.Circle((0, 0), 1.0, fill=False, color="0.4", lw=0.8)
        ax.add_patch(circle)
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        ax.set_axis_off()
        ax.set_title("front" if front else "back", fontsize=10)
    fig.suptitle("Wigner function (orthographic hemispheres)")
    _finish(fig, out_path)


def rho_bars(in_path, out_path, cmap="viridis"):
    """|rho| magnitude bars over the (m, m') grid, Fig.2 style."""
    rho = read_state(in_path)
    dim = rho.shape[0]
    f = (dim - 1) / 2
    mags = np.abs(rho)
    fig = plt.figure(figsize=(5.5, 4.5))
    ax = fig.add_subplot(111, projection="3d")
    xs, ys = np.meshgrid(np.arange(dim), np.arange(dim))
    xs, ys = xs.ravel(), ys.ravel()
    dz = mags.ravel()
    colors = plt.get_cmap(cmap)(dz / (dz.max() or 1.0))
    ax.bar3d(xs - 0.4, ys - 0.4, np.zeros_like(dz), 0.8, 0.8, dz,
             color=colors, shade=True)
    labels = [str(int(f - i)) if float(f).is_integer() else f"{f - i:g}"
              for i in range(dim)]
    ax.set_xticks(range(dim))
    ax.set_yticks(range(dim))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_zlim(0, max(0.5, dz.max()))
    ax.set_xlabel("m")
    ax.set_ylabel("m'")
    ax.set_title(r"$|\rho_{m m'}|$")
    _finish(fig, out_path)


HISTOGRAM_PANELS = (
    ("yields.csv", "yields"),
    ("fidelities.csv", "fidelities"),
    ("corrected_yields.csv", "corrected yields"),
    ("corrected_fidelities.csv", "corrected fidelities"),
)


def histograms(in_path, out_path, color="steelblue"):
    """2 x 2 panel of the four batch histograms; in_path is the directory
    written by `spinctl stats`."""
    if not os.path.isdir(in_path):
        raise SchemaError(f"{in_path}: expected a directory of histogram CSVs")
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    for ax, (name, title) in zip(axes.ravel(), HISTOGRAM_PANELS):
        path = os.path.join(in_path, name)
        if not os.path.exists(path):
            raise SchemaError(f"{in_path}: missing histogram file '{name}'")
        left, right, count = read_histogram(path)
        ax.bar(left, count, width=right - left, align="edge", color=color,
               edgecolor="white", linewidth=0.4)
        ax.set_title(title, fontsize=10)
        ax.set_xlim(min(left.min(), 0.0), max(right.max(), 1.0))
        ax.set_xlabel("value")
        ax.set_ylabel("count")
    fig.tight_layout()
    _finish(fig, out_path)


def squeeze_curve(in_path, out_path):
    """Squeezed and anti-squeezed components vs final field, with the 0 dB
    coherent-state reference line (Fig.4a style)."""
    cols = read_sweep(in_path)
    omega = cols["omega_end_rad_s"]
    order = np.argsort(omega)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(omega[order], cols["squeezing_db"][order], "o-", color="tab:blue",
            label="squeezed (x)")
    ax.plot(omega[order], cols["anti_squeezing_db"][order], "s-", color="tab:red",
            label="anti-squeezed (z)")
    ax.axhline(0.0, color="0.3", ls="--", lw=1, label="coherent state")
    ax.set_xscale("log")
    ax.set_xlabel("final field omega_end (rad/s)")
    ax.set_ylabel("10 log10(2 Var / |<F_y>|)  [dB]")
    ax.legend(fontsize=9)
    fig.tight_layout()
    _finish(fig, out_path)


FIGURE_KINDS = {
    "wigner-sphere": wigner_sphere,
    "rho-bars": rho_bars,
    "histograms": histograms,
    "squeeze-curve": squeeze_curve,
}
