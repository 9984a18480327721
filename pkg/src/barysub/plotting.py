"""PNG figures written next to the CSV outputs (non-interactive Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402


def plot_signature_map(smap, path, title=None):
    """Index of the weighted Hessian over the grid; grey where unclassified."""
    idx = np.where(smap.index >= 0, smap.index, np.nan).astype(float)
    n = smap.ref.manifold.dim
    cmap = ListedColormap(["#3b4cc0", "#8fb0e8", "#a0522d"][: n + 1] if n == 2 else plt.get_cmap("viridis", n + 1).colors)
    cmap.set_bad("#cccccc")
    fig, ax = plt.subplots(figsize=(7, 4 if smap.wrap else 6))
    c = smap.coords
    extent = [c[0, 0, 0], c[0, -1, 0], c[-1, 0, 1], c[0, 0, 1]]
    im = ax.imshow(idx, origin="upper", extent=extent, aspect="auto", cmap=cmap, vmin=-0.5, vmax=n + 0.5)
    cb = fig.colorbar(im, ax=ax, ticks=range(n + 1))
    cb.set_label("index (positive eigenvalues)")
    M = smap.ref.manifold
    if smap.wrap:
        pts = smap.ref.points
        lon = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
        colat = np.arccos(np.clip(pts[:, 2], -1, 1))
        ax.plot(lon, colat, "k*", ms=10)
        ax.plot(np.mod(lon + np.pi, 2 * np.pi), np.pi - colat, "r*", ms=10)
        ax.set_xlabel("longitude (rad)")
        ax.set_ylabel("colatitude (rad)")
    else:
        pts = smap.ref.points[:, 1:]
        ax.plot(pts[:, 0], pts[:, 1], "k*", ms=10)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.invert_yaxis()
    ax.set_title(title or f"weighted Hessian signature on {M!r}")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_level_curve(result, path):
    """Unexplained variance against subspace dimension."""
    levels = result.per_level_unexplained_variance
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(range(len(levels)), levels, "o-")
    ax.set_xlabel("subspace dimension")
    ax.set_ylabel("unexplained variance")
    ax.set_xticks(range(len(levels)))
    ax.set_title(f"{result.method}, k={result.k}, AUV={result.auv:.4g}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
