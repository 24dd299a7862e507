"""Figure rendering for the command-line report path.

The backend is forced to Agg so rendering works headless; each helper draws
one figure, writes it to the requested file, closes it, and returns the path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_field(values, lx: float, ly: float, path: str,
               title: str = "", label: str = "") -> str:
    """One heatmap of a nodal field over [0, lx] x [0, ly]."""
    fig, ax = plt.subplots(figsize=(5.2, 4.3))
    _field_axes(ax, values, lx, ly, title, label, fig)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_fields(panels, lx: float, ly: float, path: str) -> str:
    """Row of heatmaps; `panels` is a sequence of (title, matrix) pairs."""
    panels = list(panels)
    fig, axes = plt.subplots(1, len(panels), figsize=(4.6 * len(panels), 4.0))
    axes = np.atleast_1d(axes)
    for ax, (title, values) in zip(axes, panels):
        _field_axes(ax, values, lx, ly, title, "", fig)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _field_axes(ax, values, lx, ly, title, label, fig):
    # values[i, j] sits at (x_i, y_j); imshow wants y as rows
    im = ax.imshow(np.asarray(values).T, origin="lower", aspect="auto",
                   extent=(0.0, lx, 0.0, ly), cmap="viridis")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)


def save_profile(frequency, stderr, rho_limit, path: str, title: str = "") -> str:
    """Sitewise occupation estimate with error bars against the limit curve."""
    frequency = np.asarray(frequency)
    sites = np.arange(1, frequency.size + 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(sites, frequency, yerr=np.asarray(stderr), fmt="o", ms=3.5,
                capsize=2, lw=1, label="estimate")
    ax.plot(sites, np.asarray(rho_limit), "-", color="C3", label="limit profile")
    ax.set_xlabel("site")
    ax.set_ylabel("occupation")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_draws(images: np.ndarray, path: str, title: str = "",
               max_draws: int = 4) -> str:
    """Scatter of (i/n, pi_i/n) for the first few sampled permutations."""
    images = np.atleast_2d(images)
    n = images.shape[1]
    xs = np.arange(1, n + 1) / n
    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    for s in range(min(max_draws, images.shape[0])):
        ax.plot(xs, images[s] / n, ".", ms=4, alpha=0.8, label=f"draw {s}")
    ax.set_xlabel("i / n")
    ax.set_ylabel("value / n")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.legend(frameon=False, fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
