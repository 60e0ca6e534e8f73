"""Figure rendering for CLI reports (matplotlib, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import CommunityAssignment, RatingsMatrix


def save_matrix_heatmap(m: RatingsMatrix, path, title: str = "",
                        ca: CommunityAssignment | None = None) -> None:
    """Heatmap of a ratings matrix; unobserved cells render white.

    When an assignment is given, rows/columns are reordered by community
    and boundaries are drawn.
    """
    vals = m.masked()
    if ca is not None:
        r_order = np.argsort(ca.row_labels, kind="stable")
        c_order = np.argsort(ca.col_labels, kind="stable")
        vals = vals[np.ix_(r_order, c_order)]
    fig, ax = plt.subplots(figsize=(6, 6))
    im = ax.imshow(vals, aspect="auto", interpolation="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax, shrink=0.8)
    if ca is not None:
        r_sorted = np.sort(ca.row_labels)
        c_sorted = np.sort(ca.col_labels)
        for i in np.flatnonzero(np.diff(r_sorted)):
            ax.axhline(i + 0.5, color="white", lw=0.8)
        for j in np.flatnonzero(np.diff(c_sorted)):
            ax.axvline(j + 0.5, color="white", lw=0.8)
    if title:
        ax.set_title(title)
    ax.set_xlabel("items")
    ax.set_ylabel("users")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_imputation_trace(changes, path) -> None:
    """Per-iteration mean absolute change of imputed entries."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(np.arange(1, len(changes) + 1), changes, marker="o")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean |change| of imputed entries")
    ax.set_yscale("log" if changes and min(changes) > 0 else "linear")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
