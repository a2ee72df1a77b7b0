"""Figure emission for reports.

All figures are rendered with matplotlib to whatever format the output path
implies (the CLI uses SVG).  Colors encode Shapley values on a symmetric
diverging scale normalized per figure to the largest absolute value; that
normalization is recorded in the figure metadata.
"""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DIVERGING = "RdBu_r"


def _labels(p: int, labels: Sequence[str] | None) -> list[str]:
    if labels is None:
        return [f"x{j + 1}" for j in range(p)]
    return list(labels)


def _finish(fig, path: str, description: str) -> str:
    fig.tight_layout()
    try:
        fig.savefig(path, metadata={"Description": description})
    except TypeError:
        # some backends reject metadata; the figure matters more
        fig.savefig(path)
    plt.close(fig)
    return str(path)


def save_contribution_bar(
    phi: np.ndarray,
    md2: float,
    cutoff: float,
    path: str,
    labels: Sequence[str] | None = None,
    title: str = "Outlyingness contributions",
) -> str:
    """Bar chart of per-variable contributions on the distance scale.

    Contributions are rescaled from squared-distance to distance units so
    the bars sum to the Mahalanobis distance; the dashed line marks the
    square root of the cutoff.
    """
    phi = np.asarray(phi, dtype=float)
    md = math.sqrt(max(md2, 0.0))
    scaled = phi / md if md > 0 else np.zeros_like(phi)
    names = _labels(phi.size, labels)

    fig, ax = plt.subplots(figsize=(1.2 + 0.6 * phi.size, 3.2))
    colors = ["#b2182b" if v > 0 else "#2166ac" for v in scaled]
    ax.bar(names, scaled, color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.axhline(math.sqrt(max(cutoff, 0.0)), color="gray", linestyle=":", label="cutoff")
    ax.plot([], [], color="black", label=f"md = {md:.2f}")
    ax.set_ylabel("contribution (distance scale)")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    return _finish(fig, path, f"md2={md2:.6g}, cutoff={cutoff:.6g}")


def save_interaction_heatmap(
    Phi: np.ndarray,
    path: str,
    labels: Sequence[str] | None = None,
    title: str = "Shapley interaction indices",
) -> str:
    """Symmetric heatmap of the interaction matrix."""
    Phi = np.asarray(Phi, dtype=float)
    names = _labels(Phi.shape[0], labels)
    vmax = float(np.max(np.abs(Phi))) or 1.0

    fig, ax = plt.subplots(figsize=(1.6 + 0.5 * len(names), 1.2 + 0.5 * len(names)))
    im = ax.imshow(Phi, cmap=_DIVERGING, vmin=-vmax, vmax=vmax)
    ax.set_xticks(range(len(names)), names, rotation=90, fontsize=8)
    ax.set_yticks(range(len(names)), names, fontsize=8)
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    return _finish(fig, path, f"color scale normalized to max |Phi| = {vmax:.6g}")


def save_cell_tilemap(
    phi_matrix: np.ndarray,
    flag_mask: np.ndarray,
    path: str,
    labels: Sequence[str] | None = None,
    title: str = "Flagged cells",
) -> str:
    """Tile map of flagged cells, colored by the local Shapley value.

    Unflagged cells are left white; color intensity is normalized per figure
    to the largest absolute Shapley value among flagged cells.
    """
    phi_matrix = np.asarray(phi_matrix, dtype=float)
    flag_mask = np.asarray(flag_mask, dtype=bool)
    names = _labels(phi_matrix.shape[1], labels)
    shown = np.ma.masked_where(~flag_mask, phi_matrix)
    flagged_vals = np.abs(phi_matrix[flag_mask])
    vmax = float(flagged_vals.max()) if flagged_vals.size else 1.0
    vmax = vmax or 1.0

    height = min(0.18 * phi_matrix.shape[0] + 1.6, 14.0)
    fig, ax = plt.subplots(figsize=(1.6 + 0.45 * len(names), height))
    cmap = matplotlib.colormaps[_DIVERGING].copy()
    cmap.set_bad("white")
    im = ax.imshow(shown, cmap=cmap, vmin=-vmax, vmax=vmax, aspect="auto",
                   interpolation="nearest")
    ax.set_xticks(range(len(names)), names, rotation=90, fontsize=8)
    ax.set_ylabel("observation")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    return _finish(fig, path, f"color scale normalized to max |phi| = {vmax:.6g}")


def save_history_bars(
    history: Sequence[tuple[int, Sequence[float], float]],
    cutoff: float,
    path: str,
    labels: Sequence[str] | None = None,
    title: str = "Shapley values per iteration",
) -> str:
    """Stacked bars of the Shapley vector at each iteration snapshot.

    Positive contributions stack upward and negative ones downward, so the
    visual column height tracks the squared distance, which is also drawn as
    a line together with the dotted cutoff.
    """
    iters = [int(h[0]) for h in history]
    phis = np.array([np.asarray(h[1], dtype=float) for h in history])
    md2s = [float(h[2]) for h in history]
    p = phis.shape[1]
    names = _labels(p, labels)
    cmap = matplotlib.colormaps["tab10"]

    fig, ax = plt.subplots(figsize=(max(4.0, 0.25 * len(iters) + 2.0), 3.6))
    pos_base = np.zeros(len(iters))
    neg_base = np.zeros(len(iters))
    for j in range(p):
        vals = phis[:, j]
        base = np.where(vals >= 0, pos_base, neg_base)
        ax.bar(iters, vals, bottom=base, color=cmap(j % 10), label=names[j], width=0.8)
        pos_base += np.clip(vals, 0, None)
        neg_base += np.clip(vals, None, 0)
    ax.plot(iters, md2s, color="black", linewidth=1.2, label="md$^2$")
    ax.axhline(cutoff, color="gray", linestyle=":", label="cutoff")
    ax.set_xlabel("iteration")
    ax.set_ylabel("contribution")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=7, ncols=2)
    return _finish(fig, path, f"{len(iters)} snapshots, cutoff={cutoff:.6g}")


def save_metric_bars(
    aggregates: Sequence[dict],
    path: str,
    title: str = "Detection performance",
) -> str:
    """Grouped bars of mean precision/recall/F-score per group.

    Expects dictionaries with keys cov_kind, detector, precision, recall,
    fscore, as produced by the simulation aggregation.
    """
    groups = [f"{a['cov_kind']}/{a['detector']}" for a in aggregates]
    metrics = ("precision", "recall", "fscore")
    x = np.arange(len(groups))
    width = 0.27

    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(groups) + 1.5), 3.4))
    for i, metric in enumerate(metrics):
        vals = [a[metric] for a in aggregates]
        ax.bar(x + (i - 1) * width, vals, width, label=metric)
    ax.set_xticks(x, groups, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    return _finish(fig, path, f"{len(groups)} groups")
