"""Matplotlib figures written next to the delimited reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evalbench import AXES, FrontierPoint, frontier_points  # noqa: E402

RC = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}

AXIS_LABELS = {
    "params": "Parameters (1e6)",
    "msec": "Speed (msec/image)",
    "flops": "FLOPS (1e9, MAC)",
}
AXIS_SCALE = {"params": 1e-6, "msec": 1.0, "flops": 1e-9}


def _draw_frontier(ax, points: Sequence[FrontierPoint], axis: str) -> None:
    scale = AXIS_SCALE[axis]
    for fp in points:
        r = fp.report
        x = r.cost(axis) * scale
        ours = r.name.startswith("ViTSTR")
        ax.scatter(x, r.accuracy, s=28, marker="*" if ours else "o",
                   color="tab:red" if ours else "tab:blue", alpha=0.45 if fp.dominated else 1.0, zorder=3)
        ax.annotate(r.name, (x, r.accuracy), textcoords="offset points", xytext=(3, 3), fontsize=6)
    front = [fp.report for fp in points if not fp.dominated]
    if front:
        xs = [r.cost(axis) * scale for r in front]
        ys = [r.accuracy for r in front]
        ax.step(xs, ys, where="post", color="0.4", lw=1, ls="--", zorder=2)
    ax.set_xlabel(AXIS_LABELS[axis])
    ax.set_ylabel("Accuracy (%)")


def plot_frontier(points: Sequence[FrontierPoint], axis: str, path: str | Path, title: str | None = None) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 3.6), constrained_layout=True)
        _draw_frontier(ax, points, axis)
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_frontier_panels(reports, path: str | Path) -> Path:
    """Accuracy against each cost axis, one panel per axis."""
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, len(AXES), figsize=(13, 3.8), constrained_layout=True)
        for ax, axis in zip(axes, AXES):
            _draw_frontier(ax, frontier_points(reports, axis), axis)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_loss_curve(records, path: str | Path) -> Path:
    steps = [r.step for r in records]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 3.2), constrained_layout=True)
        ax.plot(steps, [r.loss for r in records], lw=1, color="tab:blue")
        ax.set_yscale("log")
        ax.set_xlabel("step")
        ax.set_ylabel("cross-entropy")
        twin = ax.twinx()
        twin.plot(steps, [r.train_acc for r in records], lw=1, color="tab:orange")
        twin.set_ylabel("train word accuracy (%)")
        twin.set_ylim(-2, 102)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_image_grid(images: Sequence[tuple[str, np.ndarray]], path: str | Path, ncols: int = 3) -> Path:
    nrows = int(np.ceil(len(images) / ncols))
    with plt.rc_context(RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=(3 * ncols, 1.3 * nrows + 0.3), squeeze=False)
        for ax in axes.ravel():
            ax.axis("off")
        for ax, (title, pixels) in zip(axes.ravel(), images):
            ax.imshow(pixels, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
            ax.set_title(title, fontsize=8)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_attention(image: np.ndarray, heatmaps: np.ndarray, labels: Sequence[str], path: str | Path) -> Path:
    """Image with one heatmap overlay per output position."""
    n = len(labels)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, n, figsize=(1.6 * n, 1.9), squeeze=False)
        for ax, heat, label in zip(axes[0], heatmaps, labels):
            ax.imshow(image, cmap="gray", interpolation="bilinear")
            ax.imshow(heat, cmap="jet", alpha=0.45, vmin=0, vmax=1)
            ax.set_title(label, fontsize=8)
            ax.axis("off")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
