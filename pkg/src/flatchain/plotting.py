"""Figures written next to the JSON/CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .chain import Chain  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 9,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(width=5.0, height=None):
    golden = (np.sqrt(5) - 1.0) / 2.0
    return plt.figure(figsize=(width, height or width * golden))


def plot_label_map(f, labels, path, title="finest partition"):
    """Raster values beside the block labels (-1 shown blank)."""
    f = np.asarray(f, dtype=float)
    labels = np.asarray(labels)
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8, 3.6))
        lim = max(1e-12, np.abs(f).max())
        im = ax0.imshow(f, cmap="RdBu_r", vmin=-lim, vmax=lim, origin="upper")
        fig.colorbar(im, ax=ax0, shrink=0.8)
        ax0.set_title("f")
        masked = np.ma.masked_less(labels, 0)
        ax1.imshow(masked, cmap="tab20", origin="upper", interpolation="nearest")
        for idx in zip(*np.nonzero(labels >= 0)):
            if labels.size <= 400:
                ax1.text(idx[1], idx[0], str(labels[idx]), ha="center", va="center", fontsize=7)
        ax1.set_title(title)
        for ax in (ax0, ax1):
            ax.set_xticks([])
            ax.set_yticks([])
        fig.savefig(path)
        plt.close(fig)


def plot_cost(h, path, smin=2.0 ** -30, smax=2.0):
    """h(s) and h(s)/s on log axes."""
    s = np.logspace(np.log10(smin), np.log10(smax), 400)
    hs = np.array([h(x) for x in s])
    with plt.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        ax.loglog(s, hs, label="h(s)")
        ax.loglog(s, hs / s, label="h(s)/s")
        ax.loglog(s, s, ":", color="gray", label="s")
        ax.set_xlabel("s")
        ax.legend(loc="best", frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_chain_parts(A: Chain, partition, path):
    """Planar chains only: each part in its own colour (1-cells as segments, 2-cells as squares)."""
    if A.n != 2:
        raise ValueError("part plots need ambient dimension 2")
    cmap = plt.get_cmap("tab10")
    with plt.rc_context(STYLE):
        fig = _figure(4.5, 4.5)
        ax = fig.add_subplot(111, aspect="equal")
        for i, block in enumerate(partition):
            color = cmap(i % 10)
            for cell in block:
                x, y = cell.anchor
                if A.k == 0:
                    ax.plot([x], [y], "o", color=color)
                elif A.k == 1:
                    dx, dy = (1, 0) if cell.axes == (0,) else (0, 1)
                    ax.annotate("", xy=(x + dx, y + dy), xytext=(x, y),
                                arrowprops={"arrowstyle": "-|>", "color": color, "lw": 1.5})
                else:
                    ax.add_patch(plt.Rectangle((x, y), 1, 1, color=color, alpha=0.6))
        box = A.bounding_box()
        if box:
            (x0, y0), (x1, y1) = box
            ax.set_xlim(x0 - 0.5, x1 + 0.5)
            ax.set_ylim(y0 - 0.5, y1 + 0.5)
        ax.set_title(f"{len(partition)} parts")
        fig.savefig(path)
        plt.close(fig)
