"""Scatter plots written as SVG.  Output is byte-stable for fixed input."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "twistlab"
plt.rcParams["svg.fonttype"] = "path"

_MAX_POINTS = 20_000


def _thin(*cols):
    n = len(cols[0])
    if n <= _MAX_POINTS:
        return cols
    idx = np.linspace(0, n - 1, _MAX_POINTS).astype(int)
    return tuple(np.asarray(c)[idx] for c in cols)


def scatter_svg(path, x, y, *, xlabel: str, ylabel: str, title: str = "",
                c=None, size: float = 2.0, equal: bool = False) -> Path:
    """One scatter panel saved as SVG without date metadata."""
    path = Path(path)
    cols = (np.asarray(x), np.asarray(y)) + ((np.asarray(c),) if c is not None else ())
    cols = _thin(*cols)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    kw = {"s": size, "linewidths": 0}
    if c is not None:
        kw.update(c=cols[2], cmap="viridis")
    ax.scatter(cols[0], cols[1], **kw)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if equal:
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
