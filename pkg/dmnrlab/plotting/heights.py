"""
Height-versus-range diagnostic figure.

Scatter of z against sensor distance, noise/outliers in red and the rest in
blue, with the stage-1 height cutoff H(d) drawn on top. Rendered off-screen.
"""

from __future__ import annotations

import logging
from typing import Optional

import matplotlib
import numpy as np

from dmnrlab.config import defaults
from dmnrlab.math.geometry import sensor_distances
from dmnrlab.math.structs import HeightMode, PointCloud
from dmnrlab.toolbox.dmnr import height_params, height_threshold

logger = logging.getLogger(__name__)


def _pyplot():
    if matplotlib.get_backend().lower() != "agg":
        matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    defaults.apply()
    return plt


def plot_height_profile(
    cloud: PointCloud,
    path,
    flagged: Optional[np.ndarray] = None,
    mode: Optional[HeightMode] = None,
    title: str = "Height vs. range",
    flagged_label: str = "noise",
) -> None:
    """
    plot_height_profile(cloud, path, flagged)
    ``flagged`` marks the red points (ground-truth noise or filter outliers).
    """
    plt = _pyplot()
    d = sensor_distances(cloud.xyz)
    z = cloud.z
    flagged = np.zeros(len(cloud), dtype=bool) if flagged is None else np.asarray(flagged, dtype=bool)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    blue = np.array(defaults.KEPT_RGB) / 255.0
    red = np.array(defaults.OUTLIER_RGB) / 255.0
    ax.scatter(d[~flagged], z[~flagged], s=1, color=blue, label="clean", rasterized=True)
    if flagged.any():
        ax.scatter(d[flagged], z[flagged], s=1, color=red, label=flagged_label, rasterized=True)

    if len(cloud):
        hp = height_params(cloud, mode)
        grid = np.linspace(max(d.min(), 0.5), max(d.max(), 1.0), 400)
        H = height_threshold(grid, hp)
        ax.plot(grid, H, color="black", linewidth=1.2, label=f"H(d) = {hp.h1:.3g}/d + {hp.h2:.3g}")
        lo, hi = float(z.min()), float(z.max())
        ax.set_ylim(lo - 1.0, hi + 1.0)

    ax.set_xlabel("distance to sensor d [m]")
    ax.set_ylabel("height z [m]")
    ax.set_title(title)
    ax.legend(loc="upper right", markerscale=6)
    fig.savefig(path)
    plt.close(fig)
    logger.info("height profile written to %s", path)
