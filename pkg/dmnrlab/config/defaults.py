# dmnrlab/config/defaults.py
"""
Built-in defaults: published DMNR / DMNR-H settings, clustering and baseline
settings, and matplotlib rc defaults for the diagnostic plots.
"""

from __future__ import annotations

import matplotlib

# ==========================================================
# 1. FILTER PARAMETERS
# ==========================================================
DMNR_DEFAULTS = {
    "K": 10,
    "k1": 0.015,
    "k2": 0.055,
    "k3": 100.0,
    "h": 5,
    "height_mode": "adaptive",
    "h1": 100.0,
    "h2": -5.0,
    "rescue_rank": "count",
}

HDBSCAN_DEFAULTS = {
    "min_cluster_size": 50,
    "min_samples": 10,
}

BASELINE_DEFAULTS = {
    "sor_k": 10,
    "sor_alpha": 1.0,
    "ror_radius": 0.5,
    "ror_min_neighbors": 4,
    "dror_alpha_deg": 0.16,
    "dror_beta": 3.0,
    "dror_min_radius": 0.04,
    "dror_min_neighbors": 3,
}

IO_DEFAULTS = {
    "intensity_scale": 1.0,
    "noise_ids": (),
}

# ==========================================================
# 2. PLOT COLORS
# ==========================================================
KEPT_RGB = (0, 0, 255)
OUTLIER_RGB = (255, 0, 0)

# Stage palette, indexed by Stage code.
STAGE_RGB = {
    0: (128, 128, 128),  # untagged
    1: (0, 160, 255),    # height retained
    2: (0, 0, 255),      # density retained
    3: (255, 0, 0),      # density rejected
    4: (0, 200, 0),      # rescued
}


def apply():
    """Apply rc settings used by dmnrlab figures."""
    try:
        rc = matplotlib.rcParams
        rc["figure.constrained_layout.use"] = True
        rc["figure.dpi"] = 100
        rc["savefig.dpi"] = 200
        rc["savefig.bbox"] = "tight"
        rc["font.family"] = "sans-serif"
        rc["font.size"] = 10
        rc["axes.grid"] = True
        rc["grid.linestyle"] = "-"
        rc["grid.linewidth"] = 0.5
        rc["grid.alpha"] = 0.4
        rc["legend.frameon"] = True
        rc["legend.framealpha"] = 0.9
    except Exception:
        pass
