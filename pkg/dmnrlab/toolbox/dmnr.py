"""
Dynamic multi-threshold noise removal.

Two stages over one frame:

1. Height retention. Each point gets a range-dependent height cutoff
   H_n = h1 / d_n + h2; points strictly above it are kept outright.
2. Dynamic density threshold. Remaining points are kept iff their mean
   neighbour distance ad_n is strictly below
   T_n = mu * (k1 * exp(k2 * d_n) + k3 * i_n) * d_n.

mu is taken over ALL points of the frame, including the ones stage 1 keeps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dmnrlab.kernel.errors import EmptyCloudError, EmptyNeighborhoodError
from dmnrlab.math.geometry import sensor_distances
from dmnrlab.math.spatial import DensityProfile, SpatialIndex, build_index, density_profile
from dmnrlab.math.structs import DmnrParams, HeightMode, Partition, PointCloud, Stage

logger = logging.getLogger(__name__)

# Guard for the 1/d term at the sensor origin (meters).
RANGE_EPS = 1e-6


@dataclass(frozen=True)
class HeightParams:
    h1: float
    h2: float


# ==========================================================
# STAGE 1: HEIGHT
# ==========================================================

def height_params(cloud: PointCloud, mode: Optional[HeightMode] = None) -> HeightParams:
    """
    hp = height_params(cloud, mode)
    adaptive -> (max(d)/2, min(z) - 1); fixed -> the configured constants.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("height constants need at least one point")
    mode = mode or HeightMode.adaptive()
    if not mode.is_adaptive:
        return HeightParams(mode.h1, mode.h2)
    d = sensor_distances(cloud.xyz)
    return HeightParams(float(d.max() / 2.0), float(cloud.z.min() - 1.0))


def height_threshold(d, hp: HeightParams):
    """H = h1 / max(d, eps) + h2. Accepts scalars or arrays."""
    d_arr = np.asarray(d, dtype=np.float64)
    H = hp.h1 / np.maximum(d_arr, RANGE_EPS) + hp.h2
    return float(H) if np.ndim(H) == 0 else H


# ==========================================================
# STAGE 2: DYNAMIC THRESHOLD
# ==========================================================

def dynamic_threshold(mu: float, d, i, params: DmnrParams):
    """T = mu * (k1 * e^(k2 d) + k3 i) * d. Accepts scalars or arrays."""
    d_arr = np.asarray(d, dtype=np.float64)
    i_arr = np.asarray(i, dtype=np.float64)
    T = mu * (params.k1 * np.exp(params.k2 * d_arr) + params.k3 * i_arr) * d_arr
    return float(T) if np.ndim(T) == 0 else T


# ==========================================================
# FULL FILTER
# ==========================================================

def classify(cloud: PointCloud, profile: DensityProfile, params: DmnrParams) -> Partition:
    """Apply both stages given a precomputed density profile."""
    d = sensor_distances(cloud.xyz)
    hp = height_params(cloud, params.height_mode)
    H = height_threshold(d, hp)
    T = dynamic_threshold(profile.mu, d, cloud.intensity, params)

    high = cloud.z > H
    dense = profile.ad < T

    stages = np.full(len(cloud), int(Stage.DENSITY_REJECTED), dtype=np.int8)
    stages[~high & dense] = Stage.DENSITY_RETAINED
    stages[high] = Stage.HEIGHT_RETAINED
    return Partition.from_stages(stages)


def dmnr(
    cloud: PointCloud,
    params: Optional[DmnrParams] = None,
    index: Optional[SpatialIndex] = None,
) -> Partition:
    """
    part = dmnr(cloud, params)
    Kept/outlier split with per-point stage tags, in input order.
    """
    params = params or DmnrParams()
    if len(cloud) == 0:
        raise EmptyCloudError("cannot filter an empty cloud")
    if len(cloud) < 2:
        raise EmptyNeighborhoodError("DMNR needs at least two points")

    if index is None:
        index = build_index(cloud)
    profile = density_profile(index, params.K)
    part = classify(cloud, profile, params)
    logger.info(
        "dmnr: N=%d mu=%.4g kept=%d outlier=%d", len(cloud), profile.mu,
        part.n_kept, part.n_outlier,
    )
    return part
