"""
Classical outlier filters behind the same Partition interface as DMNR.

SOR  : keep iff ad_n <= mean(ad) + alpha * std(ad)   (population std)
ROR  : keep iff >= min_neighbors other points within a fixed radius
DROR : ROR with a search radius that grows with planar range
"""

import logging
import math

import numpy as np

from dmnrlab.kernel.errors import EmptyCloudError, EmptyNeighborhoodError, InvalidParameterError
from dmnrlab.math.geometry import planar_ranges
from dmnrlab.math.spatial import build_index, density_profile
from dmnrlab.math.structs import Partition, PointCloud

logger = logging.getLogger(__name__)


def sor_baseline(cloud: PointCloud, K: int = 10, alpha: float = 1.0) -> Partition:
    """
    part = sor_baseline(cloud, K, alpha)
    Statistical outlier removal.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot filter an empty cloud")
    if len(cloud) < 2:
        raise EmptyNeighborhoodError("SOR needs at least two points")
    if alpha < 0:
        raise InvalidParameterError("alpha must be non-negative")

    prof = density_profile(build_index(cloud), K)
    std = float(np.std(prof.ad))
    limit = prof.mu + alpha * std if math.isfinite(alpha) else math.inf
    part = Partition(prof.ad <= limit)
    logger.info("sor: N=%d limit=%.4g kept=%d", len(cloud), limit, part.n_kept)
    return part


def ror_baseline(cloud: PointCloud, radius: float = 0.5, min_neighbors: int = 4) -> Partition:
    """
    part = ror_baseline(cloud, radius, min_neighbors)
    Radius outlier removal.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot filter an empty cloud")
    if not radius > 0:
        raise InvalidParameterError("radius must be positive")
    if min_neighbors <= 0:
        return Partition(np.ones(len(cloud), dtype=bool))

    counts = build_index(cloud).radius_counts(radius)
    part = Partition(counts >= min_neighbors)
    logger.info("ror: N=%d kept=%d", len(cloud), part.n_kept)
    return part


def dror_baseline(
    cloud: PointCloud,
    alpha_deg: float = 0.16,
    beta: float = 3.0,
    min_radius: float = 0.04,
    min_neighbors: int = 3,
) -> Partition:
    """
    part = dror_baseline(cloud, alpha_deg, beta, min_radius, min_neighbors)
    Dynamic radius outlier removal: r_n = max(min_radius, beta * rho_n * alpha),
    rho_n the planar range and alpha the horizontal angular resolution.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot filter an empty cloud")
    if not (alpha_deg > 0 and beta > 0 and min_radius > 0):
        raise InvalidParameterError("alpha_deg, beta and min_radius must be positive")
    if min_neighbors <= 0:
        return Partition(np.ones(len(cloud), dtype=bool))

    radius = np.maximum(min_radius, beta * planar_ranges(cloud.xyz) * np.deg2rad(alpha_deg))
    counts = build_index(cloud).radius_counts(radius)
    part = Partition(counts >= min_neighbors)
    logger.info("dror: N=%d kept=%d", len(cloud), part.n_kept)
    return part
