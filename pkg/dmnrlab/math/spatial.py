"""
dmnrlab.math.spatial

Exact nearest-neighbour machinery over one frame.

Neighbourhoods always EXCLUDE the query point itself. Note on naming: the
quantity usually called "local average density" is stored here as ``ad``, the
mean distance (meters) to the K nearest other points, so a SMALLER ad means a
DENSER neighbourhood. ``mu`` is the frame mean of ad.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from dmnrlab.kernel.errors import EmptyCloudError, EmptyNeighborhoodError
from dmnrlab.math.structs import PointCloud

logger = logging.getLogger(__name__)


class TreeNodes(NamedTuple):
    """
    The k-d tree flattened in pre-order, so children come after their parent.

    Points of node k are perm[start[k]:end[k]]; leaves have
    lesser == greater == -1.
    """
    perm: np.ndarray
    start: np.ndarray
    end: np.ndarray
    lesser: np.ndarray
    greater: np.ndarray
    depth: int


class SpatialIndex:
    """
    Balanced k-d tree over the positions of one frame.

    Row n of the index is point n of the source cloud. The tree is read-only
    after construction, so any number of threads may query it.
    """

    def __init__(self, xyz: np.ndarray, workers: int = -1):
        xyz = np.ascontiguousarray(xyz, dtype=np.float64).reshape(-1, 3)
        if xyz.shape[0] == 0:
            raise EmptyCloudError("cannot index an empty cloud")
        self._xyz = xyz
        self._xyz.setflags(write=False)
        self._tree = cKDTree(xyz, balanced_tree=True, compact_nodes=True)
        self.workers = workers
        self._nodes: Optional[TreeNodes] = None

    @property
    def n(self) -> int:
        return self._xyz.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self._xyz

    def __len__(self) -> int:
        return self.n

    def __repr__(self):
        return f"<SpatialIndex N={self.n}>"

    # ------------------------------------------------------------
    # Raw queries
    # ------------------------------------------------------------
    def nearest(self, query, k: int = 1):
        """Nearest k indexed points to arbitrary positions (self not excluded)."""
        q = np.asarray(query, dtype=np.float64).reshape(-1, 3)
        k = min(int(k), self.n)
        dist, idx = self._tree.query(q, k=k, workers=self.workers)
        return dist.reshape(q.shape[0], k), idx.reshape(q.shape[0], k)

    def neighbors(self, rows, k: int):
        """
        dist, idx = neighbors(rows, k)
        The k nearest OTHER points of the indexed points ``rows``, sorted by
        distance. Caps k at N-1.
        """
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        if self.n < 2:
            raise EmptyNeighborhoodError("a single point has no neighbours")
        k_eff = min(int(k), self.n - 1)

        _, idx = self._tree.query(self._xyz[rows], k=k_eff + 1, workers=self.workers)
        idx = idx.reshape(rows.shape[0], k_eff + 1)

        # Drop self. With coincident points the tree may return a twin
        # instead of self; then drop the farthest entry.
        drop = idx == rows[:, None]
        missing = ~drop.any(axis=1)
        drop[missing, -1] = True
        first = np.cumsum(drop, axis=1) == 1
        drop &= first
        idx = idx[~drop].reshape(rows.shape[0], k_eff)

        diff = self._xyz[idx] - self._xyz[rows][:, None, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        order = np.argsort(dist, axis=1, kind="stable")
        dist = np.take_along_axis(dist, order, axis=1)
        idx = np.take_along_axis(idx, order, axis=1)
        return dist, idx

    def radius_counts(self, radius) -> np.ndarray:
        """Number of OTHER points within ``radius`` (scalar or per point) of each point."""
        r = np.broadcast_to(np.asarray(radius, dtype=np.float64), (self.n,))
        counts = self._tree.query_ball_point(
            self._xyz, r, return_length=True, workers=self.workers
        )
        return np.asarray(counts, dtype=np.int64) - 1

    # ------------------------------------------------------------
    # Tree layout (for compiled traversals)
    # ------------------------------------------------------------
    def nodes(self) -> TreeNodes:
        if self._nodes is None:
            start, end, lesser, greater = [], [], [], []
            depth = 0
            stack = [(self._tree.tree, -1, 0, 0)]
            while stack:
                node, parent, side, level = stack.pop()
                k = len(start)
                start.append(node.start_idx)
                end.append(node.end_idx)
                lesser.append(-1)
                greater.append(-1)
                depth = max(depth, level)
                if parent >= 0:
                    (lesser if side == 0 else greater)[parent] = k
                if node.lesser is not None and node.greater is not None:
                    stack.append((node.greater, k, 1, level + 1))
                    stack.append((node.lesser, k, 0, level + 1))
            self._nodes = TreeNodes(
                perm=np.ascontiguousarray(self._tree.indices, dtype=np.int64),
                start=np.asarray(start, dtype=np.int64),
                end=np.asarray(end, dtype=np.int64),
                lesser=np.asarray(lesser, dtype=np.int64),
                greater=np.asarray(greater, dtype=np.int64),
                depth=depth,
            )
            logger.debug("k-d tree: %d nodes, depth %d", len(start), depth)
        return self._nodes


@dataclass(frozen=True, eq=False)
class DensityProfile:
    ad: np.ndarray
    mu: float

    def __repr__(self):
        return f"<DensityProfile N={self.ad.shape[0]} mu={self.mu:.6g}>"


# ==========================================================
# OPERATIONS
# ==========================================================

def build_index(cloud: PointCloud, workers: int = -1) -> SpatialIndex:
    if len(cloud) == 0:
        raise EmptyCloudError("cannot index an empty cloud")
    return SpatialIndex(cloud.xyz, workers=workers)


def knn_distances(index: SpatialIndex, K: int) -> np.ndarray:
    """(N, min(K, N-1)) sorted distances to the nearest other points."""
    if K < 1:
        raise ValueError("K must be >= 1")
    dist, _ = index.neighbors(np.arange(index.n), K)
    return dist


def knn_mean_distance(index: SpatialIndex, query_index: int, K: int) -> float:
    """
    ad = knn_mean_distance(index, n, K)
    Mean distance from point n to its K nearest other points.
    """
    if not 0 <= query_index < index.n:
        raise IndexError(f"point {query_index} outside 0..{index.n - 1}")
    if K < 1:
        raise ValueError("K must be >= 1")
    dist, _ = index.neighbors([query_index], K)
    return float(dist[0].mean())


def density_profile(index: SpatialIndex, K: int) -> DensityProfile:
    """
    prof = density_profile(index, K)
    Per-point mean neighbour distance and the frame mean mu.

    mu is an exactly rounded sum (math.fsum) over ad in index order, so it
    does not depend on how the KNN queries were scheduled.
    """
    if index.n < 2:
        raise EmptyNeighborhoodError("density needs at least two points")
    ad = knn_distances(index, K).mean(axis=1)
    ad.setflags(write=False)
    mu = math.fsum(ad.tolist()) / ad.shape[0]
    logger.debug("density profile: N=%d K=%d mu=%.6g", ad.shape[0], K, mu)
    return DensityProfile(ad=ad, mu=mu)
