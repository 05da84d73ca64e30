"""
Cluster-based rescue of misjudged environment points (DMNR-H).

The whole raw frame is clustered; the h clusters holding the most kept points
are treated as environment structure, and every outlier inside them is moved
back to the kept set. Nothing ever moves from kept to outlier.
"""

import logging
from typing import Optional

import numpy as np

from dmnrlab.kernel.errors import LengthMismatchError
from dmnrlab.math.spatial import build_index
from dmnrlab.math.structs import DmnrParams, HdbscanParams, Partition, PointCloud, Stage
from dmnrlab.toolbox.dmnr import dmnr
from dmnrlab.toolbox.hdbscan import ClusterLabeling, hdbscan

logger = logging.getLogger(__name__)


def rank_clusters(partition: Partition, labeling: ClusterLabeling, rank: str = "count") -> np.ndarray:
    """
    Cluster ids ordered best first.
    count    : most kept members first
    fraction : highest kept share first
    Ties go to the larger cluster, then the smaller id.
    """
    k = labeling.cluster_count
    labels = labeling.labels
    clustered = labels >= 0
    total = np.bincount(labels[clustered], minlength=k).astype(np.float64)
    in_f = np.bincount(labels[clustered & partition.kept], minlength=k).astype(np.float64)
    primary = in_f / np.maximum(total, 1.0) if rank == "fraction" else in_f
    ids = np.arange(k)
    return np.lexsort((ids, -total, -primary))


def rescue(
    cloud: PointCloud,
    partition: Partition,
    labeling: ClusterLabeling,
    h: int,
    rank: str = "count",
) -> Partition:
    """
    part = rescue(cloud, partition, labeling, h)
    Move outliers that sit in the top-h clusters back to the kept set.
    """
    n = len(cloud)
    if len(partition) != n or len(labeling) != n:
        raise LengthMismatchError(
            f"cloud has {n} points, partition {len(partition)}, labels {len(labeling)}"
        )
    if h <= 0 or labeling.cluster_count == 0:
        return partition

    chosen = rank_clusters(partition, labeling, rank)[: min(h, labeling.cluster_count)]
    moved = partition.outlier & np.isin(labeling.labels, chosen)
    if not moved.any():
        return partition

    stages = (
        np.array(partition.stages, copy=True)
        if partition.stages is not None
        else np.zeros(n, dtype=np.int8)
    )
    stages[moved] = Stage.RESCUED
    logger.info(
        "rescue: %d outliers moved back from %d cluster(s)", int(moved.sum()), len(chosen)
    )
    return Partition(partition.kept | moved, stages)


def dmnr_h(
    cloud: PointCloud,
    params: Optional[DmnrParams] = None,
    hparams: Optional[HdbscanParams] = None,
) -> Partition:
    """
    part = dmnr_h(cloud, params, hparams)
    DMNR, then HDBSCAN on the full frame, then rescue of the top params.h clusters.
    """
    params = params or DmnrParams()
    hparams = hparams or HdbscanParams()

    index = build_index(cloud) if len(cloud) else None
    part = dmnr(cloud, params, index=index)
    if params.h == 0 or part.n_outlier == 0:
        return part

    labeling = hdbscan(cloud, hparams, index=index)
    return rescue(cloud, part, labeling, params.h, params.rescue_rank)
