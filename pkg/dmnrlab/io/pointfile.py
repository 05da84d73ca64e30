"""
Binary frame files in the common LiDAR dataset layout.

points : packed little-endian float32 records (x, y, z, intensity), 16 bytes each
labels : packed little-endian uint32; semantic class = low 16 bits,
         the high 16 bits carry an instance id
"""

import logging
from pathlib import Path

import numpy as np

from dmnrlab.kernel.errors import LengthMismatchError, MalformedFileError, NonFiniteError
from dmnrlab.math.structs import PointCloud

logger = logging.getLogger(__name__)

POINT_DTYPE = np.dtype("<f4")
LABEL_DTYPE = np.dtype("<u4")
RECORD_BYTES = 4 * POINT_DTYPE.itemsize
SEMANTIC_MASK = 0xFFFF


def read_point_records(path) -> np.ndarray:
    """(N, 4) float32 array straight from disk, validated for size and finiteness."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % RECORD_BYTES:
        raise MalformedFileError(
            f"{path}: {len(raw)} bytes is not a multiple of {RECORD_BYTES}"
        )
    data = np.frombuffer(raw, dtype=POINT_DTYPE).reshape(-1, 4)
    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        raise NonFiniteError(int(np.flatnonzero(bad)[0]), f"{path}: non-finite value at point {int(np.flatnonzero(bad)[0])}")
    return data


def load_points(path, intensity_scale: float = 1.0) -> PointCloud:
    """
    cloud = load_points(path)
    Intensity is kept as stored unless ``intensity_scale`` says otherwise.
    """
    data = read_point_records(path)
    logger.debug("loaded %d points from %s", data.shape[0], path)
    cloud = PointCloud(data[:, :3], data[:, 3].astype(np.float64) * intensity_scale)
    return cloud


def load_labels(path, n: int) -> np.ndarray:
    """
    labels = load_labels(path, n)
    Semantic class ids (low 16 bits) as int64; the file must hold exactly n.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % LABEL_DTYPE.itemsize:
        raise MalformedFileError(f"{path}: {len(raw)} bytes is not a multiple of 4")
    values = np.frombuffer(raw, dtype=LABEL_DTYPE)
    if values.shape[0] != n:
        raise LengthMismatchError(f"{path}: {values.shape[0]} labels for {n} points")
    return (values & SEMANTIC_MASK).astype(np.int64)


def load_frame(points_path, labels_path=None, intensity_scale: float = 1.0) -> PointCloud:
    cloud = load_points(points_path, intensity_scale)
    if labels_path is None:
        return cloud
    return cloud.with_labels(load_labels(labels_path, len(cloud)))


def write_points(cloud: PointCloud, path) -> None:
    data = np.empty((len(cloud), 4), dtype=POINT_DTYPE)
    data[:, :3] = cloud.xyz
    data[:, 3] = cloud.intensity
    Path(path).write_bytes(data.tobytes())


def write_labels(labels, path) -> None:
    arr = np.asarray(labels)
    if (arr < 0).any() or (arr > 0xFFFFFFFF).any():
        raise ValueError("label values must fit in uint32")
    Path(path).write_bytes(arr.astype(LABEL_DTYPE).tobytes())
