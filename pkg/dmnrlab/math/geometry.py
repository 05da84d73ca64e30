import numpy as np

from dmnrlab.math.structs import Point


def sensor_distance(p: Point) -> float:
    """
    d = sensor_distance(p)
    Euclidean range of a return from the sensor origin.
    """
    return float(np.sqrt(p.x * p.x + p.y * p.y + p.z * p.z))


def sensor_distances(xyz) -> np.ndarray:
    """Vectorised sensor_distance over an (N, 3) array."""
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    return np.sqrt((xyz * xyz).sum(axis=1))


def planar_ranges(xyz) -> np.ndarray:
    """Range projected onto the x-y plane."""
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    return np.hypot(xyz[:, 0], xyz[:, 1])


def pairwise_distances(a, b=None) -> np.ndarray:
    """Dense Euclidean distance matrix. Only meant for small clouds."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 3)
    b = a if b is None else np.asarray(b, dtype=np.float64).reshape(-1, 3)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))
