"""
Coloured point export in the polygon file format (PLY).

Kept points are blue and outliers red; the ``stage`` palette colours each
point by the rule that decided it instead.
"""

import logging
from pathlib import Path

import numpy as np

from dmnrlab.config.defaults import KEPT_RGB, OUTLIER_RGB, STAGE_RGB
from dmnrlab.kernel.errors import LengthMismatchError, MalformedFileError
from dmnrlab.math.structs import Partition, PointCloud

logger = logging.getLogger(__name__)

VERTEX_DTYPE = np.dtype([
    ("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
    ("red", "u1"), ("green", "u1"), ("blue", "u1"),
])

FORMATS = ("ascii", "binary")
PALETTES = ("verdict", "stage")


def vertex_colors(partition: Partition, palette: str = "verdict") -> np.ndarray:
    """(N, 3) uint8 colours."""
    n = len(partition)
    if palette == "stage" and partition.stages is not None:
        lut = np.zeros((8, 3), dtype=np.uint8)
        for code, rgb in STAGE_RGB.items():
            lut[code] = rgb
        return lut[partition.stages.astype(np.int64)]
    rgb = np.empty((n, 3), dtype=np.uint8)
    rgb[partition.kept] = KEPT_RGB
    rgb[~partition.kept] = OUTLIER_RGB
    return rgb


def _header(n: int, fmt: str) -> str:
    kind = "ascii" if fmt == "ascii" else "binary_little_endian"
    return (
        "ply\n"
        f"format {kind} 1.0\n"
        "comment dmnrlab partition export\n"
        f"element vertex {n}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )


def write_colored(cloud: PointCloud, partition: Partition, path, format: str = "binary", palette: str = "verdict") -> None:
    """
    write_colored(cloud, partition, path, format)
    format is 'ascii' or 'binary' (little endian).
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    if palette not in PALETTES:
        raise ValueError(f"palette must be one of {PALETTES}")
    if len(partition) != len(cloud):
        raise LengthMismatchError(f"partition has {len(partition)} verdicts for {len(cloud)} points")

    verts = np.empty(len(cloud), dtype=VERTEX_DTYPE)
    verts["x"], verts["y"], verts["z"] = cloud.x, cloud.y, cloud.z
    rgb = vertex_colors(partition, palette)
    verts["red"], verts["green"], verts["blue"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]

    path = Path(path)
    with open(path, "wb") as f:
        f.write(_header(len(cloud), format).encode("ascii"))
        if format == "binary":
            f.write(verts.tobytes())
        else:
            table = np.column_stack([cloud.xyz.astype(np.float32).astype(np.float64), rgb])
            np.savetxt(f, table, fmt=["%.9g"] * 3 + ["%d"] * 3, delimiter=" ")
    logger.info("wrote %d vertices to %s (%s)", len(cloud), path, format)


def read_ply(path) -> np.ndarray:
    """Read back a file written by write_colored as a VERTEX_DTYPE array."""
    raw = Path(path).read_bytes()
    end = raw.find(b"end_header\n")
    if not raw.startswith(b"ply\n") or end < 0:
        raise MalformedFileError(f"{path}: not a PLY file")
    header = raw[:end].decode("ascii").splitlines()
    body = raw[end + len(b"end_header\n"):]

    fmt = next(line.split()[1] for line in header if line.startswith("format"))
    n = next(int(line.split()[2]) for line in header if line.startswith("element vertex"))

    if fmt == "binary_little_endian":
        if len(body) != n * VERTEX_DTYPE.itemsize:
            raise MalformedFileError(f"{path}: body does not hold {n} vertices")
        return np.frombuffer(body, dtype=VERTEX_DTYPE).copy()

    out = np.empty(n, dtype=VERTEX_DTYPE)
    lines = [ln for ln in body.decode("ascii").splitlines() if ln.strip()]
    if len(lines) != n:
        raise MalformedFileError(f"{path}: {len(lines)} vertex lines, header says {n}")
    for i, line in enumerate(lines):
        x, y, z, r, g, b = line.split()
        out[i] = (float(x), float(y), float(z), int(r), int(g), int(b))
    return out
