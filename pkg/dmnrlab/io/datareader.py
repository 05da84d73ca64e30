"""
Dataset discovery: pair point files with label files by shared stem.

Flat layout   : <points_dir>/<stem>.bin  +  <labels_dir>/<stem>.label
Sequence layout (SemanticKITTI-style, as WADS is distributed):
                <root>/<seq>/velodyne/<stem>.bin + <root>/<seq>/labels/<stem>.label
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

from dmnrlab.io.pointfile import load_labels, load_points
from dmnrlab.kernel.errors import UnpairedFileError
from dmnrlab.math.structs import PointCloud

logger = logging.getLogger(__name__)

POINT_SUFFIX = ".bin"
LABEL_SUFFIX = ".label"

# Sequences with usable snow annotations.
WADS_SEQUENCES = ("13", "23", "24", "26", "28", "30", "34", "35", "36")


@dataclass(frozen=True)
class FrameFiles:
    points_path: Path
    labels_path: Optional[Path] = None
    frame_id: str = ""
    intensity_scale: float = 1.0

    def load(self) -> Tuple[PointCloud, Optional[np.ndarray]]:
        cloud = load_points(self.points_path, self.intensity_scale)
        labels = None
        if self.labels_path is not None:
            labels = load_labels(self.labels_path, len(cloud))
        return cloud, labels


def _by_stem(directory: Path, suffix: str) -> dict:
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return {p.stem: p for p in sorted(directory.glob(f"*{suffix}")) if p.is_file()}


def pair_frames(points_dir, labels_dir=None, prefix: str = "", intensity_scale: float = 1.0) -> List[FrameFiles]:
    """
    frames = pair_frames(points_dir, labels_dir)
    Any point file without a label file (or the reverse) is an error.
    """
    pts = _by_stem(Path(points_dir), POINT_SUFFIX)
    if labels_dir is None:
        return [
            FrameFiles(p, None, f"{prefix}{stem}", intensity_scale)
            for stem, p in sorted(pts.items())
        ]

    labs = _by_stem(Path(labels_dir), LABEL_SUFFIX)
    only_pts = sorted(set(pts) - set(labs))
    only_labs = sorted(set(labs) - set(pts))
    if only_pts or only_labs:
        raise UnpairedFileError(
            f"unpaired frames in {points_dir} / {labels_dir}: "
            f"no labels for {only_pts[:5]}, no points for {only_labs[:5]}"
        )
    return [
        FrameFiles(pts[s], labs[s], f"{prefix}{s}", intensity_scale)
        for s in sorted(pts)
    ]


def wads_frames(root, sequences: Iterable[str] = WADS_SEQUENCES, intensity_scale: float = 1.0) -> List[FrameFiles]:
    """Frames of the given sequences under a SemanticKITTI-style root."""
    root = Path(root)
    sequences = tuple(str(s) for s in sequences)
    frames: List[FrameFiles] = []
    for seq in sequences:
        seq_dir = root / str(seq)
        frames.extend(
            pair_frames(
                seq_dir / "velodyne", seq_dir / "labels",
                prefix=f"{seq}/", intensity_scale=intensity_scale,
            )
        )
    logger.info("found %d frames in %d sequence(s) under %s", len(frames), len(sequences), root)
    return frames


def input_files(path) -> List[Path]:
    """A single point file, or every point file in a directory."""
    path = Path(path)
    if path.is_dir():
        return sorted(p for p in path.glob(f"*{POINT_SUFFIX}") if p.is_file())
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return [path]
