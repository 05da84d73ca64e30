"""
dmnrlab.math.structs

Value types shared by every stage of the toolkit: points, frames, filter
parameters and the kept/outlier partition a filter returns.

All array-backed records are frozen and mark their arrays read-only, so a
frame can be handed to several workers without copies or locks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, NamedTuple, Optional

import numpy as np

from dmnrlab.kernel.errors import (
    InvalidParameterError,
    LengthMismatchError,
    NonFiniteError,
)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ==========================================================
# POINTS & FRAMES
# ==========================================================

class Point(NamedTuple):
    """One LiDAR return: position in meters plus raw intensity."""
    x: float
    y: float
    z: float
    intensity: float


@dataclass(frozen=True, eq=False)
class PointCloud:
    """
    One frame, stored column-wise.

    xyz       : (N, 3) float64 positions in meters
    intensity : (N,)   float64 reflectance as stored in the source file
    labels    : (N,)   int64 semantic class ids, or None
    """
    xyz: np.ndarray
    intensity: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        xyz = np.array(self.xyz, dtype=np.float64, copy=True).reshape(-1, 3)
        inten = np.array(self.intensity, dtype=np.float64, copy=True).reshape(-1)
        if inten.shape[0] != xyz.shape[0]:
            raise LengthMismatchError(
                f"{xyz.shape[0]} positions but {inten.shape[0]} intensities"
            )

        bad = ~(np.isfinite(xyz).all(axis=1) & np.isfinite(inten))
        if bad.any():
            raise NonFiniteError(int(np.flatnonzero(bad)[0]))

        labels = None
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
            if labels.shape[0] != xyz.shape[0]:
                raise LengthMismatchError(
                    f"{labels.shape[0]} labels for {xyz.shape[0]} points"
                )
            if (labels < 0).any():
                raise InvalidParameterError("class ids must be non-negative")
            labels = _frozen(labels)

        object.__setattr__(self, "xyz", _frozen(xyz))
        object.__setattr__(self, "intensity", _frozen(inten))
        object.__setattr__(self, "labels", labels)

    # ------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------
    @classmethod
    def from_array(cls, data, labels=None) -> "PointCloud":
        """Build from an (N, 4) array of x, y, z, intensity."""
        arr = np.asarray(data, dtype=np.float64).reshape(-1, 4)
        return cls(arr[:, :3], arr[:, 3], labels)

    @classmethod
    def from_points(cls, points: Iterable[Point], labels=None) -> "PointCloud":
        rows = [tuple(p) for p in points]
        return cls.from_array(np.array(rows, dtype=np.float64).reshape(-1, 4), labels)

    # ------------------------------------------------------------
    # Column access
    # ------------------------------------------------------------
    @property
    def x(self) -> np.ndarray:
        return self.xyz[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xyz[:, 1]

    @property
    def z(self) -> np.ndarray:
        return self.xyz[:, 2]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def __len__(self) -> int:
        return self.xyz.shape[0]

    def __getitem__(self, n: int) -> Point:
        x, y, z = self.xyz[n]
        return Point(float(x), float(y), float(z), float(self.intensity[n]))

    def with_labels(self, labels) -> "PointCloud":
        return PointCloud(self.xyz, self.intensity, labels)

    def with_intensity(self, intensity) -> "PointCloud":
        return PointCloud(self.xyz, intensity, self.labels)

    def translated(self, dx: float = 0.0, dy: float = 0.0, dz: float = 0.0) -> "PointCloud":
        return PointCloud(self.xyz + np.array([dx, dy, dz]), self.intensity, self.labels)

    def scaled(self, s: float) -> "PointCloud":
        return PointCloud(self.xyz * s, self.intensity, self.labels)

    def __repr__(self):
        lab = "labelled" if self.has_labels else "unlabelled"
        return f"<PointCloud N={len(self)} {lab}>"


# ==========================================================
# FILTER PARAMETERS
# ==========================================================

@dataclass(frozen=True)
class HeightMode:
    """
    How the stage-1 height constants are chosen.

    adaptive : h1 = max(d)/2, h2 = min(z) - 1, recomputed per frame
    fixed    : the configured (h1, h2); the defaults give H = 100/d - 5
    """
    kind: str = "adaptive"
    h1: float = 100.0
    h2: float = -5.0

    def __post_init__(self):
        if self.kind not in ("adaptive", "fixed"):
            raise InvalidParameterError(f"unknown height mode '{self.kind}'")

    @classmethod
    def adaptive(cls) -> "HeightMode":
        return cls("adaptive")

    @classmethod
    def fixed(cls, h1: float = 100.0, h2: float = -5.0) -> "HeightMode":
        return cls("fixed", float(h1), float(h2))

    @property
    def is_adaptive(self) -> bool:
        return self.kind == "adaptive"


RESCUE_RANKS = ("count", "fraction")


@dataclass(frozen=True)
class DmnrParams:
    """DMNR / DMNR-H parameters. Defaults are the published settings."""
    K: int = 10
    k1: float = 0.015
    k2: float = 0.055
    k3: float = 100.0
    h: int = 5
    height_mode: HeightMode = field(default_factory=HeightMode)
    rescue_rank: str = "count"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise InvalidParameterError(f"K must be a positive integer, got {self.K}")
        if not self.k1 > 0:
            raise InvalidParameterError(f"k1 must be positive, got {self.k1}")
        if not self.k2 > 0:
            raise InvalidParameterError(f"k2 must be positive, got {self.k2}")
        if not self.k3 >= 0:
            raise InvalidParameterError(f"k3 must be non-negative, got {self.k3}")
        if int(self.h) != self.h or self.h < 0:
            raise InvalidParameterError(f"h must be a non-negative integer, got {self.h}")
        if self.rescue_rank not in RESCUE_RANKS:
            raise InvalidParameterError(f"rescue_rank must be one of {RESCUE_RANKS}")


@dataclass(frozen=True)
class HdbscanParams:
    min_cluster_size: int = 50
    min_samples: int = 10
    allow_single_cluster: bool = False

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise InvalidParameterError("min_cluster_size must be >= 2")
        if self.min_samples < 1:
            raise InvalidParameterError("min_samples must be >= 1")


# ==========================================================
# FILTER OUTPUT
# ==========================================================

class Verdict(IntEnum):
    OUTLIER = 0
    KEPT = 1


class Stage(IntEnum):
    """Which rule decided a point. UNTAGGED is used by the baselines."""
    UNTAGGED = 0
    HEIGHT_RETAINED = 1
    DENSITY_RETAINED = 2
    DENSITY_REJECTED = 3
    RESCUED = 4


_KEEP_STAGES = (Stage.HEIGHT_RETAINED, Stage.DENSITY_RETAINED, Stage.RESCUED)


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Split of a frame into kept points F and outliers O.

    kept   : (N,) bool, True for F
    stages : (N,) int8 Stage codes, or None when the filter does not tag
    """
    kept: np.ndarray
    stages: Optional[np.ndarray] = None

    def __post_init__(self):
        kept = np.array(self.kept, dtype=bool, copy=True).reshape(-1)
        stages = None
        if self.stages is not None:
            stages = np.array(self.stages, dtype=np.int8, copy=True).reshape(-1)
            if stages.shape != kept.shape:
                raise LengthMismatchError(
                    f"{stages.shape[0]} stage tags for {kept.shape[0]} verdicts"
                )
            tagged = stages != Stage.UNTAGGED
            keep_tag = np.isin(stages, [int(s) for s in _KEEP_STAGES])
            if (keep_tag[tagged] != kept[tagged]).any():
                raise InvalidParameterError("stage tags disagree with verdicts")
            stages = _frozen(stages)
        object.__setattr__(self, "kept", _frozen(kept))
        object.__setattr__(self, "stages", stages)

    @classmethod
    def from_stages(cls, stages) -> "Partition":
        stages = np.asarray(stages, dtype=np.int8)
        kept = np.isin(stages, [int(s) for s in _KEEP_STAGES])
        return cls(kept, stages)

    def __len__(self) -> int:
        return self.kept.shape[0]

    @property
    def outlier(self) -> np.ndarray:
        return ~self.kept

    @property
    def verdicts(self) -> np.ndarray:
        """(N,) uint8 Verdict codes."""
        return np.where(self.kept, Verdict.KEPT, Verdict.OUTLIER).astype(np.uint8)

    @property
    def n_kept(self) -> int:
        return int(np.count_nonzero(self.kept))

    @property
    def n_outlier(self) -> int:
        return len(self) - self.n_kept

    def outlier_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.kept)

    def stage_counts(self) -> dict:
        if self.stages is None:
            return {}
        return {s.name: int(np.count_nonzero(self.stages == s)) for s in Stage}

    def same_as(self, other: "Partition") -> bool:
        return bool(np.array_equal(self.kept, other.kept))

    def __repr__(self):
        return f"<Partition N={len(self)} kept={self.n_kept} outlier={self.n_outlier}>"

