"""
Seeded synthetic frames with exact ground truth.

Scene: a flat ground patch around a sensor at the origin, a few vertical
walls at 15-40 m, and airborne clutter shaped like snow returns: sparse,
low intensity and close to the sensor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from typing import Any, Dict, Mapping, Tuple

import numpy as np

from dmnrlab.kernel.errors import InvalidSpecError
from dmnrlab.math.structs import PointCloud

logger = logging.getLogger(__name__)

GROUND_CLASS = 40
WALL_CLASS = 50
CLUTTER_CLASS = 110


@dataclass(frozen=True)
class WallSpec:
    """Vertical rectangle standing on the ground, centred at (cx, cy)."""
    cx: float
    cy: float
    length: float
    height: float
    yaw_deg: float = 0.0


DEFAULT_WALLS: Tuple[WallSpec, ...] = (
    WallSpec(25.0, 0.0, 20.0, 6.0, 90.0),
    WallSpec(-30.0, 10.0, 16.0, 8.0, 90.0),
    WallSpec(0.0, 35.0, 24.0, 5.0, 0.0),
    WallSpec(10.0, -20.0, 12.0, 4.0, 0.0),
)


@dataclass(frozen=True)
class SynthSpec:
    n_points: int = 20000
    ground_extent: float = 50.0
    ground_height: float = -1.7
    ground_z_noise: float = 0.02
    walls: Tuple[WallSpec, ...] = DEFAULT_WALLS
    wall_fraction: float = 0.15
    wall_jitter: float = 0.02
    clutter_fraction: float = 0.05
    clutter_min_range: float = 1.0
    clutter_max_range: float = 4.0
    clutter_intensity_max: float = 0.0005
    clean_intensity_min: float = 0.05
    clean_intensity_max: float = 0.6
    high_intensity_clutter: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.n_points < 2:
            raise InvalidSpecError("n_points must be at least 2")
        if not 0.0 <= self.clutter_fraction < 1.0:
            raise InvalidSpecError("clutter_fraction must be in [0, 1)")
        if not 0.0 <= self.wall_fraction < 1.0:
            raise InvalidSpecError("wall_fraction must be in [0, 1)")
        if not self.ground_extent > 0:
            raise InvalidSpecError("ground_extent must be positive")
        if not 0.0 < self.clutter_min_range < self.clutter_max_range:
            raise InvalidSpecError("need 0 < clutter_min_range < clutter_max_range")
        if self.clutter_max_range + self.ground_height <= 0.1:
            raise InvalidSpecError("clutter_max_range does not reach above the ground")
        if self.clutter_intensity_max < 0:
            raise InvalidSpecError("clutter_intensity_max must be non-negative")
        if not 0.0 <= self.clean_intensity_min <= self.clean_intensity_max:
            raise InvalidSpecError("clean intensity range is empty")
        if self.ground_z_noise < 0 or self.wall_jitter < 0:
            raise InvalidSpecError("noise levels must be non-negative")
        for w in self.walls:
            if w.length <= 0 or w.height <= 0:
                raise InvalidSpecError(f"degenerate wall {w}")

    @property
    def n_clutter(self) -> int:
        return int(math.floor(self.clutter_fraction * self.n_points))


# ==========================================================
# SCENE PARTS
# ==========================================================

def _ground(rng, spec: SynthSpec, n: int) -> np.ndarray:
    e = spec.ground_extent
    xy = rng.uniform(-e, e, size=(n, 2))
    z = spec.ground_height + rng.normal(0.0, spec.ground_z_noise, size=n) if spec.ground_z_noise else np.full(n, spec.ground_height)
    return np.column_stack([xy, z])


def _walls(rng, spec: SynthSpec, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 3))
    areas = np.array([w.length * w.height for w in spec.walls])
    # Largest-remainder split so the wall counts add up to n exactly.
    share = areas / areas.sum() * n
    counts = np.floor(share).astype(np.int64)
    rest = n - counts.sum()
    counts[np.argsort(-(share - counts), kind="stable")[:rest]] += 1

    parts = []
    for w, c in zip(spec.walls, counts):
        yaw = np.deg2rad(w.yaw_deg)
        along = rng.uniform(-w.length / 2, w.length / 2, size=c)
        up = rng.uniform(0.0, w.height, size=c)
        off = rng.normal(0.0, spec.wall_jitter, size=c) if spec.wall_jitter else np.zeros(c)
        x = w.cx + along * np.cos(yaw) - off * np.sin(yaw)
        y = w.cy + along * np.sin(yaw) + off * np.cos(yaw)
        parts.append(np.column_stack([x, y, spec.ground_height + up]))
    return np.vstack(parts)


def _clutter(rng, spec: SynthSpec, n: int) -> np.ndarray:
    """Uniform in the volume of the range shell, above the ground."""
    out = np.zeros((0, 3))
    floor = spec.ground_height + 0.1
    r0, r1 = spec.clutter_min_range ** 3, spec.clutter_max_range ** 3
    while out.shape[0] < n:
        m = max(2 * (n - out.shape[0]), 64)
        v = rng.normal(size=(m, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        r = np.cbrt(rng.uniform(r0, r1, size=m))
        pts = v * r[:, None]
        out = np.vstack([out, pts[pts[:, 2] >= floor]])
    return out[:n]


# ==========================================================
# GENERATOR
# ==========================================================

def generate_synthetic(spec: SynthSpec = SynthSpec()) -> Tuple[PointCloud, np.ndarray]:
    """
    cloud, noise = generate_synthetic(spec)
    cloud carries class labels; noise is the boolean ground-truth mask.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)

    n_clutter = spec.n_clutter
    n_clean = spec.n_points - n_clutter
    n_wall = int(round(spec.wall_fraction * n_clean)) if spec.walls else 0
    n_ground = n_clean - n_wall

    ground = _ground(rng, spec, n_ground)
    walls = _walls(rng, spec, n_wall)
    clutter = _clutter(rng, spec, n_clutter)

    clean_i = rng.uniform(spec.clean_intensity_min, spec.clean_intensity_max, size=n_clean)
    if spec.high_intensity_clutter:
        clutter_i = rng.uniform(spec.clean_intensity_min, spec.clean_intensity_max, size=n_clutter)
    else:
        clutter_i = rng.uniform(0.0, spec.clutter_intensity_max, size=n_clutter)

    xyz = np.vstack([ground, walls, clutter])
    intensity = np.concatenate([clean_i, clutter_i])
    labels = np.concatenate([
        np.full(n_ground, GROUND_CLASS),
        np.full(n_wall, WALL_CLASS),
        np.full(n_clutter, CLUTTER_CLASS),
    ]).astype(np.int64)

    order = rng.permutation(spec.n_points)
    cloud = PointCloud(xyz[order], intensity[order], labels[order])
    noise = labels[order] == CLUTTER_CLASS
    logger.info(
        "synthetic frame: seed=%d N=%d ground=%d wall=%d clutter=%d",
        spec.seed, spec.n_points, n_ground, n_wall, n_clutter,
    )
    return cloud, noise


# ==========================================================
# KEY-VALUE FORM
# ==========================================================

def _as_bool(v) -> bool:
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _walls_choice(v):
    s = str(v).strip().lower()
    if s == "default":
        return DEFAULT_WALLS
    if s == "none":
        return ()
    raise ValueError("expected 'default' or 'none'")


def synth_schema() -> Dict[str, Any]:
    schema: Dict[str, Any] = {}
    for f in fields(SynthSpec):
        if f.name == "walls":
            schema[f.name] = _walls_choice
        elif f.name == "high_intensity_clutter":
            schema[f.name] = _as_bool
        elif f.name in ("n_points", "seed"):
            schema[f.name] = int
        else:
            schema[f.name] = float
    return schema


def spec_from_mapping(values: Mapping[str, Any]) -> SynthSpec:
    """SynthSpec from already-typed values; unset keys keep their defaults."""
    try:
        return SynthSpec(**dict(values))
    except TypeError as e:
        raise InvalidSpecError(str(e))
