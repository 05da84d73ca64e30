import math

import numpy as np
import pytest

from dmnrlab.kernel.errors import InvalidParameterError, LengthMismatchError, NonFiniteError
from dmnrlab.math.geometry import pairwise_distances, planar_ranges, sensor_distance, sensor_distances
from dmnrlab.math.structs import (
    DmnrParams, HdbscanParams, HeightMode, Partition, Point, PointCloud, Stage, Verdict,
)


def test_sensor_distance_examples():
    assert sensor_distance(Point(3, 4, 0, 0.7)) == 5.0
    assert sensor_distance(Point(0, 0, 0, 0.1)) == 0.0
    assert sensor_distance(Point(1, 1, 1, 0.0)) == pytest.approx(1.7320508, abs=1e-7)


def test_sensor_distances_matches_scalar():
    rng = np.random.default_rng(4)
    xyz = rng.normal(scale=20.0, size=(200, 3))
    d = sensor_distances(xyz)
    for n in range(0, 200, 17):
        p = Point(*xyz[n], 0.0)
        assert d[n] == pytest.approx(sensor_distance(p), rel=1e-15)


def test_sensor_distance_is_rotation_invariant():
    rng = np.random.default_rng(8)
    for _ in range(200):
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        q = q * np.sign(np.diag(r))
        x, y, z = rng.normal(scale=rng.uniform(0.1, 100.0), size=3)
        rx, ry, rz = q @ np.array([x, y, z])
        before = sensor_distance(Point(x, y, z, 0.0))
        after = sensor_distance(Point(rx, ry, rz, 0.0))
        assert after == pytest.approx(before, rel=1e-9)


def test_planar_and_pairwise():
    xyz = np.array([[3.0, 4.0, 12.0], [0.0, 0.0, 0.0]])
    assert planar_ranges(xyz).tolist() == [5.0, 0.0]
    D = pairwise_distances(xyz)
    assert D[0, 1] == 13.0 and D[1, 0] == 13.0
    assert D[0, 0] == 0.0


def test_cloud_from_points_and_indexing():
    cloud = PointCloud.from_points([Point(1, 2, 3, 0.5), Point(-1, 0, 2, 0.25)])
    assert len(cloud) == 2
    assert cloud[1] == Point(-1.0, 0.0, 2.0, 0.25)
    assert cloud.z.tolist() == [3.0, 2.0]
    assert not cloud.has_labels


def test_cloud_is_read_only():
    cloud = PointCloud.from_array(np.ones((4, 4)))
    with pytest.raises(ValueError):
        cloud.xyz[0, 0] = 5.0
    with pytest.raises(ValueError):
        cloud.intensity[0] = 5.0


def test_cloud_rejects_non_finite():
    data = np.zeros((5, 4))
    data[3, 2] = np.nan
    with pytest.raises(NonFiniteError) as err:
        PointCloud.from_array(data)
    assert err.value.index == 3

    data = np.zeros((5, 4))
    data[1, 3] = np.inf
    with pytest.raises(NonFiniteError) as err:
        PointCloud.from_array(data)
    assert err.value.index == 1


def test_cloud_length_checks():
    with pytest.raises(LengthMismatchError):
        PointCloud(np.zeros((3, 3)), np.zeros(2))
    with pytest.raises(LengthMismatchError):
        PointCloud(np.zeros((3, 3)), np.zeros(3), labels=[1, 2])
    with pytest.raises(InvalidParameterError):
        PointCloud(np.zeros((2, 3)), np.zeros(2), labels=[1, -1])


def test_cloud_transforms_keep_labels():
    cloud = PointCloud(np.eye(3), np.zeros(3), labels=[40, 110, 40])
    moved = cloud.translated(dx=1.0).scaled(2.0)
    assert moved.labels.tolist() == [40, 110, 40]
    assert moved.x.tolist() == [4.0, 2.0, 2.0]
    assert cloud.with_labels(None).labels is None


def test_empty_cloud_allowed():
    cloud = PointCloud.from_array(np.zeros((0, 4)))
    assert len(cloud) == 0


def test_params_defaults_and_validation():
    p = DmnrParams()
    assert (p.K, p.k1, p.k2, p.k3, p.h) == (10, 0.015, 0.055, 100.0, 5)
    assert p.height_mode.is_adaptive
    assert p.rescue_rank == "count"

    with pytest.raises(InvalidParameterError):
        DmnrParams(K=0)
    with pytest.raises(InvalidParameterError):
        DmnrParams(k1=0.0)
    with pytest.raises(InvalidParameterError):
        DmnrParams(k2=-1.0)
    with pytest.raises(InvalidParameterError):
        DmnrParams(k3=-0.5)
    with pytest.raises(InvalidParameterError):
        DmnrParams(h=-1)
    with pytest.raises(InvalidParameterError):
        DmnrParams(rescue_rank="size")
    with pytest.raises(InvalidParameterError):
        HeightMode("linear")
    with pytest.raises(InvalidParameterError):
        HdbscanParams(min_cluster_size=1)

    assert DmnrParams(k3=0.0).k3 == 0.0
    fixed = HeightMode.fixed()
    assert (fixed.kind, fixed.h1, fixed.h2) == ("fixed", 100.0, -5.0)


def test_partition_from_stages():
    stages = [Stage.HEIGHT_RETAINED, Stage.DENSITY_RETAINED, Stage.DENSITY_REJECTED, Stage.RESCUED]
    part = Partition.from_stages(stages)
    assert part.kept.tolist() == [True, True, False, True]
    assert part.n_kept == 3 and part.n_outlier == 1
    assert part.outlier_indices().tolist() == [2]
    assert part.verdicts.tolist() == [Verdict.KEPT, Verdict.KEPT, Verdict.OUTLIER, Verdict.KEPT]
    assert part.verdicts.tolist() == [1, 1, 0, 1]
    counts = part.stage_counts()
    assert counts["RESCUED"] == 1 and counts["UNTAGGED"] == 0


def test_partition_rejects_inconsistent_tags():
    with pytest.raises(InvalidParameterError):
        Partition(np.array([True, False]), np.array([Stage.DENSITY_REJECTED, Stage.DENSITY_REJECTED]))
    with pytest.raises(LengthMismatchError):
        Partition(np.array([True, False]), np.array([Stage.HEIGHT_RETAINED]))
    # Untagged points may take either verdict.
    part = Partition(np.array([True, False]), np.zeros(2, dtype=np.int8))
    assert part.same_as(Partition(np.array([True, False])))
    assert math.isclose(part.n_kept / len(part), 0.5)
