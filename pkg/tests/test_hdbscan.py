import numpy as np
import pytest
from scipy.sparse.csgraph import minimum_spanning_tree as csgraph_mst

from dmnrlab.kernel.errors import TooFewPointsError
from dmnrlab.math.geometry import pairwise_distances
from dmnrlab.math.spatial import SpatialIndex
from dmnrlab.math.structs import HdbscanParams, PointCloud
from dmnrlab.toolbox.hdbscan import (
    NOISE, condense_tree, core_distances, hdbscan, minimum_spanning_tree,
    mutual_reachability, select_clusters, single_linkage, stabilities,
)


def cloud_of(xyz):
    xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
    return PointCloud(xyz, np.zeros(xyz.shape[0]))


def three_blobs(seed, n=200, spread=1.0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0, 0.0], [60.0, 0.0, 0.0], [0.0, 60.0, 10.0]])
    xyz = np.vstack([rng.normal(c, spread, size=(n, 3)) for c in centers])
    truth = np.repeat(np.arange(3), n)
    return xyz, truth


def test_core_distances_colinear():
    index = SpatialIndex(np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]]))
    assert core_distances(index, 1).tolist() == [1.0, 1.0, 1.0]
    assert core_distances(index, 2).tolist() == [2.0, 1.0, 2.0]


def test_core_distances_blob_oracle():
    rng = np.random.default_rng(0)
    xyz = rng.normal(size=(300, 3))
    D = pairwise_distances(xyz)
    np.fill_diagonal(D, np.inf)
    expected = np.sort(D, axis=1)[:, 9]
    np.testing.assert_allclose(core_distances(SpatialIndex(xyz), 10), expected, rtol=1e-12)


def test_mutual_reachability_bounds():
    rng = np.random.default_rng(1)
    xyz = rng.normal(size=(120, 3))
    core = core_distances(SpatialIndex(xyz), 5)
    D = pairwise_distances(xyz)
    mr = mutual_reachability(D, core[:, None], core[None, :])
    assert (mr >= D).all()
    assert (mr >= core[:, None]).all() and (mr >= core[None, :]).all()
    assert np.array_equal(mr, mr.T)


def dense_mst_weight(xyz, core):
    D = pairwise_distances(xyz)
    mr = mutual_reachability(D, core[:, None], core[None, :])
    # csgraph reads zeros as missing edges; coincident points still need one.
    graph = np.where(mr > 0, mr, 1e-300)
    np.fill_diagonal(graph, 0.0)
    return csgraph_mst(graph).sum(), mr


def is_spanning_tree(src, dst, n):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(src.tolist(), dst.tolist()):
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return len(src) == n - 1


@pytest.mark.parametrize("seed", range(5))
def test_mst_weight_matches_dense_graph(seed):
    rng = np.random.default_rng(seed)
    xyz = rng.uniform(-5, 5, size=(int(rng.integers(50, 400)), 3))
    core = core_distances(SpatialIndex(xyz), 4)
    total, mr = dense_mst_weight(xyz, core)
    src, dst, w = minimum_spanning_tree(xyz, core)
    assert is_spanning_tree(src, dst, xyz.shape[0])
    assert w.sum() == pytest.approx(total, rel=1e-9)
    np.testing.assert_allclose(w, mr[src, dst], rtol=1e-12)


def test_mst_on_many_random_instances():
    rng = np.random.default_rng(77)
    for case in range(60):
        n = int(rng.integers(2, 300))
        if case % 3 == 0:
            # Integer lattice: many equal weights.
            xyz = rng.integers(0, 6, size=(n, 3)).astype(float)
        elif case % 3 == 1:
            xyz = np.vstack([rng.normal(c, 0.3, size=(n // 2 + 1, 3)) for c in (0.0, 8.0)])
        else:
            xyz = rng.uniform(-50, 50, size=(n, 3)) * rng.uniform(0.01, 1.0, size=3)
        m = int(rng.integers(1, min(8, xyz.shape[0] - 1) + 1))
        index = SpatialIndex(xyz)
        core = core_distances(index, m)
        total, _ = dense_mst_weight(xyz, core)
        src, dst, w = minimum_spanning_tree(xyz, core, index)
        assert is_spanning_tree(src, dst, xyz.shape[0])
        assert w.sum() == pytest.approx(total, rel=1e-9, abs=1e-12)


def test_mst_larger_cloud_matches_dense_graph():
    rng = np.random.default_rng(3)
    xyz = np.vstack([
        rng.uniform(-40, 40, size=(1200, 3)) * [1.0, 1.0, 0.05],
        rng.normal([5.0, 5.0, 1.0], 0.5, size=(300, 3)),
    ])
    core = core_distances(SpatialIndex(xyz), 10)
    total, _ = dense_mst_weight(xyz, core)
    src, dst, w = minimum_spanning_tree(xyz, core)
    assert is_spanning_tree(src, dst, xyz.shape[0])
    assert w.sum() == pytest.approx(total, rel=1e-9)


def test_mst_is_repeatable():
    xyz = np.random.default_rng(4).integers(0, 4, size=(200, 3)).astype(float)
    core = core_distances(SpatialIndex(xyz), 3)
    a = minimum_spanning_tree(xyz, core)
    b = minimum_spanning_tree(xyz, core)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_single_linkage_merge_table():
    xyz = np.array([[0.0, 0, 0], [1.0, 0, 0], [5.0, 0, 0]])
    src, dst, w = minimum_spanning_tree(xyz, np.zeros(3))
    Z = single_linkage(src, dst, w, 3)
    assert Z.tolist() == [[0.0, 1.0, 1.0, 2.0], [2.0, 3.0, 4.0, 3.0]]


def test_condensed_tree_and_stability_shapes():
    xyz, _ = three_blobs(3, n=60)
    core = core_distances(SpatialIndex(xyz), 5)
    src, dst, w = minimum_spanning_tree(xyz, core)
    tree = condense_tree(single_linkage(src, dst, w, xyz.shape[0]), 20)
    points = tree.child < tree.n_points
    assert np.array_equal(np.sort(tree.child[points]), np.arange(xyz.shape[0]))
    assert (stabilities(tree) >= 0).all()
    assert len(select_clusters(tree)) == 3


@pytest.mark.parametrize("seed", range(50))
def test_three_blobs(seed):
    xyz, truth = three_blobs(seed)
    lab = hdbscan(cloud_of(xyz), HdbscanParams(min_cluster_size=20))
    assert lab.cluster_count == 3
    agree = 0
    for blob in range(3):
        got = lab.labels[truth == blob]
        got = got[got != NOISE]
        majority = np.bincount(got).argmax()
        agree += np.count_nonzero(lab.labels[truth == blob] == majority)
    assert agree / xyz.shape[0] >= 0.99


def test_three_blobs_ignores_input_order():
    xyz, _ = three_blobs(42)
    perm = np.random.default_rng(1).permutation(xyz.shape[0])
    a = hdbscan(cloud_of(xyz), HdbscanParams(min_cluster_size=20))
    b = hdbscan(cloud_of(xyz[perm]), HdbscanParams(min_cluster_size=20))
    assert a.cluster_count == b.cluster_count
    # Same grouping up to renaming.
    pairs = set(zip(a.labels[perm].tolist(), b.labels.tolist()))
    assert len(pairs) == len(set(b.labels.tolist()))


def test_deterministic():
    xyz, _ = three_blobs(5)
    a = hdbscan(cloud_of(xyz), HdbscanParams(min_cluster_size=20))
    b = hdbscan(cloud_of(xyz), HdbscanParams(min_cluster_size=20))
    assert np.array_equal(a.labels, b.labels)


def test_identical_points_form_one_cluster():
    lab = hdbscan(cloud_of(np.tile([[2.0, -1.0, 0.5]], (80, 1))))
    assert lab.cluster_count == 1
    assert (lab.labels == 0).all()
    assert lab.n_noise == 0


def test_too_few_points():
    rng = np.random.default_rng(0)
    with pytest.raises(TooFewPointsError):
        hdbscan(cloud_of(rng.uniform(size=(10, 3))), HdbscanParams(min_cluster_size=20))
    with pytest.raises(TooFewPointsError):
        hdbscan(cloud_of(rng.uniform(size=(10, 3))), HdbscanParams(min_cluster_size=5, min_samples=10))


def test_labels_are_dense_and_sizes_add_up():
    xyz, _ = three_blobs(8)
    lab = hdbscan(cloud_of(xyz), HdbscanParams(min_cluster_size=20))
    assert set(np.unique(lab.labels)) <= {NOISE} | set(range(lab.cluster_count))
    assert lab.sizes().sum() + lab.n_noise == xyz.shape[0]
