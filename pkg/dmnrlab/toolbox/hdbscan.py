"""
dmnrlab.toolbox.hdbscan

Hierarchical density-based clustering over point positions (x, y, z).

Pipeline:
    core distances -> mutual reachability MST (exact, Boruvka on the k-d tree) ->
    single-linkage merge table -> condensed tree (min_cluster_size) ->
    excess-of-mass cluster selection -> flat labels (-1 = noise)

Ties are broken by point index everywhere, so labels are identical across
runs and thread counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from dmnrlab.kernel.errors import EmptyNeighborhoodError, TooFewPointsError
from dmnrlab.math.spatial import SpatialIndex, build_index
from dmnrlab.math.structs import HdbscanParams, PointCloud

logger = logging.getLogger(__name__)

NOISE = -1


@dataclass(frozen=True, eq=False)
class ClusterLabeling:
    labels: np.ndarray
    cluster_count: int

    def __len__(self) -> int:
        return self.labels.shape[0]

    def sizes(self) -> np.ndarray:
        if self.cluster_count == 0:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.labels[self.labels >= 0], minlength=self.cluster_count)

    @property
    def n_noise(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))

    def __repr__(self):
        return f"<ClusterLabeling N={len(self)} clusters={self.cluster_count} noise={self.n_noise}>"


@dataclass(frozen=True, eq=False)
class CondensedTree:
    """Rows (parent, child, lambda, child_size). Cluster ids start at N."""
    parent: np.ndarray
    child: np.ndarray
    lambda_val: np.ndarray
    child_size: np.ndarray
    n_points: int

    @property
    def root(self) -> int:
        return self.n_points

    def cluster_ids(self) -> np.ndarray:
        mask = self.child >= self.n_points
        return np.concatenate(([self.root], self.child[mask]))


# ==========================================================
# JIT KERNELS
# ==========================================================

@njit(cache=True, nogil=True)
def _node_boxes(xyz, perm, start, end):
    m = start.shape[0]
    lo = np.empty((m, 3), dtype=np.float64)
    hi = np.empty((m, 3), dtype=np.float64)
    for k in range(m):
        for a in range(3):
            lo[k, a] = np.inf
            hi[k, a] = -np.inf
        for t in range(start[k], end[k]):
            p = perm[t]
            for a in range(3):
                v = xyz[p, a]
                if v < lo[k, a]:
                    lo[k, a] = v
                if v > hi[k, a]:
                    hi[k, a] = v
    return lo, hi


@njit(cache=True, nogil=True)
def _node_components(comp, perm, start, end, lesser, greater):
    """Component shared by every point under a node, else -1."""
    m = start.shape[0]
    out = np.empty(m, dtype=np.int64)
    # Pre-order layout: children sit after their parent.
    for k in range(m - 1, -1, -1):
        if lesser[k] < 0:
            c = comp[perm[start[k]]]
            for t in range(start[k] + 1, end[k]):
                if comp[perm[t]] != c:
                    c = -1
                    break
            out[k] = c
        else:
            a = out[lesser[k]]
            out[k] = a if a == out[greater[k]] else -1
    return out


@njit(cache=True, nogil=True)
def _box_dist(lo, hi, k, xyz, p):
    d2 = 0.0
    for a in range(3):
        v = xyz[p, a]
        if v < lo[k, a]:
            d2 += (lo[k, a] - v) ** 2
        elif v > hi[k, a]:
            d2 += (v - hi[k, a]) ** 2
    return np.sqrt(d2)


@njit(cache=True, nogil=True)
def _nearest_foreign(xyz, core, comp, perm, start, end, lesser, greater, lo, hi, node_comp, depth):
    """
    For every point, the cheapest mutual-reachability edge to a point of
    another component. Equal weights go to the lower point index.
    """
    n = xyz.shape[0]
    best_w = np.full(n, np.inf)
    best_q = np.full(n, -1, dtype=np.int64)
    stack = np.empty(2 * depth + 2, dtype=np.int64)
    for p in range(n):
        cp = comp[p]
        px = xyz[p, 0]
        py = xyz[p, 1]
        pz = xyz[p, 2]
        kp = core[p]
        bw = np.inf
        bq = -1
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            k = stack[top]
            if node_comp[k] == cp:
                continue
            if max(_box_dist(lo, hi, k, xyz, p), kp) > bw:
                continue
            if lesser[k] < 0:
                for t in range(start[k], end[k]):
                    q = perm[t]
                    if comp[q] == cp:
                        continue
                    dx = xyz[q, 0] - px
                    dy = xyz[q, 1] - py
                    dz = xyz[q, 2] - pz
                    w = max(np.sqrt(dx * dx + dy * dy + dz * dz), max(kp, core[q]))
                    if w < bw or (w == bw and q < bq):
                        bw = w
                        bq = q
            else:
                l = lesser[k]
                g = greater[k]
                # Nearer child on top of the stack.
                if _box_dist(lo, hi, l, xyz, p) <= _box_dist(lo, hi, g, xyz, p):
                    stack[top] = g
                    stack[top + 1] = l
                else:
                    stack[top] = l
                    stack[top + 1] = g
                top += 2
        best_w[p] = bw
        best_q[p] = bq
    return best_w, best_q


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _boruvka_merge(best_w, best_q, comp, forest, src, dst, weight, n_edges):
    """Add each component's cheapest outgoing edge; returns the new edge count."""
    n = comp.shape[0]
    cw = np.full(n, np.inf)
    ca = np.full(n, -1, dtype=np.int64)
    cb = np.full(n, -1, dtype=np.int64)
    # Edges are ordered by (weight, lower end, upper end); a strict order
    # keeps simultaneous picks acyclic.
    for p in range(n):
        q = best_q[p]
        if q < 0:
            continue
        c = comp[p]
        w = best_w[p]
        a = min(p, q)
        b = max(p, q)
        if w < cw[c] or (w == cw[c] and (a < ca[c] or (a == ca[c] and b < cb[c]))):
            cw[c] = w
            ca[c] = a
            cb[c] = b
    for c in range(n):
        if ca[c] < 0:
            continue
        ra = _find(forest, ca[c])
        rb = _find(forest, cb[c])
        if ra == rb:
            continue
        forest[max(ra, rb)] = min(ra, rb)
        src[n_edges] = ca[c]
        dst[n_edges] = cb[c]
        weight[n_edges] = cw[c]
        n_edges += 1
    for p in range(n):
        comp[p] = _find(forest, p)
    return n_edges
@njit(cache=True, nogil=True)
def _merge_table(src, dst, weight, n):
    """Union-find over edges already sorted by weight."""
    parent = np.arange(2 * n - 1)
    size = np.ones(2 * n - 1, dtype=np.int64)
    table = np.empty((n - 1, 4), dtype=np.float64)
    nxt = n
    for k in range(n - 1):
        a = _find(parent, src[k])
        b = _find(parent, dst[k])
        if a > b:
            a, b = b, a
        table[k, 0] = a
        table[k, 1] = b
        table[k, 2] = weight[k]
        table[k, 3] = size[a] + size[b]
        parent[a] = nxt
        parent[b] = nxt
        size[nxt] = size[a] + size[b]
        nxt += 1
    return table


# ==========================================================
# BUILDING BLOCKS
# ==========================================================

def core_distances(index: SpatialIndex, min_samples: int) -> np.ndarray:
    """
    core = core_distances(index, min_samples)
    Distance from each point to its min_samples-th nearest other point.
    """
    if min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    if index.n <= min_samples:
        raise EmptyNeighborhoodError(
            f"{index.n} points cannot supply {min_samples} neighbours each"
        )
    dist, _ = index.neighbors(np.arange(index.n), min_samples)
    return dist[:, -1].copy()


def mutual_reachability(dist, core_a, core_b):
    """mr(a, b) = max(core(a), core(b), dist(a, b))."""
    return np.maximum(np.asarray(dist), np.maximum(core_a, core_b))


def minimum_spanning_tree(xyz, core, index: Optional[SpatialIndex] = None):
    """
    src, dst, w = minimum_spanning_tree(xyz, core)
    Exact MST of the mutual-reachability graph by Boruvka rounds over the
    k-d tree. Edges come in the order the rounds add them.
    """
    xyz = np.ascontiguousarray(xyz, dtype=np.float64).reshape(-1, 3)
    core = np.ascontiguousarray(core, dtype=np.float64)
    n = xyz.shape[0]
    m = max(n - 1, 0)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    weight = np.empty(m, dtype=np.float64)
    if n < 2:
        return src, dst, weight

    if index is None:
        index = SpatialIndex(xyz)
    nodes = index.nodes()
    lo, hi = _node_boxes(xyz, nodes.perm, nodes.start, nodes.end)
    comp = np.arange(n, dtype=np.int64)
    forest = np.arange(n, dtype=np.int64)

    n_edges = 0
    rounds = 0
    while n_edges < m:
        node_comp = _node_components(comp, nodes.perm, nodes.start, nodes.end, nodes.lesser, nodes.greater)
        best_w, best_q = _nearest_foreign(
            xyz, core, comp, nodes.perm, nodes.start, nodes.end,
            nodes.lesser, nodes.greater, lo, hi, node_comp, nodes.depth,
        )
        n_edges = _boruvka_merge(best_w, best_q, comp, forest, src, dst, weight, n_edges)
        rounds += 1
    logger.debug("mst: N=%d in %d rounds", n, rounds)
    return src, dst, weight


def single_linkage(src, dst, weight, n: int) -> np.ndarray:
    """
    Z = single_linkage(src, dst, weight, n)
    Merge table with rows (a, b, distance, size); merged node k gets id n + k.
    """
    order = np.argsort(weight, kind="stable")
    return _merge_table(
        np.ascontiguousarray(src[order]),
        np.ascontiguousarray(dst[order]),
        np.ascontiguousarray(weight[order]),
        n,
    )


def _lambdas(distances: np.ndarray) -> np.ndarray:
    # Zero-distance merges get a finite lambda above every real one so the
    # stability sums stay finite.
    lam = np.empty_like(distances)
    pos = distances > 0
    lam[pos] = 1.0 / distances[pos]
    top = lam[pos].max() if pos.any() else 1.0
    lam[~pos] = 2.0 * top
    return lam


def condense_tree(Z: np.ndarray, min_cluster_size: int) -> CondensedTree:
    """Collapse the merge table so every split side has >= min_cluster_size points."""
    n = Z.shape[0] + 1
    root = 2 * n - 2
    left = Z[:, 0].astype(np.int64)
    right = Z[:, 1].astype(np.int64)
    sizes = Z[:, 3].astype(np.int64)
    lam = _lambdas(Z[:, 2])

    relabel = np.zeros(root + 1, dtype=np.int64)
    relabel[root] = n
    next_label = n + 1
    ignore = np.zeros(root + 1, dtype=bool)

    rows_p: list = []
    rows_c: list = []
    rows_l: list = []
    rows_s: list = []

    def count(node: int) -> int:
        return 1 if node < n else int(sizes[node - n])

    def collapse(node: int, parent_label: int, lam_val: float) -> None:
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                rows_p.append(parent_label)
                rows_c.append(cur)
                rows_l.append(lam_val)
                rows_s.append(1)
                continue
            ignore[cur] = True
            stack.append(int(right[cur - n]))
            stack.append(int(left[cur - n]))

    # Merged ids grow toward the root, so descending order visits parents first.
    for node in range(root, n - 1, -1):
        if ignore[node]:
            continue
        i = node - n
        l, r, lv = int(left[i]), int(right[i]), float(lam[i])
        lc, rc = count(l), count(r)
        p = int(relabel[node])

        if lc >= min_cluster_size and rc >= min_cluster_size:
            for side, cnt in ((l, lc), (r, rc)):
                relabel[side] = next_label
                rows_p.append(p)
                rows_c.append(next_label)
                rows_l.append(lv)
                rows_s.append(cnt)
                next_label += 1
        elif lc < min_cluster_size and rc < min_cluster_size:
            collapse(l, p, lv)
            collapse(r, p, lv)
        elif lc < min_cluster_size:
            relabel[r] = p
            collapse(l, p, lv)
        else:
            relabel[l] = p
            collapse(r, p, lv)

    return CondensedTree(
        parent=np.asarray(rows_p, dtype=np.int64),
        child=np.asarray(rows_c, dtype=np.int64),
        lambda_val=np.asarray(rows_l, dtype=np.float64),
        child_size=np.asarray(rows_s, dtype=np.int64),
        n_points=n,
    )


def stabilities(tree: CondensedTree) -> np.ndarray:
    """Excess of mass per cluster, indexed by (cluster id - N)."""
    n = tree.n_points
    n_clusters = int(tree.cluster_ids().max()) - n + 1
    birth = np.zeros(n_clusters, dtype=np.float64)
    is_cluster_row = tree.child >= n
    birth[tree.child[is_cluster_row] - n] = tree.lambda_val[is_cluster_row]
    pidx = tree.parent - n
    contrib = (tree.lambda_val - birth[pidx]) * tree.child_size
    return np.bincount(pidx, weights=contrib, minlength=n_clusters)


def select_clusters(tree: CondensedTree, allow_single_cluster: bool = False) -> np.ndarray:
    """Excess-of-mass selection. Returns the selected cluster ids, ascending."""
    n = tree.n_points
    stab = stabilities(tree)
    n_clusters = stab.shape[0]

    children: list = [[] for _ in range(n_clusters)]
    mask = tree.child >= n
    for p, c in zip(tree.parent[mask], tree.child[mask]):
        children[p - n].append(int(c) - n)

    is_cluster = np.ones(n_clusters, dtype=bool)
    if not allow_single_cluster:
        is_cluster[0] = False
    first = 0 if allow_single_cluster else 1

    # Child ids are always larger than their parent's.
    for c in range(n_clusters - 1, first - 1, -1):
        sub = sum(stab[ch] for ch in children[c])
        if sub > stab[c]:
            is_cluster[c] = False
            stab[c] = sub
        else:
            stack = list(children[c])
            while stack:
                d = stack.pop()
                is_cluster[d] = False
                stack.extend(children[d])

    return np.flatnonzero(is_cluster) + n


def label_points(tree: CondensedTree, selected) -> ClusterLabeling:
    """Flat labels: each point takes its nearest selected ancestor, else noise."""
    n = tree.n_points
    n_clusters = int(tree.cluster_ids().max()) - n + 1
    selected = np.sort(np.asarray(selected, dtype=np.int64))
    flat = np.full(n_clusters, NOISE, dtype=np.int64)
    flat[selected - n] = np.arange(selected.shape[0])

    parent_of = np.full(n_clusters, -1, dtype=np.int64)
    mask = tree.child >= n
    parent_of[tree.child[mask] - n] = tree.parent[mask] - n

    owner = np.full(n_clusters, NOISE, dtype=np.int64)
    for c in range(n_clusters):
        if flat[c] != NOISE:
            owner[c] = flat[c]
        elif parent_of[c] >= 0:
            owner[c] = owner[parent_of[c]]

    labels = np.full(n, NOISE, dtype=np.int64)
    pts = ~mask
    labels[tree.child[pts]] = owner[tree.parent[pts] - n]
    return ClusterLabeling(labels=labels, cluster_count=int(selected.shape[0]))


# ==========================================================
# ENTRY POINT
# ==========================================================

def hdbscan(
    cloud: PointCloud,
    params: Optional[HdbscanParams] = None,
    index: Optional[SpatialIndex] = None,
) -> ClusterLabeling:
    """
    lab = hdbscan(cloud, params)
    Cluster a frame on (x, y, z). Intensity is not used.
    """
    params = params or HdbscanParams()
    n = len(cloud)
    if n < params.min_cluster_size:
        raise TooFewPointsError(
            f"{n} points, min_cluster_size is {params.min_cluster_size}"
        )
    if n <= params.min_samples:
        raise TooFewPointsError(f"{n} points, min_samples is {params.min_samples}")

    if index is None:
        index = build_index(cloud)
    core = core_distances(index, params.min_samples)
    src, dst, w = minimum_spanning_tree(cloud.xyz, core, index)

    if w.shape[0] == 0 or w.max() == 0.0:
        # Every point coincides: one cluster, nothing to split.
        return ClusterLabeling(labels=np.zeros(n, dtype=np.int64), cluster_count=1)

    Z = single_linkage(src, dst, w, n)
    tree = condense_tree(Z, params.min_cluster_size)
    selected = select_clusters(tree, params.allow_single_cluster)
    lab = label_points(tree, selected)
    logger.info("hdbscan: N=%d clusters=%d noise=%d", n, lab.cluster_count, lab.n_noise)
    return lab
