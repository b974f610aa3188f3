"""Planted-partition graph generators.

Point-cloud instances (two circles, two moons) become graphs as follows:

1. candidate edges are the symmetrised k-nearest-neighbour pairs (k=8);
2. candidates joining two clusters are dropped, and each cluster's candidate
   graph is made connected by adding shortest missing intra-cluster pairs;
3. intra-cluster weights are mapped affinely onto [w_min, w_max] by distance
   rank within the cluster;
4. the ``n_inter`` closest inter-cluster pairs become the only inter-cluster
   edges, weighted uniformly on (w_max**2 / w_min, 1].

Every instance is checked against the sufficient homogeneity condition.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .graph import (NodePartition, WeightedGraph,
                    check_sufficient_homogeneity)
from .io import write_coordinates, write_edge_list, write_partition


class GeneratorError(ValueError):
    """Generator parameters outside their feasible domain."""


@dataclass(frozen=True)
class PlantedInstance:
    graph: WeightedGraph
    partition: NodePartition
    planted_cut_weights: tuple[float, ...]
    params: dict = field(default_factory=dict)
    positions: np.ndarray | None = None

    def write(self, prefix: str | os.PathLike) -> list[str]:
        """Write ``prefix.edges``, ``prefix.partition`` and ``prefix.coords`` (when positions exist)."""
        prefix = str(prefix)
        paths = [prefix + ".edges", prefix + ".partition"]
        write_edge_list(paths[0], self.graph)
        write_partition(paths[1], self.partition)
        if self.positions is not None:
            paths.append(prefix + ".coords")
            write_coordinates(paths[2], self.positions)
        return paths


def _check_weights(w_min, w_max):
    if not (0 < w_min < w_max <= 1):
        raise GeneratorError(f"need 0 < w_min < w_max <= 1, got w_min={w_min}, w_max={w_max}")
    if w_max ** 2 / w_min > 1:
        raise GeneratorError(
            f"w_max^2 / w_min = {w_max ** 2 / w_min:.6g} > 1 leaves no room for inter-cluster weights")


def _inter_weight(rng: np.random.Generator, w_min: float, w_max: float, size: int) -> np.ndarray:
    thr = w_max ** 2 / w_min
    # 1 - U lies in (0, 1], so the weights land in (thr, 1]
    return np.minimum(thr + (1.0 - thr) * (1.0 - rng.random(size)), 1.0)


def _rank_weights(dist: np.ndarray, w_min: float, w_max: float) -> np.ndarray:
    if dist.size == 1:
        return np.array([w_min])
    rank = np.argsort(np.argsort(dist, kind="stable"), kind="stable")
    return np.clip(w_min + (w_max - w_min) * rank / (dist.size - 1), w_min, w_max)


def _connect_cluster(pts: np.ndarray, pairs: set) -> set:
    """Add shortest pairs between components until the cluster is connected."""
    n = len(pts)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    if len({find(x) for x in range(n)}) == 1:
        return pairs
    d = cdist(pts, pts)
    order = np.dstack(np.unravel_index(np.argsort(d, axis=None, kind="stable"), d.shape))[0]
    for a, b in order:
        if a >= b:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            pairs.add((int(a), int(b)))
    return pairs


def graph_from_points(points: np.ndarray, labels: np.ndarray, w_min: float, w_max: float,
                      rng: np.random.Generator, k: int = 8, n_inter: int = 2,
                      mu: float = 0.1) -> PlantedInstance:
    _check_weights(w_min, w_max)
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    n = len(points)
    partition = NodePartition.from_labels(labels.tolist())
    a = partition.assignment
    if np.any(partition.sizes() < 3):
        raise GeneratorError("every cluster needs at least 3 points")

    _, nbr = cKDTree(points).query(points, k=min(k + 1, n))
    edges: list[tuple[int, int, float]] = []
    for c in range(1, partition.K + 1):
        idx = np.flatnonzero(a == c)
        local = {int(x): i for i, x in enumerate(idx)}
        pairs = set()
        for x in idx:
            for y in nbr[x, 1:]:
                if a[y] == c:
                    i, j = local[int(x)], local[int(y)]
                    pairs.add((min(i, j), max(i, j)))
        pairs = _connect_cluster(points[idx], pairs)
        pairs = sorted(pairs)
        dist = np.array([np.linalg.norm(points[idx[i]] - points[idx[j]]) for i, j in pairs])
        for (i, j), w in zip(pairs, _rank_weights(dist, w_min, w_max)):
            edges.append((int(idx[i]), int(idx[j]), float(w)))

    inter = []
    for c1 in range(1, partition.K + 1):
        for c2 in range(c1 + 1, partition.K + 1):
            i1, i2 = np.flatnonzero(a == c1), np.flatnonzero(a == c2)
            d = cdist(points[i1], points[i2])
            flat = np.argsort(d, axis=None, kind="stable")[:max(1, n_inter)]
            r, s = np.unravel_index(flat, d.shape)
            inter.extend((int(i1[x]), int(i2[y])) for x, y in zip(r, s))
    inter_w = _inter_weight(rng, w_min, w_max, len(inter))
    edges.extend((u, v, float(w)) for (u, v), w in zip(inter, inter_w))
    edges.sort(key=lambda t: (min(t[0], t[1]), max(t[0], t[1])))
    g = WeightedGraph.from_edges(n, edges, mu=mu)
    return _finish(g, partition, positions=points,
                   params=dict(n=n, w_min=w_min, w_max=w_max, k=k, n_inter=n_inter))


def _finish(g, partition, params, positions=None) -> PlantedInstance:
    # every generated instance must satisfy the sufficient homogeneity condition
    suff = check_sufficient_homogeneity(g, partition)
    if not suff.ok:
        raise GeneratorError(f"instance fails sufficient homogeneity (margin {suff.margin:.3g})")
    g.topology.require_connected()
    a = partition.assignment
    cut_w = tuple(float(g.w[e]) for e, (u, v) in enumerate(g.edges) if a[u] != a[v])
    return PlantedInstance(g, partition, cut_w, params, positions)


def _check_n(n):
    if n < 6 or n % 2:
        raise GeneratorError(f"n must be an even integer >= 6, got {n}")


def circles_points(rng: np.random.Generator, n: int, noise: float = 0.05, factor: float = 0.5):
    """Two noisy concentric circles, ``n/2`` points each (outer label 0)."""
    half = n // 2
    t_out = rng.uniform(0, 2 * np.pi, half)
    t_in = rng.uniform(0, 2 * np.pi, half)
    pts = np.vstack([np.c_[np.cos(t_out), np.sin(t_out)],
                     factor * np.c_[np.cos(t_in), np.sin(t_in)]])
    pts += rng.normal(scale=noise, size=pts.shape)
    return pts, np.repeat([0, 1], half)


def moons_points(rng: np.random.Generator, n: int, noise: float = 0.05):
    """Two interleaved noisy half moons, ``n/2`` points each."""
    half = n // 2
    t1 = rng.uniform(0, np.pi, half)
    t2 = rng.uniform(0, np.pi, half)
    pts = np.vstack([np.c_[np.cos(t1), np.sin(t1)],
                     np.c_[1 - np.cos(t2), 0.5 - np.sin(t2)]])
    pts += rng.normal(scale=noise, size=pts.shape)
    return pts, np.repeat([0, 1], half)


def generate_circles(seed: int, n: int = 100, w_min: float = 0.1, w_max: float = 0.3, *,
                     noise: float = 0.05, k: int = 8, n_inter: int = 2, mu: float = 0.1) -> PlantedInstance:
    _check_n(n)
    _check_weights(w_min, w_max)
    rng = np.random.default_rng(seed)
    pts, labels = circles_points(rng, n, noise)
    inst = graph_from_points(pts, labels, w_min, w_max, rng, k=k, n_inter=n_inter, mu=mu)
    inst.params.update(shape="circles", seed=seed, noise=noise)
    return inst


def generate_moons(seed: int, n: int = 100, w_min: float = 0.1, w_max: float = 0.3, *,
                   noise: float = 0.05, k: int = 8, n_inter: int = 2, mu: float = 0.1) -> PlantedInstance:
    _check_n(n)
    _check_weights(w_min, w_max)
    rng = np.random.default_rng(seed)
    pts, labels = moons_points(rng, n, noise)
    inst = graph_from_points(pts, labels, w_min, w_max, rng, k=k, n_inter=n_inter, mu=mu)
    inst.params.update(shape="moons", seed=seed, noise=noise)
    return inst


def generate_planted_partition(seed: int, cluster_sizes, intra_degree: int = 2,
                               inter_edges_per_pair: int = 1, w_min: float = 0.1,
                               w_max: float = 0.3, mu: float = 0.1) -> PlantedInstance:
    """Random connected clusters joined by heavy inter-cluster edges.

    Each cluster is a random recursive tree plus extra random pairs until its
    mean degree reaches ``intra_degree`` (capped at a complete graph).  Every
    consecutive pair of clusters gets ``inter_edges_per_pair`` edges, and each
    further pair gets them with probability 1/2.
    """
    _check_weights(w_min, w_max)
    sizes = [int(s) for s in cluster_sizes]
    if not sizes or any(s < 3 for s in sizes):
        raise GeneratorError("every cluster needs at least 3 nodes")
    if inter_edges_per_pair < 1:
        raise GeneratorError("inter_edges_per_pair must be >= 1")
    rng = np.random.default_rng(seed)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    edges: dict[tuple[int, int], float] = {}
    for c, size in enumerate(sizes):
        base = int(offsets[c])
        perm = rng.permutation(size) + base
        local = set()
        for i in range(1, size):
            j = int(rng.integers(0, i))
            local.add((min(perm[i], perm[j]), max(perm[i], perm[j])))
        target = min(size * (size - 1) // 2, max(size - 1, int(round(intra_degree * size / 2))))
        while len(local) < target:
            x, y = rng.choice(size, 2, replace=False) + base
            local.add((int(min(x, y)), int(max(x, y))))
        for pair in sorted(local):
            edges[(int(pair[0]), int(pair[1]))] = float(rng.uniform(w_min, w_max))
    K = len(sizes)
    for c1 in range(K):
        for c2 in range(c1 + 1, K):
            if c2 != c1 + 1 and rng.random() < 0.5:
                continue
            cap = sizes[c1] * sizes[c2]
            want = min(inter_edges_per_pair, cap)
            placed = 0
            while placed < want:
                x = int(offsets[c1] + rng.integers(0, sizes[c1]))
                y = int(offsets[c2] + rng.integers(0, sizes[c2]))
                if (x, y) not in edges:
                    edges[(x, y)] = float(_inter_weight(rng, w_min, w_max, 1)[0])
                    placed += 1
    n = int(offsets[-1])
    g = WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in sorted(edges.items())], mu=mu)
    partition = NodePartition(np.repeat(np.arange(1, K + 1), sizes))
    return _finish(g, partition, params=dict(seed=seed, sizes=sizes, intra_degree=intra_degree,
                                             inter_edges_per_pair=inter_edges_per_pair,
                                             w_min=w_min, w_max=w_max, shape="planted"))


# --------------------------------------------------------------------------
# Fixed small instances used by tests, demos and the acceptance suite
# --------------------------------------------------------------------------

def six_node_path(mu: float = 0.1) -> PlantedInstance:
    """Path a-b-c-d-e-f with weights 0.2, 0.2, 0.9, 0.2, 0.2; clusters {a,b,c}, {d,e,f}."""
    g = WeightedGraph.from_edges(6, [(0, 1, 0.2), (1, 2, 0.2), (2, 3, 0.9), (3, 4, 0.2), (4, 5, 0.2)], mu=mu)
    return PlantedInstance(g, NodePartition(np.array([1, 1, 1, 2, 2, 2])), (0.9,),
                           dict(shape="six_node_path"))


def six_node_two_bridges(mu: float = 0.1) -> PlantedInstance:
    """Six nodes, seven edges: triangle {0,1,2} (0.1, 0.2, 0.3), path 3-4-5
    (0.1, 0.3) and two inter-cluster edges (0.95, 1.0).

    Spanning trees may use both inter-cluster edges, so the partitioning
    topology event is non-trivial.  Over all spanning trees alpha_bar = 3 for
    both clusters, max = 0.3 and min = 0.1.
    """
    g = WeightedGraph.from_edges(6, [
        (0, 1, 0.1), (1, 2, 0.2), (0, 2, 0.3),
        (3, 4, 0.1), (4, 5, 0.3),
        (2, 3, 0.95), (0, 5, 1.0),
    ], mu=mu)
    return _finish(g, NodePartition(np.array([1, 1, 1, 2, 2, 2])), dict(shape="six_node_two_bridges"))
