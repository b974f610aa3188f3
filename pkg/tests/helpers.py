"""Shared instance families and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from privmst import WeightedGraph, generate_planted_partition
from privmst.datagen import six_node_path, six_node_two_bridges


def recovery_family(seed: int):
    """Planted instance number ``seed`` of the exact-recovery family.

    K cycles through 2, 3, 4; cluster sizes are drawn from [3, 15] and the
    first cluster is padded so that n >= 9 (hence 9 <= n <= 60).
    """
    K = 2 + seed % 3
    sizes = np.random.default_rng(seed).integers(3, 16, K)
    if sizes.sum() < 9:
        sizes[0] += 9 - sizes.sum()
    return generate_planted_partition(seed, sizes.tolist(), intra_degree=3, inter_edges_per_pair=2)


def random_connected_graph(rng: np.random.Generator, n: int, extra: float = 0.5,
                           levels: int | None = None, mu: float = 0.1) -> WeightedGraph:
    """Random spanning tree plus random extra edges.  ``levels`` quantises
    weights to force ties."""
    pairs = set()
    order = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        a, b = int(order[i]), int(order[j])
        pairs.add((min(a, b), max(a, b)))
    for a, b in itertools.combinations(range(n), 2):
        if (a, b) not in pairs and rng.random() < extra:
            pairs.add((a, b))
    pairs = sorted(pairs)
    if levels:
        w = rng.integers(1, levels + 1, len(pairs)) / levels
    else:
        w = rng.uniform(0.05, 1.0, len(pairs))
    return WeightedGraph.from_edges(n, [(a, b, float(x)) for (a, b), x in zip(pairs, w)], mu=mu)


def triangle(w=(1.0, 2.0, 3.0), mu=0.1) -> WeightedGraph:
    """a-b, b-c, a-c."""
    return WeightedGraph.from_edges(3, [(0, 1, w[0]), (1, 2, w[1]), (0, 2, w[2])], mu=mu)


def four_cycle(mu=0.1) -> WeightedGraph:
    return WeightedGraph.from_edges(4, [(0, 1, 0.1), (1, 2, 0.2), (2, 3, 0.3), (0, 3, 0.4)], mu=mu)


def small_graph_corpus():
    """Every graph with at most 8 nodes used by the suite."""
    out = [triangle(), four_cycle(), six_node_path().graph, six_node_two_bridges().graph,
           WeightedGraph.from_edges(2, [(0, 1, 0.5)])]
    rng = np.random.default_rng(20240601)
    for i in range(120):
        n = int(rng.integers(3, 9))
        out.append(random_connected_graph(rng, n, extra=float(rng.uniform(0.1, 0.9)),
                                          levels=3 if i % 3 == 0 else None))
    return out


def brute_force_mst_weight(g: WeightedGraph) -> float:
    """Minimum over all (n-1)-edge subsets that form a spanning tree."""
    n = g.node_count
    best = np.inf
    for subset in itertools.combinations(range(g.topology.edge_count), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        ok = True
        for e in subset:
            u, v = g.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            best = min(best, float(sum(g.w[list(subset)])))
    return best


def all_simple_path_lengths(g: WeightedGraph, u: int, v: int) -> list[float]:
    adj = {x: [] for x in range(g.node_count)}
    for e, (a, b) in enumerate(g.edges):
        adj[a].append((b, e))
        adj[b].append((a, e))
    out = []

    def walk(x, seen, total):
        if x == v:
            out.append(total)
            return
        for y, e in adj[x]:
            if y not in seen:
                walk(y, seen | {y}, total + float(g.w[e]))

    walk(u, {u}, 0.0)
    return out
