"""Weighted graph primitives shared by every other module.

A graph is split into a public :class:`GraphTopology` (nodes and edges) and a
private :class:`WeightFunction` (one real weight per edge id).  Edge ids are
dense integers in input order and every tie-break in the package is expressed
in terms of them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

#: relative tolerance under which two weights count as equal in strict
#: comparisons, so that e.g. 3 * 0.3 is not "strictly less" than 0.9
STRICT_RTOL = 1e-12


class GraphError(ValueError):
    """Malformed or unusable graph data."""


@dataclass(frozen=True)
class GraphTopology:
    """Public structure of a simple undirected graph."""

    node_count: int
    edges: tuple[tuple[int, int], ...]
    _index: dict = field(init=False, repr=False, compare=False)
    _adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphError("node_count must be positive")
        canon = []
        index = {}
        adjacency = [[] for _ in range(self.node_count)]
        for eid, (u, v) in enumerate(self.edges):
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphError(f"edge ({u}, {v}) references a missing node")
            key = (min(u, v), max(u, v))
            if key in index:
                raise GraphError(f"duplicate edge {key}")
            index[key] = eid
            canon.append((u, v))
            adjacency[u].append((v, eid))
            adjacency[v].append((u, eid))
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adjacency", tuple(tuple(a) for a in adjacency))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self._index[(min(u, v), max(u, v))]
        except KeyError:
            raise GraphError(f"no edge between {u} and {v}") from None

    def neighbors(self, u: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor, edge_id)`` pairs incident to ``u``."""
        return self._adjacency[u]

    def unreachable_from(self, start: int = 0) -> list[int]:
        seen = np.zeros(self.node_count, dtype=bool)
        seen[start] = True
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _ in self._adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return np.flatnonzero(~seen).tolist()

    def is_connected(self) -> bool:
        return not self.unreachable_from(0)

    def require_connected(self) -> None:
        missing = self.unreachable_from(0)
        if missing:
            raise GraphError(f"graph is disconnected: node {missing[0]} is unreachable from node 0")


@dataclass(frozen=True)
class WeightFunction:
    """Edge weights indexed by edge id, plus the neighbourhood radius ``mu``."""

    weights: np.ndarray
    mu: float = 0.1

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.mu <= 0:
            raise GraphError("mu must be positive")

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, eid):
        return self.weights[eid]


@dataclass(frozen=True)
class WeightedGraph:
    topology: GraphTopology
    weights: WeightFunction

    def __post_init__(self):
        if len(self.weights) != self.topology.edge_count:
            raise GraphError(
                f"{len(self.weights)} weights for {self.topology.edge_count} edges")

    @classmethod
    def from_edges(cls, node_count: int, weighted_edges: Iterable[tuple[int, int, float]],
                   mu: float = 0.1) -> "WeightedGraph":
        weighted_edges = list(weighted_edges)
        topo = GraphTopology(node_count, tuple((u, v) for u, v, _ in weighted_edges))
        return cls(topo, WeightFunction(np.array([w for _, _, w in weighted_edges], dtype=float), mu))

    @property
    def node_count(self) -> int:
        return self.topology.node_count

    @property
    def edges(self):
        return self.topology.edges

    @property
    def w(self) -> np.ndarray:
        return self.weights.weights

    def with_weights(self, weights: np.ndarray) -> "WeightedGraph":
        return WeightedGraph(self.topology, WeightFunction(weights, self.weights.mu))


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree of ``topology`` given by edge ids.

    ``weights`` is either ``None`` (topology only, as released by PAMST) or an
    array aligned with ``edges``.
    """

    topology: GraphTopology
    edges: tuple[int, ...]
    weights: np.ndarray | None = None

    def __post_init__(self):
        edges = tuple(int(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        n = self.topology.node_count
        if len(edges) != n - 1:
            raise GraphError(f"a spanning tree on {n} nodes needs {n - 1} edges, got {len(edges)}")
        if len(set(edges)) != len(edges):
            raise GraphError("repeated tree edge")
        for e in edges:
            if not 0 <= e < self.topology.edge_count:
                raise GraphError(f"edge id {e} not in topology")
        if not _spans(n, (self.topology.edges[e] for e in edges)):
            raise GraphError("edge set is not a spanning tree (contains a cycle)")
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
            if w.shape != (len(edges),):
                raise GraphError("tree weights must align with tree edges")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def node_count(self) -> int:
        return self.topology.node_count

    def endpoints(self, eid: int) -> tuple[int, int]:
        return self.topology.edges[eid]

    def weight_map(self) -> dict[int, float]:
        if self.weights is None:
            raise GraphError("tree carries no weights")
        return dict(zip(self.edges, self.weights.tolist()))

    def with_weights(self, weights) -> "SpanningTree":
        return SpanningTree(self.topology, self.edges, weights)

    def attach(self, g: WeightedGraph) -> "SpanningTree":
        """Attach the weights of ``g`` restricted to this tree's edges."""
        return self.with_weights(g.w[list(self.edges)])

    def total_weight(self) -> float:
        if self.weights is None:
            raise GraphError("tree carries no weights")
        return float(np.sum(self.weights))

    def adjacency(self) -> list[list[tuple[int, int]]]:
        adj = [[] for _ in range(self.node_count)]
        for e in self.edges:
            u, v = self.topology.edges[e]
            adj[u].append((v, e))
            adj[v].append((u, e))
        return adj

    def path(self, u: int, v: int) -> list[int]:
        """Node sequence of the unique tree path from ``u`` to ``v``."""
        adj = self.adjacency()
        parent = {u: None}
        stack = [u]
        while stack:
            x = stack.pop()
            if x == v:
                break
            for y, _ in adj[x]:
                if y not in parent:
                    parent[y] = x
                    stack.append(y)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]


def _spans(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


@dataclass(frozen=True)
class NodePartition:
    """Cluster assignment with labels ``1..K``."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise GraphError("partition needs a non-empty 1-D assignment")
        labels = np.unique(a)
        if labels[0] != 1 or labels[-1] != len(labels):
            raise GraphError("cluster labels must be contiguous 1..K")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "NodePartition":
        """Relabel arbitrary hashable labels to ``1..K`` by first appearance."""
        mapping: dict = {}
        out = [mapping.setdefault(lab, len(mapping) + 1) for lab in labels]
        return cls(np.array(out, dtype=np.int64))

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], node_count: int) -> "NodePartition":
        a = np.zeros(node_count, dtype=np.int64)
        for k, members in enumerate(clusters, start=1):
            for v in members:
                if a[v]:
                    raise GraphError(f"node {v} assigned twice")
                a[v] = k
        if np.any(a == 0):
            raise GraphError(f"node {int(np.flatnonzero(a == 0)[0])} unassigned")
        return cls.from_labels(a.tolist())

    @property
    def K(self) -> int:
        return int(self.assignment.max())

    @property
    def node_count(self) -> int:
        return int(self.assignment.size)

    def clusters(self) -> list[frozenset[int]]:
        return [frozenset(np.flatnonzero(self.assignment == k).tolist()) for k in range(1, self.K + 1)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.K + 1)[1:]

    def label(self, v: int) -> int:
        return int(self.assignment[v])


@dataclass(frozen=True)
class Fragment:
    """Induced subgraph of a tree on a node set (``T|S``)."""

    nodes: frozenset[int]
    edges: tuple[int, ...]
    weights: np.ndarray | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------

def minimum_spanning_tree(g: WeightedGraph) -> SpanningTree:
    """Prim's algorithm from node 0, keyed on ``(weight, edge_id)``.

    The composite key is a strict total order on edges, so the result is the
    unique MST under smallest-edge-id tie breaking.
    """
    topo = g.topology
    topo.require_connected()
    w = g.w
    n = topo.node_count
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    heap = [(w[e], e, v) for v, e in topo.neighbors(0)]
    heapq.heapify(heap)
    chosen = []
    while heap and len(chosen) < n - 1:
        _, e, v = heapq.heappop(heap)
        if in_tree[v]:
            continue
        in_tree[v] = True
        chosen.append(e)
        for x, f in topo.neighbors(v):
            if not in_tree[x]:
                heapq.heappush(heap, (w[f], f, x))
    edges = tuple(sorted(chosen))
    return SpanningTree(topo, edges, w[list(edges)])


def minimum_path_distance(g: WeightedGraph, u: int, v: int) -> float:
    """Shortest-path distance, summing edge weights along the path (Dijkstra)."""
    n = g.node_count
    if not (0 <= u < n and 0 <= v < n):
        raise GraphError(f"invalid node pair ({u}, {v})")
    return float(_dijkstra(g, u)[v]) if u != v else 0.0


def _dijkstra(g: WeightedGraph, source: int) -> np.ndarray:
    w = g.w
    if np.any(w < 0):
        raise GraphError("negative weights are not supported")
    dist = np.full(g.node_count, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        for y, e in g.topology.neighbors(x):
            nd = d + w[e]
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    if np.isinf(dist).any():
        raise GraphError(f"node {int(np.flatnonzero(np.isinf(dist))[0])} unreachable from {source}")
    return dist


def all_pairs_path_distance(g: WeightedGraph) -> np.ndarray:
    return np.vstack([_dijkstra(g, s) for s in range(g.node_count)])


def cut_set(t: SpanningTree, p: NodePartition) -> frozenset[int]:
    """Tree edges whose endpoints lie in different clusters."""
    a = p.assignment
    return frozenset(e for e in t.edges
                     if a[t.topology.edges[e][0]] != a[t.topology.edges[e][1]])


def _crossing_pairs(t: SpanningTree, p: NodePartition) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    a = p.assignment
    for e in cut_set(t, p):
        u, v = t.topology.edges[e]
        key = (min(a[u], a[v]), max(a[u], a[v]))
        counts[key] = counts.get(key, 0) + 1
    return counts


def has_partitioning_topology(t: SpanningTree, p: NodePartition) -> bool:
    """Every adjacent cluster pair is crossed by exactly one tree edge and the
    contracted cluster graph is itself a tree."""
    if p.K == 1:
        return True
    counts = _crossing_pairs(t, p)
    if any(c != 1 for c in counts.values()):
        return False
    return len(counts) == p.K - 1 and _spans(p.K, ((i - 1, j - 1) for i, j in counts))


def subtree_restriction(t: SpanningTree, nodes: Iterable[int]) -> Fragment:
    nodes = frozenset(int(v) for v in nodes)
    if not nodes:
        raise GraphError("restriction needs a non-empty node set")
    kept = [(i, e) for i, e in enumerate(t.edges)
            if t.topology.edges[e][0] in nodes and t.topology.edges[e][1] in nodes]
    w = None if t.weights is None else t.weights[[i for i, _ in kept]]
    return Fragment(nodes, tuple(e for _, e in kept), w)


def strictly_less(a: float, b: float) -> bool:
    """``a < b`` with values within :data:`STRICT_RTOL` treated as equal."""
    return a < b and not math.isclose(a, b, rel_tol=STRICT_RTOL, abs_tol=0.0)


def alpha_ratio(fragment: Fragment) -> float:
    """``max w / min w`` over the fragment's edges."""
    if fragment.edge_count == 0:
        raise GraphError("alpha is undefined on a fragment without edges")
    w = fragment.weights
    if w is None:
        raise GraphError("fragment carries no weights")
    if np.any(w <= 0):
        raise GraphError("alpha needs strictly positive weights")
    return float(w.max() / w.min())


def is_homogeneously_separable(fragment: Fragment, s_weight: float) -> bool:
    """``alpha * max_weight < s_weight``; edgeless fragments are vacuously separable."""
    if fragment.edge_count == 0:
        return True
    return strictly_less(alpha_ratio(fragment) * float(fragment.weights.max()), s_weight)


def enumerate_spanning_trees(topo: GraphTopology) -> Iterator[tuple[int, ...]]:
    """Yield every spanning tree as a sorted tuple of edge ids.

    Include/exclude backtracking over edges with a union-find; exponential,
    intended for graphs of at most ~10 nodes.
    """
    n, m = topo.node_count, topo.edge_count
    if n == 1:
        yield ()
        return
    edges = topo.edges

    def rec(i, parent, chosen):
        if len(chosen) == n - 1:
            yield tuple(chosen)
            return
        if m - i < n - 1 - len(chosen):
            return

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            child = list(parent)
            child[ru] = rv
            chosen.append(i)
            yield from rec(i + 1, child, chosen)
            chosen.pop()
        yield from rec(i + 1, parent, chosen)

    yield from rec(0, list(range(n)), [])


def enumerate_minimum_spanning_trees(g: WeightedGraph, rtol: float = 1e-12) -> list[tuple[int, ...]]:
    trees = list(enumerate_spanning_trees(g.topology))
    totals = np.array([g.w[list(t)].sum() for t in trees])
    best = totals.min()
    return [t for t, s in zip(trees, totals) if s <= best + rtol * max(1.0, abs(best))]


@dataclass(frozen=True)
class HomogeneityReport:
    """Per-cluster verdicts.  ``alpha_bar`` is the max fragment alpha seen over
    the enumerated trees (``nan`` when every fragment was edgeless);
    ``margin`` is the smallest ``w(cut) - alpha * max`` encountered."""

    homogeneous: tuple[bool, ...]
    alpha_bar: tuple[float, ...]
    margin: tuple[float, ...]
    trees_checked: int

    @property
    def all(self) -> bool:
        return all(self.homogeneous)


def _homogeneity_over(g: WeightedGraph, p: NodePartition, trees: Sequence[tuple[int, ...]]) -> HomogeneityReport:
    K = p.K
    ok = [True] * K
    alpha_bar = [np.nan] * K
    margin = [np.inf] * K
    clusters = p.clusters()
    for edges in trees:
        t = SpanningTree(g.topology, edges, g.w[list(edges)])
        cuts = cut_set(t, p)
        for i, members in enumerate(clusters):
            frag = subtree_restriction(t, members)
            if frag.edge_count:
                a = alpha_ratio(frag)
                alpha_bar[i] = a if np.isnan(alpha_bar[i]) else max(alpha_bar[i], a)
                lhs = a * float(frag.weights.max())
            else:
                lhs = 0.0
            for e in cuts:
                u, v = g.edges[e]
                if u in members or v in members:
                    margin[i] = min(margin[i], float(g.w[e]) - lhs)
                    if not is_homogeneously_separable(frag, float(g.w[e])):
                        ok[i] = False
    return HomogeneityReport(tuple(ok), tuple(alpha_bar), tuple(margin), len(trees))


def check_strong_homogeneity(g: WeightedGraph, p: NodePartition, max_nodes: int = 10) -> HomogeneityReport:
    """Homogeneous separability of every cluster over *all* spanning trees."""
    if g.node_count > max_nodes:
        raise GraphError(
            f"{g.node_count} nodes exceeds the enumeration cap of {max_nodes}; "
            "use check_sufficient_homogeneity instead")
    g.topology.require_connected()
    return _homogeneity_over(g, p, list(enumerate_spanning_trees(g.topology)))


def check_weak_homogeneity(g: WeightedGraph, p: NodePartition, max_nodes: int = 10,
                           unique_mst: bool = False) -> HomogeneityReport:
    """Same check restricted to minimum spanning trees.

    With ``unique_mst`` only the tie-broken MST is examined (exact when the
    weights are distinct) and no enumeration cap applies.
    """
    if unique_mst:
        return _homogeneity_over(g, p, [minimum_spanning_tree(g).edges])
    if g.node_count > max_nodes:
        raise GraphError(f"{g.node_count} nodes exceeds the enumeration cap of {max_nodes}")
    return _homogeneity_over(g, p, enumerate_minimum_spanning_trees(g))


@dataclass(frozen=True)
class SufficientHomogeneity:
    ok: bool
    margin: float
    thresholds: tuple[float, ...]


def check_sufficient_homogeneity(g: WeightedGraph, p: NodePartition) -> SufficientHomogeneity:
    """Constructive condition: each inter-cluster edge is heavier than
    ``hi**2 / lo`` of both clusters it touches, with ``hi``/``lo`` the extreme
    intra-cluster weights.  Implies strong homogeneity since any tree fragment
    has ``alpha * max <= hi**2 / lo``.
    """
    a = p.assignment
    K = p.K
    lo = np.full(K + 1, np.inf)
    hi = np.full(K + 1, -np.inf)
    inter = []
    for e, (u, v) in enumerate(g.edges):
        w = float(g.w[e])
        if a[u] == a[v]:
            k = a[u]
            lo[k] = min(lo[k], w)
            hi[k] = max(hi[k], w)
        else:
            inter.append((e, a[u], a[v]))
    if np.any(np.isfinite(lo[1:]) & (lo[1:] <= 0)):
        return SufficientHomogeneity(False, -np.inf, ())
    thr = np.where(np.isfinite(lo), hi ** 2 / np.where(np.isfinite(lo), lo, 1.0), 0.0)
    thresholds = tuple(float(x) for x in thr[1:])
    if not inter:
        return SufficientHomogeneity(True, np.inf, thresholds)
    ok = all(strictly_less(max(thr[i], thr[j]), float(g.w[e])) for e, i, j in inter)
    margin = min(float(g.w[e]) - max(thr[i], thr[j]) for e, i, j in inter)
    return SufficientHomogeneity(ok, margin, thresholds)


def spanning_tree_count(topo: GraphTopology) -> int:
    """Kirchhoff matrix-tree count; used to sanity-check enumeration."""
    n = topo.node_count
    L = np.zeros((n, n))
    for u, v in topo.edges:
        L[u, u] += 1
        L[v, v] += 1
        L[u, v] -= 1
        L[v, u] -= 1
    return int(round(np.linalg.det(L[1:, 1:]))) if n > 1 else 1


def induced_edges(g: WeightedGraph, nodes: Iterable[int]) -> list[int]:
    s = set(nodes)
    return [e for e, (u, v) in enumerate(g.edges) if u in s and v in s]
