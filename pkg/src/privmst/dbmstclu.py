"""DBMSTClu: greedy clustering by cutting edges of a weighted spanning tree.

Each round scans every uncut tree edge in ascending edge-id order, evaluates
the DBCVI the partition would have after cutting it, and keeps the last
candidate whose value is ``>=`` the running best (initialised to the current
DBCVI).  The run starts from DBCVI = -1 and stops when no candidate qualifies
or DBCVI reaches 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import GraphError, NodePartition, SpanningTree


def validity_index(disp: float, sep: float) -> float:
    """``(sep - disp) / max(sep, disp)``, in [-1, 1]."""
    m = max(sep, disp)
    if m <= 0:
        raise ValueError("validity index undefined when separation and dispersion are both 0")
    return (sep - disp) / m


@dataclass(frozen=True)
class ClusterStats:
    size: int
    dispersion: float
    separation: float
    validity: float


@dataclass(frozen=True)
class ClusterIndexReport:
    clusters: tuple[ClusterStats, ...]
    dbcvi: float


class ClusteringState:
    """A tree with a set of cut edges; clusters are the remaining components.

    Instances are not mutated by the public functions below: :meth:`cut`
    returns a new state.  Clusters are indexed in order of their smallest node.
    """

    def __init__(self, tree: SpanningTree, cut_edges=()):
        if tree.weights is None:
            raise GraphError("DBMSTClu needs a weighted tree")
        self.tree = tree
        self.cut_edges = tuple(int(e) for e in cut_edges)
        if len(set(self.cut_edges)) != len(self.cut_edges):
            raise GraphError("cut edges must be distinct")
        self._w = tree.weight_map()
        for e in self.cut_edges:
            if e not in self._w:
                raise GraphError(f"edge {e} is not a tree edge")
        self._cut = frozenset(self.cut_edges)
        self.N = tree.node_count
        self._adj = tree.adjacency()
        self._min_cut_at = np.full(self.N, np.inf)
        for e in self.cut_edges:
            for x in tree.endpoints(e):
                self._min_cut_at[x] = min(self._min_cut_at[x], self._w[e])
        self._label_components()

    def _label_components(self):
        label = np.full(self.N, -1, dtype=np.int64)
        k = 0
        for s in range(self.N):
            if label[s] >= 0:
                continue
            label[s] = k
            stack = [s]
            while stack:
                x = stack.pop()
                for y, e in self._adj[x]:
                    if e not in self._cut and label[y] < 0:
                        label[y] = k
                        stack.append(y)
            k += 1
        self.cluster_of = label
        self.K = k
        self._terms = [self._term(self._stats(np.flatnonzero(label == c).tolist(), None))
                       for c in range(k)]
        self.dbcvi = math.fsum(self._terms)

    # -- per-cluster quantities -------------------------------------------
    def members(self, cluster: int) -> list[int]:
        return np.flatnonzero(self.cluster_of == cluster).tolist()

    def _stats(self, nodes, extra_cut: int | None) -> ClusterStats:
        """Stats of ``nodes`` (one component) when ``extra_cut`` is also cut."""
        node_set = set(nodes)
        disp = 0.0
        sep = math.inf
        for x in nodes:
            sep = min(sep, self._min_cut_at[x])
            for y, e in self._adj[x]:
                if e in self._cut or e == extra_cut:
                    continue
                if y in node_set and self._w[e] > disp:
                    disp = self._w[e]
        if extra_cut is not None:
            u, v = self.tree.endpoints(extra_cut)
            if u in node_set or v in node_set:
                sep = min(sep, self._w[extra_cut])
        if math.isinf(sep):
            sep = 1.0
        return ClusterStats(len(nodes), disp, sep, validity_index(disp, sep))

    def _term(self, st: ClusterStats) -> float:
        return st.size / self.N * st.validity

    def stats(self, cluster: int) -> ClusterStats:
        return self._stats(self.members(cluster), None)

    def _side(self, start: int, blocked: int) -> list[int]:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y, e in self._adj[x]:
                if e == blocked or e in self._cut or y in seen:
                    continue
                seen.add(y)
                stack.append(y)
        return list(seen)

    # -- cuts --------------------------------------------------------------
    def uncut_edges(self) -> list[int]:
        return sorted(e for e in self.tree.edges if e not in self._cut)

    def evaluate_cut(self, candidate: int) -> float:
        if candidate not in self._w:
            raise GraphError(f"edge {candidate} is not a tree edge")
        if candidate in self._cut:
            raise GraphError(f"edge {candidate} is already cut")
        u, v = self.tree.endpoints(candidate)
        c = int(self.cluster_of[u])
        side_u = self._side(u, candidate)
        side_v = self._side(v, candidate)
        t_u = self._term(self._stats(side_u, candidate))
        t_v = self._term(self._stats(side_v, candidate))
        return math.fsum(self._terms[:c] + self._terms[c + 1:] + [t_u, t_v])

    def cut(self, edge: int) -> "ClusteringState":
        if edge in self._cut:
            raise GraphError(f"edge {edge} is already cut")
        return ClusteringState(self.tree, self.cut_edges + (int(edge),))

    def partition(self) -> NodePartition:
        return NodePartition(self.cluster_of + 1)

    def report(self) -> ClusterIndexReport:
        return ClusterIndexReport(tuple(self.stats(c) for c in range(self.K)), self.dbcvi)

    def __repr__(self):
        return f"ClusteringState(K={self.K}, cuts={list(self.cut_edges)}, dbcvi={self.dbcvi:.6g})"


def dispersion(state: ClusteringState, cluster: int) -> float:
    return state.stats(cluster).dispersion


def separation(state: ClusteringState, cluster: int) -> float:
    return state.stats(cluster).separation


def dbcvi(state: ClusteringState) -> float:
    return state.dbcvi


def evaluate_cut(state: ClusteringState, candidate: int) -> float:
    """DBCVI after additionally cutting ``candidate``; ``state`` is unchanged."""
    return state.evaluate_cut(candidate)


@dataclass(frozen=True)
class DbmstcluResult:
    state: ClusteringState
    report: ClusterIndexReport
    history: tuple[float, ...]  # dbcvi after each performed cut

    @property
    def partition(self) -> NodePartition:
        return self.state.partition()

    @property
    def K(self) -> int:
        return self.state.K


def run_dbmstclu(t: SpanningTree,
                 on_candidate: Callable[[ClusteringState, int, float], None] | None = None
                 ) -> DbmstcluResult:
    """Run the greedy loop to completion.

    ``on_candidate(state, edge, value)`` is called for every evaluated
    candidate, which lets callers audit each evaluation.
    """
    if t.weights is None:
        raise GraphError("DBMSTClu needs a weighted tree")
    w = t.weights
    if np.any(~np.isfinite(w)) or np.any(w <= 0) or np.any(w > 1):
        raise GraphError("DBMSTClu needs every tree weight in (0, 1]")
    state = ClusteringState(t)
    current = -1.0
    history = []
    for _ in range(len(t.edges)):
        if current >= 1.0:
            break
        best_edge = None
        best_val = current
        for e in state.uncut_edges():
            val = state.evaluate_cut(e)
            if on_candidate is not None:
                on_candidate(state, e, val)
            if val >= best_val:
                best_edge, best_val = e, val
        if best_edge is None:
            break
        state = state.cut(best_edge)
        current = best_val
        history.append(current)
    return DbmstcluResult(state, state.report(), tuple(history))
