"""Private almost-minimum spanning tree topology (PAMST).

Prim-style growth from a random start node where every frontier edge is
selected with the exponential mechanism at budget ``epsilon / (|V| - 1)``.
Only the topology is returned; weights stay private.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError, SpanningTree, WeightedGraph, minimum_spanning_tree
from .mechanisms import (PrivacyBudget, RandomSource, exponential_mechanism,
                         utility_sensitivity)


@dataclass
class Frontier:
    """Nodes already in the tree and the xor-incident edges around them.

    ``edges`` maps edge id -> the endpoint outside the tree.  It is updated
    incrementally when a node joins (O(degree) per step).
    """

    in_tree: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)

    def add(self, g: WeightedGraph, v: int) -> None:
        self.in_tree.add(v)
        for x, e in g.topology.neighbors(v):
            if x in self.in_tree:
                self.edges.pop(e, None)
            else:
                self.edges[e] = x

    def range(self) -> list[int]:
        return sorted(self.edges)


@dataclass(frozen=True)
class PamstTrace:
    """Per-step record: the range offered and the edge chosen."""

    start: int
    steps: tuple[tuple[tuple[int, ...], int], ...]
    epsilon_step: float


def pamst(rng: RandomSource, g: WeightedGraph, budget: PrivacyBudget,
          trace: bool = False) -> SpanningTree | tuple[SpanningTree, PamstTrace]:
    """Release a spanning-tree topology under weight differential privacy.

    The range at each step is offered in ascending edge-id order, which fixes
    the mapping from random stream to output.
    """
    n = g.node_count
    if n < 2:
        raise GraphError("PAMST needs at least two nodes")
    g.topology.require_connected()
    eps_step = budget.epsilon / (n - 1)
    delta_u = utility_sensitivity(budget)

    start = rng.integer(n)
    frontier = Frontier()
    frontier.add(g, start)
    chosen = []
    steps = []
    while len(frontier.in_tree) < n:
        rng_range = frontier.range()
        r = exponential_mechanism(rng, g, rng_range, eps_step, delta_u)
        if trace:
            steps.append((tuple(rng_range), r))
        chosen.append(r)
        frontier.add(g, frontier.edges[r])
    tree = SpanningTree(g.topology, tuple(sorted(chosen)))
    if trace:
        return tree, PamstTrace(start, tuple(steps), eps_step)
    return tree


@dataclass(frozen=True)
class WeightGap:
    mean: float
    stderr: float
    gaps: np.ndarray


def expected_weight_gap(g: WeightedGraph, budget: PrivacyBudget, trials: int,
                        rng: RandomSource) -> WeightGap:
    """Monte Carlo estimate of ``E[w(T_PAMST)] - w(T_MST)``.

    Trial ``i`` runs on ``rng.spawn(i)`` so that runs at different budgets
    share the same seed set.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = minimum_spanning_tree(g).total_weight()
    gaps = np.empty(trials)
    for i in range(trials):
        t = pamst(rng.spawn(i), g, budget)
        gaps[i] = float(g.w[list(t.edges)].sum()) - best
    se = float(gaps.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return WeightGap(float(gaps.mean()), se, gaps)
