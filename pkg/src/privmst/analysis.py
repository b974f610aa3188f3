"""Metrics, bound calculators, Monte Carlo estimators and brute-force oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .datagen import PlantedInstance
from .dbmstclu import validity_index
from .graph import (GraphError, NodePartition, SpanningTree, WeightedGraph,
                    all_pairs_path_distance, alpha_ratio, cut_set,
                    enumerate_spanning_trees, has_partitioning_topology,
                    induced_edges, is_homogeneously_separable, subtree_restriction)
from .mechanisms import (PrivacyBudget, RandomSource, WeightReleaseParams,
                         exponential_probabilities, laplace_log_density,
                         laplace_samples, sanitize, utility_sensitivity)
from .pamst import pamst

VARIANTS = ("theorem_text", "proof_form")


# --------------------------------------------------------------------------
# Partition agreement
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Agreement:
    exact_match: bool
    adjusted_rand_index: float
    nodes_compared: int


def adjusted_rand_index(a, b) -> float:
    """Pair-counting ARI (Hubert & Arabie)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("partitions have different sizes")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def comb2(x):
        return x * (x - 1) // 2

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    total = comb2(a.size)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        # both partitions trivial in the same way (all singletons / one cluster)
        return 1.0 if sum_a == sum_b else 0.0
    return float((sum_ij - expected) / (max_index - expected))


def partition_agreement(a: NodePartition, b: NodePartition, exclude_singletons: bool = False) -> Agreement:
    """Compare ``b`` (typically predicted) with ``a`` (typically planted).

    With ``exclude_singletons`` nodes that sit alone in a cluster of ``b`` are
    left out of the comparison, treating them as noise points.
    """
    if a.node_count != b.node_count:
        raise ValueError(f"size mismatch: {a.node_count} vs {b.node_count}")
    keep = np.ones(a.node_count, dtype=bool)
    if exclude_singletons:
        sizes = np.bincount(b.assignment)
        keep = sizes[b.assignment] > 1
    la, lb = a.assignment[keep], b.assignment[keep]
    exact = bool(_same_partition(la, lb))
    return Agreement(exact, adjusted_rand_index(la, lb), int(keep.sum()))


def _same_partition(a, b) -> bool:
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


# --------------------------------------------------------------------------
# Partitioning-topology bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    variant: str
    epsilon: float
    delta_u: float
    node_count: int
    edge_count: int
    alpha_bar: tuple[float, ...]
    max_intra: tuple[float, ...]
    min_intra: tuple[float, ...]
    alpha_source: str  # "enumeration" or "sufficient_condition"

    @property
    def vacuous(self) -> bool:
        return self.bound_value <= 0


def cluster_alpha_bar(instance: PlantedInstance, max_nodes: int = 10) -> tuple[tuple[float, ...], str]:
    """Max over all spanning trees of each cluster fragment's alpha.

    Above ``max_nodes`` nodes the sufficient-condition upper bound
    ``max / min`` of the cluster's intra-cluster weights is used instead.
    """
    g, p = instance.graph, instance.partition
    clusters = p.clusters()
    if g.node_count > max_nodes:
        out = []
        for members in clusters:
            w = g.w[induced_edges(g, members)]
            out.append(float(w.max() / w.min()) if w.size else 1.0)
        return tuple(out), "sufficient_condition"
    best = [1.0] * len(clusters)
    for edges in enumerate_spanning_trees(g.topology):
        t = SpanningTree(g.topology, edges, g.w[list(edges)])
        for i, members in enumerate(clusters):
            frag = subtree_restriction(t, members)
            if frag.edge_count:
                best[i] = max(best[i], alpha_ratio(frag))
    return tuple(best), "enumeration"


def topology_bound(instance: PlantedInstance, epsilon: float, delta_u: float | None = None,
                   variant: str = "theorem_text", alpha_bar=None) -> BoundReport:
    """Lower bound on P[PAMST output has a partitioning topology].

    ``theorem_text`` puts ``ln|E|`` inside the exponent's numerator, divided
    together with the privacy term by ``2 du (|V|-1)``.  ``proof_form`` follows
    the union-bound derivation, ``exp(-t)`` with
    ``t = eps' (alpha max - min) / (2 du) + ln|E|``, i.e. a ``1/|E|`` factor.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    g, p = instance.graph, instance.partition
    if delta_u is None:
        delta_u = utility_sensitivity(g.weights.mu)
    if alpha_bar is None:
        alpha_bar, source = cluster_alpha_bar(instance)
    else:
        source = "given"
    n, m = g.node_count, g.topology.edge_count
    clusters = p.clusters()
    maxes, mins = [], []
    total = 0.0
    for i, members in enumerate(clusters):
        w = g.w[induced_edges(g, members)]
        hi = float(w.max()) if w.size else 0.0
        lo = float(w.min()) if w.size else 0.0
        maxes.append(hi)
        mins.append(lo)
        spread = alpha_bar[i] * hi - lo
        if math.isinf(epsilon):
            term = 0.0
        elif variant == "theorem_text":
            term = math.exp(-(epsilon * spread + math.log(m)) / (2 * delta_u * (n - 1)))
        else:
            eps_step = epsilon / (n - 1)
            term = math.exp(-eps_step * spread / (2 * delta_u)) / m
        total += (len(members) - 1) * term
    return BoundReport(1.0 - total, variant, float(epsilon), float(delta_u), n, m,
                       tuple(alpha_bar), tuple(maxes), tuple(mins), source)


# --------------------------------------------------------------------------
# Monte Carlo summaries
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialSummary:
    trials: int
    successes: int

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def frequency(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1 - f) / self.trials)

    @property
    def half_width(self) -> float:
        """95% normal-approximation half width."""
        return 1.959963984540054 * self.stderr


def estimate_topology_probability(instance: PlantedInstance, epsilon: float, trials: int,
                                  rng: RandomSource) -> TrialSummary:
    """Frequency with which PAMST at ``epsilon`` yields a partitioning topology."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g, p = instance.graph, instance.partition
    budget = PrivacyBudget(epsilon, g.weights.mu)
    hits = sum(has_partitioning_topology(pamst(rng.spawn(i), g, budget), p) for i in range(trials))
    return TrialSummary(trials, int(hits))


@dataclass(frozen=True)
class SeparabilityEstimate:
    summary: TrialSummary
    chebyshev_bound: float
    phi_mean: float
    phi_var: float
    cut_edge: int
    zero_noise_phi: float

    @property
    def vacuous(self) -> bool:
        return not self.phi_mean < 0


def estimate_separability_preservation(instance: PlantedInstance, tree: SpanningTree, cluster: int,
                                       params: WeightReleaseParams, trials: int, rng: RandomSource,
                                       cut_edge: int | None = None,
                                       moment_draws: int = 100_000) -> SeparabilityEstimate:
    """Chance that Weight-Release keeps cluster ``cluster`` (1-based label)
    homogeneously separable by its planted cut edge, with the one-sided
    Chebyshev lower bound ``1 - V/(V + E^2)`` on ``P[phi < 0]`` where
    ``phi = (max Y)^2 - (min Z) * X_out``.
    """
    g, p = instance.graph, instance.partition
    if tree.weights is None:
        tree = tree.attach(g)
    members = p.clusters()[cluster - 1]
    frag = subtree_restriction(tree, members)
    wmap = tree.weight_map()
    if cut_edge is None:
        incident = sorted(e for e in cut_set(tree, p)
                          if tree.endpoints(e)[0] in members or tree.endpoints(e)[1] in members)
        if not incident:
            raise GraphError(f"cluster {cluster} has no planted cut edge in the tree")
        cut_edge = incident[0]
    w_cut = wmap[cut_edge]
    if not is_homogeneously_separable(frag, w_cut):
        raise GraphError("separability does not hold before noise")

    # empirical frequency over full Weight-Release draws
    pos = {e: i for i, e in enumerate(tree.edges)}
    frag_idx = [pos[e] for e in frag.edges]
    released, _ = sanitize(rng, np.broadcast_to(tree.weights, (trials, len(tree.edges))), params)
    fw = released[:, frag_idx]
    cut_w = released[:, pos[cut_edge]]
    if fw.shape[1]:
        hi, lo = fw.max(axis=1), fw.min(axis=1)
        ok = (hi / lo) * hi < cut_w
    else:
        ok = np.ones(trials, dtype=bool)
    summary = TrialSummary(trials, int(ok.sum()))

    # moments of phi by simulation from the surrogate distributions
    k = max(len(members) - 1, 1)
    hi0 = float(frag.weights.max()) if frag.edge_count else 0.0
    lo0 = float(frag.weights.min()) if frag.edge_count else 0.0
    sc = params.scale_s / params.p
    loc_y = (hi0 + params.tau) / params.p
    loc_z = (lo0 + params.tau) / params.p
    loc_x = (w_cut + params.tau) / params.p
    y = laplace_samples(rng, loc_y, sc, (moment_draws, k)).max(axis=1)
    z = laplace_samples(rng, loc_z, sc, (moment_draws, k)).min(axis=1)
    x = laplace_samples(rng, loc_x, sc, moment_draws)
    phi = y ** 2 - z * x
    mean, var = float(phi.mean()), float(phi.var(ddof=1))
    bound = 1.0 - var / (var + mean ** 2) if mean < 0 else 0.0
    return SeparabilityEstimate(summary, bound, mean, var, int(cut_edge),
                                loc_y ** 2 - loc_z * loc_x)


# --------------------------------------------------------------------------
# Brute-force oracles
# --------------------------------------------------------------------------

def check_cluster_definition(g: WeightedGraph, d_space, candidate, max_size: int = 15,
                             dist: np.ndarray | None = None) -> bool:
    """Literal set-inclusion reading of the cluster definition.

    For every split of ``candidate`` into non-empty ``C1``, ``C2``, the nodes
    of ``D \\ C1`` nearest to ``C1`` (minimum path distance) must all lie in
    ``C2``.  Exact float ties count as co-minimisers.
    """
    C = sorted(set(candidate))
    D = set(d_space)
    if len(C) > max_size:
        raise ValueError(f"|C| = {len(C)} exceeds the brute-force cap {max_size}")
    if not set(C) <= D:
        raise ValueError("candidate must be a subset of the node space")
    if len(C) <= 2:
        return False
    if dist is None:
        dist = all_pairs_path_distance(g)
    Cset = set(C)
    for r in range(1, len(C)):
        for c1 in itertools.combinations(C, r):
            c2 = Cset.difference(c1)
            outside = sorted(D.difference(c1))
            reach = dist[np.ix_(outside, c1)].min(axis=1)
            best = reach.min()
            if not {z for z, d in zip(outside, reach) if d == best} <= c2:
                return False
    return True


def reference_dbcvi(tree: SpanningTree, cut_edges) -> float:
    """DBCVI recomputed from the definitions with an independent union-find."""
    n = tree.node_count
    cut = set(int(e) for e in cut_edges)
    w = tree.weight_map()
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in tree.edges:
        if e not in cut:
            u, v = tree.endpoints(e)
            parent[find(u)] = find(v)
    roots = sorted({find(x) for x in range(n)})
    K = len(roots)
    terms = []
    for r in roots:
        members = {x for x in range(n) if find(x) == r}
        inner = [w[e] for e in tree.edges if e not in cut
                 and tree.endpoints(e)[0] in members and tree.endpoints(e)[1] in members]
        disp = max(inner) if inner else 0.0
        if K == 1:
            sep = 1.0
        else:
            sep = min(w[e] for e in cut
                      if tree.endpoints(e)[0] in members or tree.endpoints(e)[1] in members)
        terms.append(len(members) / n * validity_index(disp, sep))
    return math.fsum(terms)


def mechanism_privacy_audit(base_weights, epsilon_step: float, mu: float, grid=None) -> float:
    """Largest ``|log P_w(r) - log P_w'(r)|`` over neighbours ``w' = w + d``,
    ``d`` ranging over ``grid`` (default 5 points on [-mu, mu]) per edge."""
    w = np.asarray(base_weights, dtype=float)
    if not 1 <= w.size <= 6:
        raise ValueError("audit supports ranges of 1 to 6 edges")
    grid = np.linspace(-mu, mu, 5) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) > mu * (1 + 1e-12)):
        raise ValueError("perturbations must stay within mu")
    du = utility_sensitivity(mu)

    def log_probs(ws):
        z = -epsilon_step * np.abs(ws - ws.min(axis=1, keepdims=True)) / (2.0 * du)
        return z - logsumexp(z, axis=1, keepdims=True)

    # all neighbours at once: one row per perturbation vector
    logq = log_probs(w + np.array(list(itertools.product(grid, repeat=w.size))))
    return float(np.max(np.abs(logq - log_probs(w[None, :]))))


def laplace_privacy_audit(value: float, mu: float, epsilon: float, xs=None) -> float:
    """Max absolute log density ratio of Laplace(value, mu/eps) against
    Laplace(value +- mu, mu/eps) over the grid ``xs``."""
    scale = mu / epsilon
    xs = np.linspace(value - 10 * scale - mu, value + 10 * scale + mu, 2001) if xs is None else np.asarray(xs)
    base = laplace_log_density(xs, value, scale)
    return float(max(np.max(np.abs(base - laplace_log_density(xs, value + s * mu, scale)))
                     for s in (-1.0, 1.0)))


@dataclass(frozen=True)
class WeightReleaseAudit:
    per_edge: float  # max log density ratio of one released weight
    joint: float     # max log density ratio of the whole released vector


def weight_release_privacy_audit(tree_weights, params: WeightReleaseParams, mu: float,
                                 points: int = 401) -> WeightReleaseAudit:
    """Closed-form density ratios of Weight-Release outputs for neighbours
    ``w' = w + mu * sign`` with every sign pattern on the tree's edges."""
    w = np.asarray(tree_weights, dtype=float)
    s, tau, p = params.scale_s, params.tau, params.p
    worst = []
    for wi in w:
        # released y = (w + Y + tau) / p has density Laplace((w + tau)/p, s/p)
        loc = (wi + tau) / p
        ys = np.linspace(loc - 10 * s / p, loc + 10 * s / p, points)
        base = laplace_log_density(ys, loc, s / p)
        worst.append(max(float(np.max(np.abs(base - laplace_log_density(ys, loc + sgn * mu / p, s / p))))
                         for sgn in (-1, 1)))
    # independent coordinates: the joint log ratio is the sum of per-edge ones,
    # each maximised by moving that weight by mu in the matching direction
    per_edge, joint = max(worst), math.fsum(worst)
    return WeightReleaseAudit(per_edge, joint)


def pamst_tree_distribution(g: WeightedGraph, epsilon: float, mu: float | None = None) -> dict:
    """Exact output distribution of PAMST: ``{sorted edge tuple: probability}``.

    Chain rule over the per-step exponential-mechanism probabilities,
    averaged over a uniform start node.  Exponential in |V|; tiny graphs only.
    """
    n = g.node_count
    mu = g.weights.mu if mu is None else mu
    eps_step = epsilon / (n - 1)
    du = utility_sensitivity(mu)
    out: dict = {}

    def grow(in_tree: frozenset, chosen: tuple, prob: float):
        if len(in_tree) == n:
            key = tuple(sorted(chosen))
            out[key] = out.get(key, 0.0) + prob
            return
        rng_edges = sorted(e for e, (u, v) in enumerate(g.edges) if (u in in_tree) != (v in in_tree))
        probs = exponential_probabilities(g.w[rng_edges], eps_step, du)
        for e, q in zip(rng_edges, probs):
            if q == 0:
                continue
            u, v = g.edges[e]
            grow(in_tree | {u, v}, chosen + (e,), prob * q)

    for start in range(n):
        grow(frozenset([start]), (), 1.0 / n)
    return out


def exact_topology_probability(instance: PlantedInstance, epsilon: float) -> float:
    """``P[PAMST output has a partitioning topology]`` from the exact distribution."""
    g, p = instance.graph, instance.partition
    dist = pamst_tree_distribution(g, epsilon)
    return math.fsum(pr for edges, pr in dist.items()
                     if has_partitioning_topology(SpanningTree(g.topology, edges), p))


def pamst_privacy_audit(g: WeightedGraph, epsilon: float, grid=None) -> float:
    """Max ``|log P_w(T) - log P_w'(T)|`` over spanning trees ``T`` and
    neighbours ``w' = w + d`` with ``d`` from ``grid`` per edge."""
    mu = g.weights.mu
    grid = np.array([-mu, 0.0, mu]) if grid is None else np.asarray(grid)
    base = pamst_tree_distribution(g, epsilon)
    worst = 0.0
    for d in itertools.product(grid, repeat=g.topology.edge_count):
        other = pamst_tree_distribution(g.with_weights(g.w + np.array(d)), epsilon)
        for t, pr in base.items():
            worst = max(worst, abs(math.log(pr) - math.log(other[t])))
    return worst


@dataclass(frozen=True)
class TailCheck:
    t: float
    threshold: float
    summary: TrialSummary
    bound: float = field(default=0.0)


def exponential_tail_check(range_weights, epsilon_step: float, mu: float, t: float,
                           draws: int, rng: RandomSource) -> TailCheck:
    """Empirical ``P[u(chosen) <= OPT - (2 du / eps)(t + ln|R|)]`` from ``draws`` samples."""
    w = np.asarray(range_weights, dtype=float)
    du = utility_sensitivity(mu)
    probs = exponential_probabilities(w, epsilon_step, du)
    cdf = np.cumsum(probs)
    picks = np.minimum(np.searchsorted(cdf, rng.open_uniform(draws) * cdf[-1], side="right"), w.size - 1)
    u = -np.abs(w - w.min())
    threshold = 0.0 - (2 * du / epsilon_step) * (t + math.log(w.size))
    bad = int(np.sum(u[picks] <= threshold))
    return TailCheck(t, threshold, TrialSummary(draws, bad), math.exp(-t))
