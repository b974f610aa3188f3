import itertools
import math

import numpy as np
import pytest

from privmst import (NodePartition, RandomSource, SpanningTree, WeightReleaseParams,
                     generate_moons, generate_planted_partition, minimum_spanning_tree)
from privmst.analysis import (TrialSummary, adjusted_rand_index, check_cluster_definition,
                              cluster_alpha_bar, estimate_separability_preservation,
                              estimate_topology_probability, exact_topology_probability,
                              partition_agreement, topology_bound)
from privmst.datagen import PlantedInstance, six_node_path, six_node_two_bridges


def part(labels):
    return NodePartition.from_labels(labels)


def path_tree(inst):
    g = inst.graph
    return SpanningTree(g.topology, tuple(range(g.topology.edge_count)), g.w.copy())


# -- agreement -----------------------------------------------------------------------

def test_ari_examples():
    a = part([1, 1, 2, 2])
    assert partition_agreement(a, a) .exact_match
    assert partition_agreement(a, part([5, 5, 9, 9])).adjusted_rand_index == 1.0
    assert math.isclose(adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]), -0.5)
    assert adjusted_rand_index([1, 2, 3, 4], [1, 1, 1, 1]) == 0.0


def test_ari_matches_pair_counting_definition():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(4, 12))
        a, b = rng.integers(0, 3, n), rng.integers(0, 4, n)
        pairs = list(itertools.combinations(range(n), 2))
        same_a = np.array([a[i] == a[j] for i, j in pairs])
        same_b = np.array([b[i] == b[j] for i, j in pairs])
        index = np.sum(same_a & same_b)
        expected = same_a.sum() * same_b.sum() / len(pairs)
        top = (same_a.sum() + same_b.sum()) / 2
        if top == expected:
            continue
        assert math.isclose(adjusted_rand_index(a, b), (index - expected) / (top - expected),
                            abs_tol=1e-12)


def test_singleton_exclusion():
    planted = part([1, 1, 1, 2, 2, 2])
    found = part([1, 1, 1, 2, 2, 3])
    assert not partition_agreement(planted, found).exact_match
    ex = partition_agreement(planted, found, exclude_singletons=True)
    assert ex.exact_match and ex.nodes_compared == 5
    with pytest.raises(ValueError):
        partition_agreement(planted, part([1, 2]))


# -- trial summaries ------------------------------------------------------------------

def test_trial_summary():
    s = TrialSummary(100, 25)
    assert s.frequency == 0.25
    assert math.isclose(s.stderr, math.sqrt(0.25 * 0.75 / 100))
    assert math.isclose(s.half_width, 1.959963984540054 * s.stderr)
    with pytest.raises(ValueError):
        TrialSummary(10, 11)


# -- topology bound -------------------------------------------------------------------

def test_bound_infinite_budget():
    for inst in (six_node_path(), six_node_two_bridges()):
        for variant in ("theorem_text", "proof_form"):
            assert topology_bound(inst, math.inf, variant=variant).bound_value == 1.0


def test_bound_small_budget_limit_on_path():
    inst = six_node_path()
    n, m, du = 6, 5, 0.2
    eps = 1e-12
    text = topology_bound(inst, eps, variant="theorem_text").bound_value
    proof = topology_bound(inst, eps, variant="proof_form").bound_value
    assert math.isclose(text, 1 - 4 * math.exp(-math.log(m) / (2 * du * (n - 1))), rel_tol=1e-9)
    assert math.isclose(proof, 1 - 4 / m, rel_tol=1e-9)


def test_bound_two_bridge_independent_recomputation():
    inst = six_node_two_bridges()
    rep_t = topology_bound(inst, 20.0, variant="theorem_text")
    rep_p = topology_bound(inst, 20.0, variant="proof_form")
    assert rep_t.alpha_bar == pytest.approx((3.0, 3.0))
    assert rep_t.max_intra == (0.3, 0.3) and rep_t.min_intra == (0.1, 0.1)
    # |V| = 6, |E| = 7, du = 0.2, alpha max - min = 0.8, two clusters of size 3
    a = 20.0 * 0.8 + math.log(7)
    assert math.isclose(rep_t.bound_value, 1 - 4 * math.exp(-a / (2 * 0.2 * 5)), rel_tol=1e-12)
    assert math.isclose(rep_p.bound_value, 1 - 4 * math.exp(-(20.0 / 5) * 0.8 / 0.4) / 7, rel_tol=1e-12)
    assert rep_t.bound_value <= 1 and not rep_t.vacuous


def test_bound_vacuous_flag():
    rep = topology_bound(six_node_path(), 1.0, variant="theorem_text")
    assert rep.vacuous and rep.bound_value < 0


def test_bound_variant_checked():
    with pytest.raises(ValueError):
        topology_bound(six_node_path(), 1.0, variant="other")


def test_alpha_bar_large_instance_uses_sufficient_bound():
    inst = generate_planted_partition(1, [6, 7])
    alpha, source = cluster_alpha_bar(inst)
    assert source == "sufficient_condition"
    assert all(a >= 1 for a in alpha)


def test_exact_topology_probability_can_fall_below_both_bounds():
    """On the 7-edge instance neither variant is a valid lower bound at eps = 20."""
    inst = six_node_two_bridges()
    exact = exact_topology_probability(inst, 20.0)
    assert exact < topology_bound(inst, 20.0, variant="theorem_text").bound_value
    assert exact < topology_bound(inst, 20.0, variant="proof_form").bound_value


def test_exact_probability_matches_monte_carlo():
    inst = six_node_two_bridges()
    exact = exact_topology_probability(inst, 5.0)
    est = estimate_topology_probability(inst, 5.0, 4000, RandomSource(1))
    assert abs(est.frequency - exact) <= 4 * est.stderr


def test_topology_probability_limits():
    inst = generate_planted_partition(2, [4, 5])
    est = estimate_topology_probability(inst, math.inf, 50, RandomSource(0))
    assert est.frequency == 1.0
    low = estimate_topology_probability(inst, 0.01, 200, RandomSource(1))
    assert 0.0 <= low.frequency <= 1.0


@pytest.mark.parametrize("eps", [1.0, 5.0, 20.0])
def test_topology_frequency_not_below_bound_on_path(eps):
    inst = six_node_path()
    est = estimate_topology_probability(inst, eps, 2000, RandomSource(int(eps)))
    for variant in ("theorem_text", "proof_form"):
        assert est.frequency + 3 * est.stderr >= topology_bound(inst, eps, variant=variant).bound_value


# -- separability under weight release ----------------------------------------------

def test_separability_zero_noise():
    inst = six_node_path()
    est = estimate_separability_preservation(inst, path_tree(inst), 1, WeightReleaseParams(1e-9, 1.0, 4.0),
                                             2000, RandomSource(0), moment_draws=1000)
    assert est.summary.frequency == 1.0
    # (0.2 + 1)^2 / 16 - (0.2 + 1)(0.9 + 1) / 16 < 0
    assert math.isclose(est.zero_noise_phi, (1.2 ** 2 - 1.2 * 1.9) / 16)
    assert est.zero_noise_phi < 0
    assert est.cut_edge == 2


@pytest.mark.parametrize("s", [0.01, 0.05, 0.1])
def test_separability_frequency_not_below_bound(s):
    inst = six_node_path()
    est = estimate_separability_preservation(inst, path_tree(inst), 2, WeightReleaseParams(s, 1.0, 4.0),
                                             10_000, RandomSource(int(100 * s)))
    if not est.vacuous:
        assert est.summary.frequency + 3 * est.summary.stderr >= est.chebyshev_bound


def test_separability_bound_weakens_with_noise():
    inst = six_node_path()
    bounds = [estimate_separability_preservation(inst, path_tree(inst), 1, WeightReleaseParams(s, 1.0, 4.0),
                                                 100, RandomSource(9)).chebyshev_bound
              for s in (0.005, 0.01, 0.02, 0.05, 0.1)]
    assert all(b2 <= b1 + 1e-3 for b1, b2 in zip(bounds, bounds[1:]))


def test_separability_requires_pre_noise_condition():
    from privmst import WeightedGraph
    g = WeightedGraph.from_edges(4, [(0, 1, 0.1), (1, 2, 0.3), (2, 3, 0.5)])
    inst = PlantedInstance(g, NodePartition(np.array([1, 1, 1, 2])), (0.5,))
    with pytest.raises(ValueError):
        estimate_separability_preservation(inst, path_tree(inst), 1, WeightReleaseParams(0.01, 1.0, 4.0),
                                           10, RandomSource(0))


# -- cluster definition ----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_planted_clusters_satisfy_definition(seed):
    inst = generate_planted_partition(seed, [4, 5, 4])
    nodes = range(inst.graph.node_count)
    for members in inst.partition.clusters():
        assert check_cluster_definition(inst.graph, nodes, members)


def test_cluster_definition_rejects_small_and_mixed_sets():
    inst = generate_planted_partition(0, [4, 5])
    nodes = range(inst.graph.node_count)
    assert not check_cluster_definition(inst.graph, nodes, {0, 1})
    mixed = {0, 1, 4, 5}
    assert not check_cluster_definition(inst.graph, nodes, mixed)
    with pytest.raises(ValueError):
        check_cluster_definition(inst.graph, nodes, set(range(9)), max_size=5)


def test_cluster_definition_consistent_with_tree_paths():
    inst = generate_moons(1, n=24)
    t = minimum_spanning_tree(inst.graph)
    a = inst.partition.assignment
    for members in inst.partition.clusters():
        if check_cluster_definition(inst.graph, range(24), members):
            for u, v in itertools.combinations(sorted(members), 2):
                assert all(a[x] == a[u] for x in t.path(u, v))
