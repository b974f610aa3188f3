import json
import math

import numpy as np
import pytest

from privmst import GraphError, PtclustConfig, generate_moons, generate_planted_partition, ptclust
from privmst.analysis import partition_agreement
from privmst.pipeline import InfeasibleParameters, Provenance, replay


@pytest.fixture(scope="module")
def moons():
    return generate_moons(7)


def test_budget_split_recorded(moons):
    res = ptclust(moons.graph, PtclustConfig(1.0, 0.1, seed=3))
    prov = res.provenance
    assert prov.pamst_epsilon == prov.release_epsilon == 0.5
    assert prov.scale_s == pytest.approx(0.2)
    assert len(prov.tree_edges) == moons.graph.node_count - 1
    assert len(prov.assignment) == moons.graph.node_count


def test_zero_noise_limit_recovers_planted_partition():
    # huge budget: PAMST returns the MST and the sanitized weights are an
    # increasing affine image of the raw ones
    for seed in range(10):
        inst = generate_planted_partition(seed, [5, 7, 6])
        res = ptclust(inst.graph, PtclustConfig(1e9, 0.1, seed=seed))
        assert partition_agreement(inst.partition, res.partition).exact_match


def test_default_and_explicit_release_params():
    cfg = PtclustConfig(1.0, 0.1)
    prm = cfg.release_params()
    assert prm.tau == pytest.approx(5 * 0.2 + 1.0) and prm.p == pytest.approx(1.0 + 2 * prm.tau)
    explicit = PtclustConfig(1.0, 0.1, tau=1.0, p=4.0).release_params()
    assert (explicit.tau, explicit.p) == (1.0, 4.0)
    with pytest.raises(ValueError):
        PtclustConfig(1.0, 0.1, tau=1.0)
    with pytest.raises(ValueError):
        PtclustConfig(0.0, 0.1)


def test_small_graph_rejected():
    from privmst import WeightedGraph
    with pytest.raises(GraphError):
        ptclust(WeightedGraph.from_edges(2, [(0, 1, 0.5)]), PtclustConfig(1.0, 0.1))


def test_excessive_clamping_is_an_error(moons):
    # no shift and no scaling at a large noise scale pushes most weights out of (0, 1]
    with pytest.raises(InfeasibleParameters):
        ptclust(moons.graph, PtclustConfig(0.01, 0.1, tau=0.0, p=1.0, seed=1))


def test_provenance_round_trip_and_replay(moons):
    res = ptclust(moons.graph, PtclustConfig(0.7, 0.1, seed=12345))
    text = res.provenance.to_json()
    back = Provenance.from_dict(json.loads(text))
    assert back == res.provenance
    again = replay(moons.graph, back)
    assert again.provenance == res.provenance
    assert again.provenance.to_json() == text


def test_provenance_format_checked():
    with pytest.raises(ValueError):
        Provenance.from_dict({"format": "something else", "version": 1})


def test_degradation_trend(moons):
    """Median agreement at eps = 1 is at least the median at eps = 0.1."""
    def median(eps):
        return float(np.median([
            partition_agreement(moons.partition,
                                ptclust(moons.graph, PtclustConfig(eps, 0.1, seed=s)).partition,
                                exclude_singletons=True).adjusted_rand_index
            for s in range(50)]))
    assert median(1.0) >= median(0.1)


def test_composition_of_stage_budgets():
    cfg = PtclustConfig(2.5, 0.1, seed=0)
    res = ptclust(generate_planted_partition(0, [4, 4]).graph, cfg)
    assert math.isclose(res.provenance.pamst_epsilon + res.provenance.release_epsilon, 2.5)
