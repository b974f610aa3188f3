"""Compare the partitioning-topology lower bounds with exact probabilities.

On six-node instances every spanning tree can be enumerated, so the
probability that PAMST returns a tree with the planted topology is known
exactly. Both bound variants are printed next to it; a negative bound is
vacuous.
"""
import math

from privmst import RandomSource, SpanningTree, WeightReleaseParams
from privmst.analysis import (estimate_separability_preservation, exact_topology_probability,
                              topology_bound)
from privmst.datagen import six_node_path, six_node_two_bridges

for label, inst in (("path", six_node_path()), ("two bridges", six_node_two_bridges())):
    print(f"\n{label}: {inst.graph.node_count} nodes, {inst.graph.topology.edge_count} edges")
    print(f"{'eps':>6s} {'exact':>8s} {'text':>8s} {'proof':>8s}")
    for eps in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, math.inf):
        exact = exact_topology_probability(inst, eps)
        text = topology_bound(inst, eps, variant="theorem_text").bound_value
        proof = topology_bound(inst, eps, variant="proof_form").bound_value
        flag = "  <- exact below a bound" if exact < max(text, proof) - 1e-9 else ""
        print(f"{eps:6g} {exact:8.4f} {text:8.4f} {proof:8.4f}{flag}")

# %% Weight release: how often does the cut edge stay separable after noise?
inst = six_node_path()
g = inst.graph
tree = SpanningTree(g.topology, tuple(range(5)), g.w.copy())
print(f"\n{'s':>6s} {'freq':>7s} {'bound':>7s}")
for s in (0.005, 0.01, 0.02, 0.05, 0.1, 0.2):
    est = estimate_separability_preservation(inst, tree, 1, WeightReleaseParams(s, 1.0, 4.0),
                                             5000, RandomSource(1))
    print(f"{s:6g} {est.summary.frequency:7.4f} {est.chebyshev_bound:7.4f}")
