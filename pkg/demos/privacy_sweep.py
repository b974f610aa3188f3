"""Privacy/utility trade-off of PTClust on the circles and moons graphs.

Prints one row per (shape, epsilon) with median and quartile ARI over
``TRIALS`` seeds. Ignores singleton clusters when scoring, since noisy
weights tend to peel off single nodes.
"""
import numpy as np

from privmst import PtclustConfig, generate_circles, generate_moons, partition_agreement, ptclust
from privmst.mechanisms import split_seed
from privmst.pipeline import InfeasibleParameters

TRIALS = 30
EPSILONS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
MASTER = 2024

print(f"{'shape':8s} {'eps':>6s} {'q25':>6s} {'median':>7s} {'q75':>6s} {'K':>5s} {'fail':>5s}")
for name, gen in (("circles", generate_circles), ("moons", generate_moons)):
    inst = gen(7, n=100)
    for eps in EPSILONS:
        aris, ks, failed = [], [], 0
        for j in range(TRIALS):
            try:
                out = ptclust(inst.graph, PtclustConfig(eps, 0.1, seed=split_seed(MASTER, j)))
            except InfeasibleParameters:
                failed += 1
                continue
            aris.append(partition_agreement(inst.partition, out.partition,
                                            exclude_singletons=True).adjusted_rand_index)
            ks.append(out.clustering.K)
        q25, q50, q75 = np.percentile(aris, [25, 50, 75]) if aris else (np.nan,) * 3
        print(f"{name:8s} {eps:6g} {q25:6.3f} {q50:7.3f} {q75:6.3f} {np.mean(ks):5.1f} {failed:5d}")
