"""Differentially private minimum-spanning-tree clustering on weighted graphs."""

from .graph import (Fragment, GraphError, GraphTopology, NodePartition, SpanningTree,
                    WeightFunction, WeightedGraph, alpha_ratio, check_strong_homogeneity,
                    check_sufficient_homogeneity, check_weak_homogeneity, cut_set,
                    has_partitioning_topology, is_homogeneously_separable,
                    minimum_path_distance, minimum_spanning_tree, subtree_restriction)
from .mechanisms import (PrivacyBudget, RandomSource, WeightReleaseParams,
                         exponential_mechanism, laplace_sample, utility_sensitivity,
                         utility_u, weight_release)
from .pamst import expected_weight_gap, pamst
from .dbmstclu import (ClusteringState, dbcvi, dispersion, evaluate_cut, run_dbmstclu,
                       separation, validity_index)
from .pipeline import PtclustConfig, ptclust
from .datagen import (PlantedInstance, generate_circles, generate_moons,
                      generate_planted_partition)
from .analysis import (partition_agreement, topology_bound, estimate_topology_probability,
                       estimate_separability_preservation, check_cluster_definition,
                       mechanism_privacy_audit)

__version__ = "0.1.0"

__all__ = [
    "Fragment", "GraphError", "GraphTopology", "NodePartition", "SpanningTree",
    "WeightFunction", "WeightedGraph", "alpha_ratio", "check_strong_homogeneity",
    "check_sufficient_homogeneity", "check_weak_homogeneity", "cut_set",
    "has_partitioning_topology", "is_homogeneously_separable", "minimum_path_distance",
    "minimum_spanning_tree", "subtree_restriction", "PrivacyBudget", "RandomSource",
    "WeightReleaseParams", "exponential_mechanism", "laplace_sample", "utility_sensitivity",
    "utility_u", "weight_release", "expected_weight_gap", "pamst", "ClusteringState", "dbcvi",
    "dispersion", "evaluate_cut", "run_dbmstclu", "separation", "validity_index",
    "PtclustConfig", "ptclust", "PlantedInstance", "generate_circles", "generate_moons",
    "generate_planted_partition", "partition_agreement", "topology_bound",
    "estimate_topology_probability", "estimate_separability_preservation",
    "check_cluster_definition", "mechanism_privacy_audit"
]
