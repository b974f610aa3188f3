"""PTClust: PAMST topology at eps/2, Weight-Release at scale 2 mu / eps, then DBMSTClu."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .dbmstclu import DbmstcluResult, run_dbmstclu
from .graph import GraphError, WeightedGraph
from .mechanisms import (PrivacyBudget, RandomSource, WeightReleaseParams,
                         default_release_params, weight_release)
from .pamst import pamst

PROVENANCE_FORMAT = "privmst.ptclust.provenance"
PROVENANCE_VERSION = 1

#: a run fails outright when at least this fraction of weights was clamped
MAX_CLAMP_RATE = 0.5


class InfeasibleParameters(ValueError):
    """Parameters that cannot produce a meaningful release."""


@dataclass(frozen=True)
class PtclustConfig:
    epsilon: float
    mu: float
    tau: float | None = None
    p: float | None = None
    w_pub_max: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if (self.tau is None) != (self.p is None):
            raise ValueError("tau and p must be given together or both left unset")

    @property
    def budget(self) -> PrivacyBudget:
        return PrivacyBudget(self.epsilon, self.mu)

    def release_params(self) -> WeightReleaseParams:
        s = 2.0 * self.mu / self.epsilon
        if self.tau is None:
            return default_release_params(s, self.w_pub_max)
        return WeightReleaseParams(s, self.tau, self.p)


@dataclass(frozen=True)
class Provenance:
    seed: int
    epsilon: float
    mu: float
    tau: float
    p: float
    scale_s: float
    pamst_epsilon: float
    release_epsilon: float
    clamp_count: int
    tree_edges: list
    sanitized_weights: list
    cut_edges: list
    dbcvi: float
    assignment: list

    def to_dict(self) -> dict:
        d = {"format": PROVENANCE_FORMAT, "version": PROVENANCE_VERSION}
        d.update(asdict(self))
        return d

    def to_json(self) -> str:
        # repr-exact floats; json emits shortest round-tripping repr
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        if d.get("format") != PROVENANCE_FORMAT:
            raise ValueError("not a PTClust provenance record")
        if d.get("version") != PROVENANCE_VERSION:
            raise ValueError(f"unsupported provenance version {d.get('version')}")
        return cls(**{k: v for k, v in d.items() if k not in ("format", "version")})

    def config(self) -> PtclustConfig:
        return PtclustConfig(self.epsilon, self.mu, self.tau, self.p, seed=self.seed)


@dataclass(frozen=True)
class PtclustResult:
    clustering: DbmstcluResult
    provenance: Provenance

    @property
    def partition(self):
        return self.clustering.partition


def ptclust(g: WeightedGraph, config: PtclustConfig) -> PtclustResult:
    """Differentially private clustering of ``g`` at total budget ``config.epsilon``."""
    if g.node_count < 3:
        raise GraphError("PTClust needs at least three nodes")
    rng = RandomSource(config.seed)
    half = config.epsilon / 2.0
    topology = pamst(rng, g, PrivacyBudget(half, config.mu))
    params = config.release_params()
    released = weight_release(rng, topology.attach(g), params)
    n_edges = len(topology.edges)
    if released.clamp_count >= MAX_CLAMP_RATE * n_edges:
        raise InfeasibleParameters(
            f"{released.clamp_count}/{n_edges} sanitized weights fell outside (0, 1]; "
            f"tau={params.tau}, p={params.p} are unsuitable for scale {params.scale_s}")
    result = run_dbmstclu(released.tree)
    prov = Provenance(
        seed=int(config.seed), epsilon=float(config.epsilon), mu=float(config.mu),
        tau=float(params.tau), p=float(params.p), scale_s=float(params.scale_s),
        pamst_epsilon=half, release_epsilon=half,
        clamp_count=released.clamp_count,
        tree_edges=list(released.tree.edges),
        sanitized_weights=released.tree.weights.tolist(),
        cut_edges=list(result.state.cut_edges),
        dbcvi=float(result.state.dbcvi),
        assignment=(result.state.cluster_of + 1).tolist(),
    )
    assert math.isclose(prov.pamst_epsilon + prov.release_epsilon, config.epsilon)
    return PtclustResult(result, prov)


def replay(g: WeightedGraph, prov: Provenance) -> PtclustResult:
    """Re-run PTClust from a provenance record."""
    return ptclust(g, prov.config())
