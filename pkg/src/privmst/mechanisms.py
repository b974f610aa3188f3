"""Randomized privacy primitives over a public graph topology.

All randomness comes from an explicit :class:`RandomSource`.  The generator is
numpy's PCG64 seeded through ``SeedSequence``; its output stream is fixed by
the seed and identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import SpanningTree, WeightedGraph

_TWO_POW_53 = float(2 ** 53)
_SEED_MASK = (1 << 64) - 1

#: sanitized weights are clamped into this closed interval
CLAMP_LOW = 1e-9
CLAMP_HIGH = 1.0


def split_seed(master_seed: int, index: int) -> int:
    """Seed for the ``index``-th independent trial: ``master_seed XOR index``."""
    return (int(master_seed) ^ int(index)) & _SEED_MASK


class RandomSource:
    """Single-owner random stream.  Same seed, same sequence."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _SEED_MASK
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index: int) -> "RandomSource":
        return RandomSource(split_seed(self.seed, index))

    def open_uniform(self, size=None):
        """Uniform draws on the open interval (0, 1) from 53-bit integers."""
        k = self._gen.integers(0, 1 << 53, size=size, dtype=np.int64)
        return (k + 0.5) / _TWO_POW_53

    def integer(self, high: int) -> int:
        return int(self._gen.integers(0, high))

    @property
    def state(self) -> dict:
        return self._gen.bit_generator.state

    def __repr__(self):
        return f"RandomSource(seed={self.seed})"


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    mu: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class WeightReleaseParams:
    """Laplace scale ``scale_s``, shift ``tau`` and divisor ``p``."""

    scale_s: float
    tau: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if not self.scale_s > 0:
            raise ValueError("Laplace scale must be positive")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.p < 1:
            raise ValueError("p must be >= 1")


def laplace_samples(rng: RandomSource, location, scale: float, size=None) -> np.ndarray:
    """Inverse-CDF Laplace draws: ``loc - scale * sgn(u) * ln(1 - 2|u|)``,
    ``u`` uniform on (-1/2, 1/2)."""
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    u = rng.open_uniform(size) - 0.5
    return location - scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def laplace_sample(rng: RandomSource, location: float, scale: float) -> float:
    return float(laplace_samples(rng, location, scale))


def laplace_log_density(x, location, scale):
    return -np.log(2.0 * scale) - np.abs(np.asarray(x) - location) / scale


# --------------------------------------------------------------------------
# Exponential mechanism
# --------------------------------------------------------------------------

def _range_weights(g: WeightedGraph | np.ndarray, range_edges) -> np.ndarray:
    w = g.w if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)
    return w[np.asarray(list(range_edges), dtype=np.int64)]


def utility_u(g: WeightedGraph, range_edges, r: int) -> float:
    """``-|w(r) - min over the range|``."""
    range_edges = list(range_edges)
    if not range_edges:
        raise ValueError("empty range")
    if r not in range_edges:
        raise ValueError(f"edge {r} is not in the range")
    w = g.w if isinstance(g, WeightedGraph) else np.asarray(g)
    return -abs(float(w[r]) - float(_range_weights(g, range_edges).min()))


def utilities(range_weights: np.ndarray) -> np.ndarray:
    return -np.abs(range_weights - range_weights.min())


def utility_sensitivity(budget: PrivacyBudget | float) -> float:
    """Sensitivity of the PAMST utility: ``2 * mu``."""
    mu = budget.mu if isinstance(budget, PrivacyBudget) else float(budget)
    return 2.0 * mu


def exponential_probabilities(range_weights, epsilon_step: float, delta_u: float) -> np.ndarray:
    """Selection probabilities ``exp(eps * u / (2 du))`` normalized over the range.

    Computed as a max-shifted softmax.  ``epsilon_step = inf`` gives the
    limit distribution, uniform over the minimum-weight edges.
    """
    rw = np.asarray(range_weights, dtype=float)
    if rw.size == 0:
        raise ValueError("empty range")
    u = utilities(rw)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite utility")
    if math.isinf(epsilon_step):
        best = (u == u.max()).astype(float)
        return best / best.sum()
    if not delta_u > 0:
        raise ValueError("delta_u must be positive")
    z = epsilon_step * u / (2.0 * delta_u)
    z -= z.max()
    p = np.exp(z)
    return p / p.sum()


def _sample_index(rng: RandomSource, probs: np.ndarray) -> int:
    cdf = np.cumsum(probs)
    x = float(rng.open_uniform()) * cdf[-1]
    return min(int(np.searchsorted(cdf, x, side="right")), len(probs) - 1)


def exponential_mechanism(rng: RandomSource, g: WeightedGraph, range_edges, epsilon_step: float,
                          delta_u: float) -> int:
    """Draw one edge id from ``range_edges`` (taken in the given order)."""
    range_edges = list(range_edges)
    probs = exponential_probabilities(_range_weights(g, range_edges), epsilon_step, delta_u)
    return int(range_edges[_sample_index(rng, probs)])


# --------------------------------------------------------------------------
# Weight release
# --------------------------------------------------------------------------

def default_release_params(scale_s: float, w_pub_max: float = 1.0) -> WeightReleaseParams:
    """``tau = 5 s + w_pub_max`` and ``p = w_pub_max + 2 tau``.

    For raw weights in [0, w_pub_max] the released value leaves (0, 1] only
    when the noise exceeds ``5 s`` in magnitude (probability ``e^-5``).
    """
    tau = 5.0 * scale_s + w_pub_max
    return WeightReleaseParams(scale_s, tau, w_pub_max + 2.0 * tau)


def sanitize(rng: RandomSource, weights, params: WeightReleaseParams, clamp: bool = True):
    """``(w + Lap(0, s) + tau) / p`` elementwise; returns ``(values, clamp_count)``.

    ``weights`` may be any shape; one independent draw per element.
    """
    w = np.asarray(weights, dtype=float)
    noisy = (w + laplace_samples(rng, 0.0, params.scale_s, w.shape) + params.tau) / params.p
    if not clamp:
        return noisy, 0
    out_of_range = (noisy < CLAMP_LOW) | (noisy > CLAMP_HIGH)
    return np.clip(noisy, CLAMP_LOW, CLAMP_HIGH), int(out_of_range.sum())


@dataclass(frozen=True)
class ReleasedTree:
    tree: SpanningTree
    clamp_count: int


def weight_release(rng: RandomSource, t: SpanningTree, params: WeightReleaseParams) -> ReleasedTree:
    """Sanitize every tree weight independently, keeping the topology."""
    if t.weights is None:
        raise ValueError("weight release needs a weighted tree")
    values, clamped = sanitize(rng, t.weights, params)
    return ReleasedTree(t.with_weights(values), clamped)
