"""Min-entropy anonymity of partitioning samplers.

The anonymity of a sampler against a signer distribution is the
conditional min-entropy of the signer given the published ring,

    alpha = -ln sum_r max_s ( Pr[ring = r | signer = s] * p(s) ),

reported in nats.  At desk scale alpha is computed exactly by
enumerating rings chunk by chunk (chunks are independent); for either
sampler an analytic lower bound ln k - ln(eps_P + 1) is available, where
eps_P aggregates how far the signer distribution deviates from
chunk-wise uniformity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import HypothesisViolated, InstanceTooLarge, InvalidParams
from .graph import Partition
from .samplers import Binomial, Regular, SamplerConfig

__all__ = [
    "SignerDistribution",
    "DistributionDeviation",
    "anonymity_exact",
    "anonymity_bound_regular",
    "anonymity_bound_binomial",
    "REGULAR_EXACT_CAP",
    "BINOMIAL_EXACT_CAP",
]

# Exact enumeration caps: Regular enumerates C(|C|, k+1) rings per chunk,
# Binomial enumerates all 2^|C| subsets.
REGULAR_EXACT_CAP = 20
BINOMIAL_EXACT_CAP = 16

_WEIGHT_SUM_TOL = 1e-12


class SignerDistribution:
    """Per-user signing probabilities (single-signer model)."""

    __slots__ = ("weights",)

    def __init__(self, weights: Iterable[float]):
        ws = tuple(float(w) for w in weights)
        if any(w < 0.0 for w in ws):
            raise InvalidParams("negative signer weight")
        if abs(math.fsum(ws) - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidParams(f"weights sum to {math.fsum(ws)!r}, expected 1")
        self.weights = ws

    @classmethod
    def uniform(cls, n_users: int) -> "SignerDistribution":
        if n_users < 1:
            raise InvalidParams("need at least one user")
        return cls([1.0 / n_users] * n_users)

    @property
    def n_users(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"SignerDistribution(n_users={self.n_users})"


@dataclass(frozen=True)
class DistributionDeviation:
    """Chunk-wise deviation of a signer distribution from uniformity.

    ``chunk_means`` holds the mean weight per chunk, ``chunk_deviations``
    the largest absolute deviation from that mean, and ``total`` the
    aggregate sum over chunks of |C| * deviation(C) that enters the
    entropy bounds.
    """

    chunk_means: tuple[float, ...]
    chunk_deviations: tuple[float, ...]
    total: float

    @classmethod
    def from_distribution(
        cls, partition: Partition, dist: SignerDistribution
    ) -> "DistributionDeviation":
        if dist.n_users != partition.n_users:
            raise InvalidParams(
               f"distribution covers {dist.n_users} users, partition {partition.n_users}"
            )
        means = []
        devs = []
        total = 0.0
        for chunk in partition.chunks:
            ws = [dist.weights[u] for u in chunk]
            mu = math.fsum(ws) / len(ws)
            eps = max(abs(w - mu) for w in ws)
            means.append(mu)
            devs.append(eps)
            total += len(ws) * eps
        return cls(tuple(means), tuple(devs), total)

    @classmethod
    def exact_uniform(cls, partition: Partition) -> "DistributionDeviation":
        n = partition.n_users
        return cls.from_distribution(partition, SignerDistribution.uniform(n))


def _chunk_term_regular(chunk: Sequence[int], weights, k: int) -> float:
    denom = math.comb(len(chunk) - 1, k)
    total = 0.0
    for ring in combinations(chunk, k + 1):
        total += max(weights[u] for u in ring)
    return total / denom


def _chunk_term_binomial(chunk: Sequence[int], weights, p: float) -> float:
    size = len(chunk)
    n_masks = 1 << size
    # max weight over every subset, by peeling the lowest member bit
    max_w = [0.0] * n_masks
    for mask in range(1, n_masks):
        low = mask & -mask
        max_w[mask] = max(max_w[mask ^ low], weights[chunk[low.bit_length() - 1]])
    pow_in = [1.0] * size
    pow_out = [1.0] * (size + 1)
    for i in range(1, size):
        pow_in[i] = pow_in[i - 1] * p
    for i in range(1, size + 1):
        pow_out[i] = pow_out[i - 1] * (1.0 - p)
    total = 0.0
    for mask in range(1, n_masks):
        members = mask.bit_count()
        total += pow_in[members - 1] * pow_out[size - members] * max_w[mask]
    return total


def anonymity_exact(config: SamplerConfig, dist: SignerDistribution) -> float:
    """Exact conditional min-entropy of the signer given its ring, in nats.

    Enumerates every ring a chunk can emit; feasible for chunks up to
    ``REGULAR_EXACT_CAP`` (Regular) or ``BINOMIAL_EXACT_CAP`` (Binomial)
    members.
    """
    if dist.n_users != config.n_users:
        raise InvalidParams(
            f"distribution covers {dist.n_users} users, config {config.n_users}"
        )
    kind = config.kind
    total = 0.0
    for chunk in config.partition.chunks:
        if isinstance(kind, Regular):
            if len(chunk) > REGULAR_EXACT_CAP:
                raise InstanceTooLarge(
                    f"chunk of {len(chunk)} exceeds exact cap {REGULAR_EXACT_CAP}"
                )
            total += _chunk_term_regular(chunk, dist.weights, kind.k)
        else:
            if len(chunk) > BINOMIAL_EXACT_CAP:
                raise InstanceTooLarge(
                    f"chunk of {len(chunk)} exceeds exact cap {BINOMIAL_EXACT_CAP}"
                )
            total += _chunk_term_binomial(chunk, dist.weights, kind.p)
    return -math.log(total)


def anonymity_bound_regular(k: int, deviation: DistributionDeviation) -> float:
    """Lower bound ln k - ln(eps_P + 1) for the fixed-decoy sampler."""
    if k < 1:
        raise InvalidParams(f"need k >= 1, got {k}")
    return math.log(k) - math.log1p(deviation.total)


def anonymity_bound_binomial(
    k: int,
    deviation: DistributionDeviation,
    config: SamplerConfig | None = None,
) -> float:
    """Lower bound ln k - ln(eps_P + 1) for the independent-decoy sampler.

    Valid under the hypothesis p * |C| > k for every chunk, which is
    checked when the sampler configuration is supplied.
    """
    if k < 1:
        raise InvalidParams(f"need k >= 1, got {k}")
    if config is not None:
        if not isinstance(config.kind, Binomial):
            raise InvalidParams("config must use the binomial sampler")
        p = config.kind.p
        for chunk in config.partition.chunks:
            if p * len(chunk) <= k:
                raise HypothesisViolated(
                    f"p*|C| = {p * len(chunk)} <= k = {k} for a chunk of {len(chunk)}"
                )
    return math.log(k) - math.log1p(deviation.total)
