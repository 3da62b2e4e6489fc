"""Ring samplers, the induced transaction-graph sampler, and random digraphs.

Randomness is organised as counter-based Philox streams keyed by
``(seed, stream_id)``.  Campaigns give trial t its own stream, so results
are reproducible bit-for-bit regardless of how trials are scheduled
across workers.

All subset drawing funnels through one kernel, :func:`_floyd_subsets`,
a vectorised Floyd sampler that draws, for each row, a uniform
without-replacement subset of its candidate pool.  The regular sampler
uses constant subset sizes; the binomial sampler first draws per-row
binomial sizes and reuses the same kernel.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.random import Generator, Philox

from .errors import InvalidConfig, InvalidParams
from .graph import Digraph, Matching, Partition, TransactionGraph

__all__ = [
    "RandomSource",
    "Regular",
    "Binomial",
    "SamplerConfig",
    "sample_ring",
    "sample_transaction_graph",
    "sample_regular_digraph",
    "sample_binomial_digraph",
]

_U64 = (1 << 64) - 1


class RandomSource:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Two sources constructed with identical fields produce identical draw
    sequences.  The underlying generator is stateful: successive uses of
    the *same* instance continue its stream.
    """

    __slots__ = ("seed", "stream_id", "_generator")

    def __init__(self, seed: int = 0, stream_id: int = 0):
        self.seed = int(seed) & _U64
        self.stream_id = int(stream_id) & _U64
        self._generator: Generator | None = None

    @property
    def generator(self) -> Generator:
        if self._generator is None:
            key = np.array([self.seed, self.stream_id], dtype=np.uint64)
            self._generator = Generator(Philox(key=key))
        return self._generator

    def stream(self, stream_id: int) -> "RandomSource":
        """A fresh source with the same seed and the given stream id."""
        return RandomSource(self.seed, stream_id)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"


class _StreamFamily:
    """Cheap per-trial generators for a fixed seed.

    Re-keys a single Philox instance instead of constructing one per
    stream; draws are bit-identical to ``RandomSource(seed, sid).generator``
    (pinned by a unit test).  Not thread-safe; each worker owns its own.
    """

    __slots__ = ("_bitgen", "_gen", "_state")

    def __init__(self, seed: int):
        self._bitgen = Philox(key=np.array([int(seed) & _U64, 0], dtype=np.uint64))
        self._gen = Generator(self._bitgen)
        self._state = self._bitgen.state

    def generator(self, stream_id: int) -> Generator:
        st = self._state
        st["state"]["key"][1] = int(stream_id) & _U64
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self._gen


def _trial_streams(rng: RandomSource, trials: int) -> Iterator[Generator]:
    """One generator per trial: stream ids ``rng.stream_id + t``."""
    family = _StreamFamily(rng.seed)
    base = rng.stream_id
    for t in range(trials):
        yield family.generator((base + t) & _U64)


# -- subset sampling kernel ---------------------------------------------------


def _floyd_subsets(gen: Generator, pool_sizes: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per row i, a uniform ``counts[i]``-subset of ``range(pool_sizes[i])``.

    Returns a ``(k_max, n)`` int array whose column i holds the chosen
    values in rows ``k_max - counts[i] .. k_max - 1``; unused slots are -1.
    Implements Floyd's algorithm with all rows advanced in lockstep, the
    step alignment chosen so that every active row shares the same
    pool-relative bound; all randomness comes from a single bounded
    integer draw of shape ``(k_max, n)``.
    """
    n = int(counts.shape[0])
    k_max = int(counts.max()) if n else 0
    if k_max == 0:
        return np.empty((0, n), dtype=np.int64)
    steps = np.arange(k_max, dtype=np.int64)[:, None]
    t = pool_sizes[None, :] - k_max + steps  # candidate bound per (step, row)
    x = gen.integers(0, np.maximum(t + 1, 1), dtype=np.int64)
    chosen = np.full((k_max, n), -1, dtype=np.int64)
    first_step = k_max - counts
    all_active = bool((first_step == 0).all())
    for s in range(k_max):
        xs = x[s]
        if s:
            collide = (chosen[:s] == xs).any(axis=0)
            vals = np.where(collide, t[s], xs)
        else:
            vals = xs
        if all_active:
            chosen[s] = vals
        else:
            np.copyto(chosen[s], vals, where=first_step <= s)
    return chosen


def _skip_self(chosen: np.ndarray, self_pos: np.ndarray) -> np.ndarray:
    """Map pool-relative candidates to indices with position ``self_pos`` removed.

    Sentinel -1 entries pass through unchanged.
    """
    return chosen + (chosen >= self_pos)


# -- sampler configuration ----------------------------------------------------


@dataclass(frozen=True)
class Regular:
    """Fixed decoy count: rings are uniform (k+1)-subsets around the signer."""

    k: int


@dataclass(frozen=True)
class Binomial:
    """Independent decoys: each chunk mate joins the ring with probability p."""

    p: float


class SamplerConfig:
    """A partition of the users plus the decoy rule applied within chunks."""

    __slots__ = (
        "partition",
        "kind",
        "_chunk_of",
        "_pos_in_chunk",
        "_chunk_flat",
        "_chunk_start",
        "_chunk_sizes",
    )

    def __init__(self, partition: Partition, kind: Regular | Binomial):
        if isinstance(kind, Regular):
            if kind.k < 0:
                raise InvalidConfig("decoy count k must be >= 0")
            smallest = min(partition.chunk_sizes())
            if kind.k >= smallest:
                raise InvalidConfig(
                    f"k={kind.k} must be smaller than every chunk (smallest is {smallest})"
                )
        elif isinstance(kind, Binomial):
            if not 0.0 <= kind.p <= 1.0:
                raise InvalidConfig(f"p={kind.p} outside [0, 1]")
        else:
            raise InvalidConfig(f"unknown sampler kind {kind!r}")
        self.partition = partition
        self.kind = kind
        n = partition.n_users
        chunk_of = np.empty(n, dtype=np.int64)
        pos_in_chunk = np.empty(n, dtype=np.int64)
        flat = np.empty(n, dtype=np.int64)
        starts = np.empty(partition.n_chunks + 1, dtype=np.int64)
        starts[0] = 0
        for ci, chunk in enumerate(partition.chunks):
            starts[ci + 1] = starts[ci] + len(chunk)
            for pos, u in enumerate(chunk):
                chunk_of[u] = ci
                pos_in_chunk[u] = pos
                flat[starts[ci] + pos] = u
        self._chunk_of = chunk_of
        self._pos_in_chunk = pos_in_chunk
        self._chunk_flat = flat
        self._chunk_start = starts
        self._chunk_sizes = np.asarray(partition.chunk_sizes(), dtype=np.int64)

    @property
    def n_users(self) -> int:
        return self.partition.n_users

    def __repr__(self) -> str:
        return f"SamplerConfig({self.partition!r}, {self.kind!r})"


def _decoy_counts(config: SamplerConfig, gen: Generator, pools: np.ndarray) -> np.ndarray:
    if isinstance(config.kind, Regular):
        return np.full(pools.shape, config.kind.k, dtype=np.int64)
    return gen.binomial(pools, config.kind.p).astype(np.int64)


def _sample_decoys(
    config: SamplerConfig, gen: Generator, signers: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Decoy users for each signer: ``(decoys, counts)`` with -1 padding.

    ``decoys`` is ``(k_max, m)``; column j holds the decoys of signer j's
    ring, drawn from the signer's chunk minus the signer.
    """
    cids = config._chunk_of[signers]
    pools = config._chunk_sizes[cids] - 1
    counts = _decoy_counts(config, gen, pools)
    chosen = _floyd_subsets(gen, pools, counts)
    local = _skip_self(chosen, config._pos_in_chunk[signers])
    decoys = np.where(
        chosen >= 0, config._chunk_flat[config._chunk_start[cids] + local], -1
    )
    return decoys, counts


def sample_ring(
    config: SamplerConfig, n_users: int, signer: int, rng: RandomSource
) -> frozenset[int]:
    """One ring for ``signer``: the signer plus decoys from its chunk."""
    if n_users != config.n_users:
        raise InvalidConfig(
            f"config partitions {config.n_users} users, caller declared {n_users}"
        )
    if not 0 <= signer < n_users:
        raise InvalidConfig(f"signer {signer} outside [0, {n_users})")
    signers = np.array([signer], dtype=np.int64)
    decoys, counts = _sample_decoys(config, rng.generator, signers)
    ring = decoys[decoys >= 0].tolist()
    ring.append(signer)
    return frozenset(ring)


def _sample_graph(
    config: SamplerConfig, m: int, gen: Generator
) -> tuple[TransactionGraph, Matching]:
    n = config.n_users
    signers = gen.permutation(n)[:m].astype(np.int64)
    decoys, _counts = _sample_decoys(config, gen, signers)
    signer_list = signers.tolist()
    decoy_cols = decoys.T.tolist()
    members = []
    for j in range(m):
        ring = [u for u in decoy_cols[j] if u >= 0]
        ring.append(signer_list[j])
        ring.sort()
        members.append(ring)
    matching = Matching(zip(signer_list, range(m)))
    graph = TransactionGraph._from_members(n, members, matching=matching)
    return graph, matching


def sample_transaction_graph(
    config: SamplerConfig, n_users: int, m: int, rng: RandomSource
) -> tuple[TransactionGraph, Matching]:
    """Graph of m rings published by m distinct uniformly chosen signers.

    Signer j is drawn uniformly from the users that have not signed yet,
    then samples its ring within its chunk.  The returned matching is the
    true signer assignment and has size m.
    """
    if n_users != config.n_users:
        raise InvalidConfig(
            f"config partitions {config.n_users} users, caller declared {n_users}"
        )
    if not 0 <= m <= n_users:
        raise InvalidConfig(f"signer count {m} outside [0, {n_users}]")
    return _sample_graph(config, m, rng.generator)


# -- random digraph models ----------------------------------------------------


def _digraph_from_in_neighbors(n: int, gen: Generator, counts: np.ndarray) -> Digraph:
    pools = np.full(n, n - 1, dtype=np.int64)
    chosen = _floyd_subsets(gen, pools, counts)
    nbrs = _skip_self(chosen, np.arange(n, dtype=np.int64))
    valid = chosen >= 0
    src = nbrs[valid]
    dst = np.broadcast_to(np.arange(n, dtype=np.int64), chosen.shape)[valid]
    return Digraph._from_arrays(n, src, dst)


def sample_regular_digraph(k: int, n: int, rng: RandomSource) -> Digraph:
    """Uniform digraph in which every node has exactly k in-neighbors.

    Independence across nodes makes per-node uniform k-subsets exactly
    uniform over all k-in-degree regular digraphs.
    """
    if n < 1 or not 0 <= k < n:
        raise InvalidParams(f"need 0 <= k < n, got k={k}, n={n}")
    return _digraph_from_in_neighbors(
        n, rng.generator, np.full(n, k, dtype=np.int64)
    )


def sample_binomial_digraph(p: float, n: int, rng: RandomSource) -> Digraph:
    """Digraph with each of the n(n-1) possible edges present with probability p.

    Sampled in-degree first: each node draws d ~ Binomial(n-1, p) and then
    a uniform d-subset of in-neighbors, which is distribution-identical to
    the edge-wise definition at O(p n^2) expected work instead of Theta(n^2).
    """
    if n < 1 or not 0.0 <= p <= 1.0:
        raise InvalidParams(f"need n >= 1 and p in [0, 1], got n={n}, p={p}")
    gen = rng.generator
    counts = gen.binomial(n - 1, p, size=n).astype(np.int64) if n > 1 else np.zeros(
        1, dtype=np.int64
    )
    return _digraph_from_in_neighbors(n, gen, counts)
