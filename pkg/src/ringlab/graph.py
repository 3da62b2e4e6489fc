"""Bipartite transaction graphs, matchings, digraphs, and partitions.

A transaction graph records which users are members of which rings.  Its
defining property is that some signer assignment covers every ring, i.e.
a maximum matching of size ``n_rings`` exists.  The raw constructor only
enforces structural well-formedness (index ranges, no duplicate edges,
``n_rings <= n_users``); the full transaction-graph property is
established either by :func:`validate` or by passing a ``matching``
certificate at construction.  Graphs produced by the ring samplers carry
their signer assignment as certificate, so the expensive matching
computation never runs on the Monte Carlo hot path.  The one producer of
structurally valid but *unvalidated* graphs is the corrupted-user
reduction in :mod:`ringlab.adversary`, which may leave rings empty.

All types are immutable after construction; every operation returns new
values.  Indices are 0-based throughout, including file formats.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    EmptyRing,
    IndexOutOfRange,
    MatchingNotMaximum,
    NotATransactionGraph,
    RingCrossesChunks,
)

__all__ = [
    "TransactionGraph",
    "Matching",
    "Digraph",
    "Partition",
    "GraphChunk",
    "validate",
    "maximum_matching",
    "upper_graph",
    "induced_digraph",
    "scc",
    "is_strongly_connected",
    "reachable_from",
    "partition_graph",
]


class Matching:
    """An injective assignment of users to rings, stored as (user, ring) pairs.

    Pairs are kept sorted by ring index.  Whether the pairs are edges of a
    particular graph is checked by the operations that take both.
    """

    __slots__ = ("pairs", "_user_for_ring", "_pairset")

    def __init__(self, pairs: Iterable[tuple[int, int]]):
        canon = tuple(sorted(((int(u), int(r)) for u, r in pairs), key=lambda p: p[1]))
        users = [u for u, _ in canon]
        rings = [r for _, r in canon]
        if len(set(users)) != len(users):
            raise ValueError("matching reuses a user")
        if len(set(rings)) != len(rings):
            raise ValueError("matching reuses a ring")
        self.pairs = canon
        self._user_for_ring = {r: u for u, r in canon}
        self._pairset = frozenset(canon)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def user_for_ring(self, ring: int) -> int | None:
        return self._user_for_ring.get(ring)

    @property
    def users(self) -> frozenset[int]:
        return frozenset(u for u, _ in self.pairs)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self._pairset

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Matching({list(self.pairs)!r})"


class TransactionGraph:
    """Bipartite graph of ``n_users`` users and ``n_rings`` rings.

    Adjacency is stored in both directions (ring -> members and
    user -> rings) for O(1)-ish membership work in the core computation;
    the flat edge set is materialised lazily.
    """

    __slots__ = ("n_users", "n_rings", "_members", "_rings_of", "_edge_set")

    def __init__(
        self,
        n_users: int,
        n_rings: int,
        edges: Iterable[tuple[int, int]],
        *,
        matching: Matching | None = None,
    ):
        n_users = int(n_users)
        n_rings = int(n_rings)
        if n_users < 0 or n_rings < 0:
            raise IndexOutOfRange("negative vertex count")
        if n_rings > n_users:
            raise NotATransactionGraph(
                f"{n_rings} rings cannot all have distinct signers among {n_users} users"
            )
        members: list[list[int]] = [[] for _ in range(n_rings)]
        rings_of: list[list[int]] = [[] for _ in range(n_users)]
        seen: set[tuple[int, int]] = set()
        for u, r in edges:
            u = int(u)
            r = int(r)
            if not 0 <= u < n_users:
                raise IndexOutOfRange(f"user index {u} outside [0, {n_users})")
            if not 0 <= r < n_rings:
                raise IndexOutOfRange(f"ring index {r} outside [0, {n_rings})")
            if (u, r) in seen:
                raise ValueError(f"duplicate edge ({u}, {r})")
            seen.add((u, r))
            members[r].append(u)
            rings_of[u].append(r)
        self.n_users = n_users
        self.n_rings = n_rings
        self._members = tuple(tuple(sorted(ms)) for ms in members)
        self._rings_of = tuple(tuple(sorted(rs)) for rs in rings_of)
        self._edge_set: frozenset[tuple[int, int]] | None = None
        if matching is not None:
            self._check_certificate(matching)

    @classmethod
    def _from_members(
        cls,
        n_users: int,
        members: Sequence[Sequence[int]],
        matching: Matching | None = None,
    ) -> "TransactionGraph":
        """Trusted fast path for sampler output: per-ring sorted member lists."""
        g = cls.__new__(cls)
        g.n_users = n_users
        g.n_rings = len(members)
        g._members = tuple(tuple(ms) for ms in members)
        rings_of: list[list[int]] = [[] for _ in range(n_users)]
        for r, ms in enumerate(g._members):
            for u in ms:
                rings_of[u].append(r)
        g._rings_of = tuple(tuple(rs) for rs in rings_of)
        g._edge_set = None
        if matching is not None:
            g._check_certificate(matching)
        return g

    def _check_certificate(self, matching: Matching) -> None:
        if matching.size != self.n_rings:
            raise NotATransactionGraph(
                f"certificate matching has size {matching.size}, need {self.n_rings}"
            )
        for u, r in matching:
            if not self.has_edge(u, r):
                raise ValueError(f"certificate pair ({u}, {r}) is not an edge")

    # -- accessors ---------------------------------------------------------

    def ring_members(self, ring: int) -> tuple[int, ...]:
        return self._members[ring]

    def rings_of_user(self, user: int) -> tuple[int, ...]:
        return self._rings_of[user]

    def has_edge(self, user: int, ring: int) -> bool:
        ms = self._members[ring]
        if len(ms) > 16:
            lo = int(np.searchsorted(ms, user))
            return lo < len(ms) and ms[lo] == user
        return user in ms

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        if self._edge_set is None:
            self._edge_set = frozenset(
                (u, r) for r, ms in enumerate(self._members) for u in ms
            )
        return self._edge_set

    @property
    def edge_count(self) -> int:
        return sum(len(ms) for ms in self._members)

    @property
    def is_balanced(self) -> bool:
        return self.n_users == self.n_rings

    def ring_sizes(self) -> tuple[int, ...]:
        return tuple(len(ms) for ms in self._members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransactionGraph):
            return NotImplemented
        return (
            self.n_users == other.n_users
            and self.n_rings == other.n_rings
            and self._members == other._members
        )

    def __hash__(self) -> int:
        return hash((self.n_users, self.n_rings, self._members))

    def __repr__(self) -> str:
        return (
            f"TransactionGraph(n_users={self.n_users}, n_rings={self.n_rings}, "
            f"edges={self.edge_count})"
        )


class Digraph:
    """Directed graph on ``n_nodes`` nodes without self-loops or parallel edges.

    Edges are held as flat source/target arrays; per-node sorted successor
    lists are derived lazily.  Strong-connectivity checking works on the raw
    arrays so the Monte Carlo samplers never pay for sorting.
    """

    __slots__ = ("n_nodes", "_src", "_dst", "_csr", "_adj")

    def __init__(self, n_nodes: int, edges: Iterable[tuple[int, int]] = ()):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise ValueError("negative node count")
        seen: set[tuple[int, int]] = set()
        src: list[int] = []
        dst: list[int] = []
        for a, b in edges:
            a = int(a)
            b = int(b)
            if not (0 <= a < n_nodes and 0 <= b < n_nodes):
                raise IndexOutOfRange(f"edge ({a}, {b}) outside [0, {n_nodes})")
            if a == b:
                raise ValueError(f"self-loop at node {a}")
            if (a, b) in seen:
                raise ValueError(f"parallel edge ({a}, {b})")
            seen.add((a, b))
            src.append(a)
            dst.append(b)
        self.n_nodes = n_nodes
        self._src = np.asarray(src, dtype=np.int64)
        self._dst = np.asarray(dst, dtype=np.int64)
        self._csr = None
        self._adj = None

    @classmethod
    def _from_arrays(cls, n_nodes: int, src: np.ndarray, dst: np.ndarray) -> "Digraph":
        """Trusted fast path: caller guarantees validity (samplers do by construction)."""
        d = cls.__new__(cls)
        d.n_nodes = n_nodes
        d._src = src
        d._dst = dst
        d._csr = None
        d._adj = None
        return d

    @property
    def n_edges(self) -> int:
        return int(self._src.shape[0])

    def _sorted_csr(self) -> tuple[np.ndarray, np.ndarray]:
        if self._csr is None:
            order = np.lexsort((self._dst, self._src))
            targets = self._dst[order]
            counts = np.bincount(self._src, minlength=self.n_nodes)
            indptr = np.concatenate(([0], np.cumsum(counts)))
            self._csr = (indptr, targets)
        return self._csr

    @property
    def out_adjacency(self) -> tuple[tuple[int, ...], ...]:
        if self._adj is None:
            indptr, targets = self._sorted_csr()
            tl = targets.tolist()
            ip = indptr.tolist()
            self._adj = tuple(
                tuple(tl[ip[v] : ip[v + 1]]) for v in range(self.n_nodes)
            )
        return self._adj

    def successors(self, node: int) -> tuple[int, ...]:
        return self.out_adjacency[node]

    def edges(self) -> list[tuple[int, int]]:
        indptr, targets = self._sorted_csr()
        src = np.repeat(np.arange(self.n_nodes), np.diff(indptr))
        return list(zip(src.tolist(), targets.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and self.edges() == other.edges()

    def __hash__(self) -> int:
        return hash((self.n_nodes, tuple(self.edges())))

    def __repr__(self) -> str:
        return f"Digraph(n_nodes={self.n_nodes}, edges={self.n_edges})"


class Partition:
    """Disjoint cover of the user set ``[0, n_users)`` by non-empty chunks."""

    __slots__ = ("chunks", "n_users", "_chunk_of")

    def __init__(self, chunks: Iterable[Iterable[int]]):
        canon = [tuple(sorted(int(u) for u in c)) for c in chunks]
        if any(len(c) == 0 for c in canon):
            raise ValueError("empty chunk")
        canon.sort(key=lambda c: c[0])
        n = sum(len(c) for c in canon)
        chunk_of = np.full(n, -1, dtype=np.int64)
        for idx, c in enumerate(canon):
            for u in c:
                if not 0 <= u < n:
                    raise IndexOutOfRange(f"user {u} outside [0, {n})")
                if chunk_of[u] != -1:
                    raise ValueError(f"user {u} appears in two chunks")
                chunk_of[u] = idx
        # disjointness plus total size n implies the union covers [0, n)
        self.chunks = tuple(canon)
        self.n_users = n
        self._chunk_of = chunk_of

    @classmethod
    def equal_chunks(cls, n_users: int, chunk_size: int) -> "Partition":
        if chunk_size <= 0 or n_users % chunk_size != 0:
            raise ValueError("chunk_size must divide n_users")
        return cls(
            range(i, i + chunk_size) for i in range(0, n_users, chunk_size)
        )

    @classmethod
    def single(cls, n_users: int) -> "Partition":
        return cls([range(n_users)])

    @property
    def n_chunks(self) -> int:
        return len(self.chunks)

    def chunk_of(self, user: int) -> int:
        return int(self._chunk_of[user])

    def chunk_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.chunks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.chunks == other.chunks

    def __hash__(self) -> int:
        return hash(self.chunks)

    def __repr__(self) -> str:
        return f"Partition(n_users={self.n_users}, chunks={self.n_chunks})"


@dataclass(frozen=True)
class GraphChunk:
    """One chunk subgraph with index maps back to the parent graph."""

    graph: TransactionGraph
    users: tuple[int, ...]  # local user index -> parent user index
    rings: tuple[int, ...]  # local ring index -> parent ring index


# -- matchings ---------------------------------------------------------------


def maximum_matching(graph: TransactionGraph) -> Matching:
    """A maximum matching, deterministic for a fixed input.

    Augmenting paths are searched from rings in ascending index order and
    members are tried in ascending user order, so repeated calls return the
    identical matching.  Which maximum matching is returned is irrelevant to
    the core computation (the core is invariant under the choice; a property
    test pins this against an independent augmenting order).
    """
    return _kuhn(graph)


def _kuhn(
    graph: TransactionGraph, rings_desc: bool = False, users_desc: bool = False
) -> Matching:
    """Augmenting-path (Kuhn) maximum matching with a configurable scan order.

    The non-default orders exist for tests that assert order-invariance of
    derived results; production callers use the defaults.
    """
    n_users, n_rings = graph.n_users, graph.n_rings
    match_user = [-1] * n_users  # user -> ring
    match_ring = [-1] * n_rings  # ring -> user
    ring_order = range(n_rings - 1, -1, -1) if rings_desc else range(n_rings)

    def members(j: int) -> tuple[int, ...]:
        ms = graph.ring_members(j)
        return tuple(reversed(ms)) if users_desc else ms

    for start in ring_order:
        if not graph.ring_members(start):
            continue
        visited: set[int] = set()
        # frame: [ring, member iterator, member that led to the child frame]
        stack: list[list] = [[start, iter(members(start)), -1]]
        while stack:
            frame = stack[-1]
            ring, it = frame[0], frame[1]
            descended = False
            for u in it:
                if u in visited:
                    continue
                visited.add(u)
                owner = match_user[u]
                if owner == -1:
                    # free user: commit the augmenting path along the stack
                    match_user[u] = ring
                    match_ring[ring] = u
                    for parent in stack[:-1]:
                        pu = parent[2]
                        match_user[pu] = parent[0]
                        match_ring[parent[0]] = pu
                    stack.clear()
                    descended = True
                    break
                frame[2] = u
                stack.append([owner, iter(members(owner)), -1])
                descended = True
                break
            if not descended:
                stack.pop()
    return Matching((u, r) for r, u in enumerate(match_ring) if u != -1)


def validate(graph: TransactionGraph) -> TransactionGraph:
    """Check the full transaction-graph contract, returning the graph.

    Raises :class:`EmptyRing` for a memberless ring and
    :class:`NotATransactionGraph` when no matching covers every ring.
    """
    for j in range(graph.n_rings):
        if not graph.ring_members(j):
            raise EmptyRing(j)
    m = maximum_matching(graph)
    if m.size != graph.n_rings:
        raise NotATransactionGraph(
            f"maximum matching has size {m.size} < {graph.n_rings} rings"
        )
    return graph


def _require_covering(graph: TransactionGraph, matching: Matching) -> None:
    if matching.size != graph.n_rings:
        raise MatchingNotMaximum(
            f"matching covers {matching.size} of {graph.n_rings} rings"
        )
    for u, r in matching:
        if not graph.has_edge(u, r):
            raise ValueError(f"matching pair ({u}, {r}) is not an edge")


def upper_graph(graph: TransactionGraph, matching: Matching) -> TransactionGraph:
    """Balanced subgraph on the matched users, relabelled so user j signs ring j."""
    _require_covering(graph, matching)
    m = graph.n_rings
    new_index = {matching.user_for_ring(j): j for j in range(m)}
    members: list[list[int]] = []
    for r in range(m):
        members.append(sorted(new_index[u] for u in graph.ring_members(r) if u in new_index))
    result = TransactionGraph._from_members(m, members)
    result._check_certificate(Matching((j, j) for j in range(m)))
    return result


def _user_relabel(graph: TransactionGraph, matching: Matching) -> list[int]:
    """Node index per user: ring j's signer becomes node j, the rest follow ascending."""
    m = graph.n_rings
    relabel = [-1] * graph.n_users
    for u, r in matching:
        relabel[u] = r
    nxt = m
    for u in range(graph.n_users):
        if relabel[u] == -1:
            relabel[u] = nxt
            nxt += 1
    return relabel


def induced_digraph(graph: TransactionGraph, matching: Matching) -> Digraph:
    """Digraph on user nodes: edge i -> j when user i sits in ring j (i != j).

    Users are relabelled so that ring j's matched user is node j; unmatched
    users take nodes ``n_rings..n_users-1`` in ascending original order.
    """
    _require_covering(graph, matching)
    relabel = _user_relabel(graph, matching)
    src: list[int] = []
    dst: list[int] = []
    for r in range(graph.n_rings):
        for u in graph.ring_members(r):
            i = relabel[u]
            if i != r:
                src.append(i)
                dst.append(r)
    return Digraph._from_arrays(
        graph.n_users,
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
    )


# -- digraph algorithms ------------------------------------------------------


def scc(digraph: Digraph) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Strongly connected components (iterative Tarjan).

    Returns ``(components, component_of)`` where components are sorted node
    tuples ordered by their smallest node, and ``component_of[v]`` indexes
    into that ordering.
    """
    n = digraph.n_nodes
    adj = digraph.out_adjacency
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    tarjan_stack: list[int] = []
    raw_comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        frames: list[list[int]] = [[root, 0]]
        while frames:
            frame = frames[-1]
            v, ptr = frame
            if ptr == 0:
                index[v] = low[v] = counter
                counter += 1
                tarjan_stack.append(v)
                on_stack[v] = True
            succ = adj[v]
            child = -1
            while ptr < len(succ):
                w = succ[ptr]
                ptr += 1
                if index[w] == -1:
                    child = w
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            frame[1] = ptr
            if child != -1:
                frames.append([child, 0])
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = tarjan_stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                raw_comps.append(comp)
    comps = sorted((tuple(sorted(c)) for c in raw_comps), key=lambda c: c[0])
    component_of = [0] * n
    for ci, comp in enumerate(comps):
        for v in comp:
            component_of[v] = ci
    return tuple(comps), tuple(component_of)


# Above this node count the dense boolean-matrix reachability switches to a
# CSR frontier walk; n*n bytes of adjacency stop being worth allocating.
_DENSE_LIMIT = 1024


def _reach_all_dense(adj: np.ndarray, reverse: bool) -> bool:
    n = adj.shape[0]
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0])
    covered = 1
    while frontier.size:
        if reverse:
            new = adj[:, frontier].any(axis=1)
        else:
            new = adj[frontier].any(axis=0)
        new &= ~visited
        grown = int(new.sum())
        if grown == 0:
            return False
        visited |= new
        covered += grown
        if covered == n:
            return True
        frontier = np.flatnonzero(new)
    return False


def _csr_unsorted(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return indptr, dst[order]


def _reach_all_csr(n: int, indptr: np.ndarray, targets: np.ndarray) -> bool:
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0])
    covered = 1
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            return False
        offsets = np.repeat(starts - (np.cumsum(counts) - counts), counts)
        succ = targets[offsets + np.arange(total)]
        new = np.zeros(n, dtype=bool)
        new[succ] = True
        new &= ~visited
        grown = int(new.sum())
        if grown == 0:
            return False
        visited |= new
        covered += grown
        if covered == n:
            return True
        frontier = np.flatnonzero(new)
    return False


def is_strongly_connected(digraph: Digraph) -> bool:
    """Whether every ordered node pair is joined by a directed path.

    Checked as forward reachability from node 0 plus reverse reachability
    from node 0, each required to cover all nodes; this is equivalent to
    having a single SCC and avoids the full SCC pass on the Monte Carlo
    hot path.  A single-node digraph counts as strongly connected.
    """
    n = digraph.n_nodes
    if n <= 1:
        return n == 1
    m = digraph.n_edges
    if m < n:  # strong connectivity needs at least one cycle through all nodes
        return False
    src, dst = digraph._src, digraph._dst
    if n <= _DENSE_LIMIT:
        adj = np.zeros((n, n), dtype=bool)
        adj[src, dst] = True
        return _reach_all_dense(adj, reverse=False) and _reach_all_dense(adj, reverse=True)
    indptr, targets = _csr_unsorted(n, src, dst)
    if not _reach_all_csr(n, indptr, targets):
        return False
    rev_indptr, rev_targets = _csr_unsorted(n, dst, src)
    return _reach_all_csr(n, rev_indptr, rev_targets)


def reachable_from(digraph: Digraph, sources: Iterable[int]) -> set[int]:
    """All nodes on some directed path starting in ``sources`` (sources included).

    An edge (i, j) is reachable from the set exactly when i is in the
    returned set and (i, j) is an edge; the core computation relies on
    this equivalence.
    """
    adj = digraph.out_adjacency
    todo = [int(s) for s in sources]
    for s in todo:
        if not 0 <= s < digraph.n_nodes:
            raise IndexOutOfRange(f"source {s} outside [0, {digraph.n_nodes})")
    seen = set(todo)
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


# -- partitioning ------------------------------------------------------------


def partition_graph(graph: TransactionGraph, partition: Partition) -> list[GraphChunk]:
    """Split a graph along a user partition into locally reindexed subgraphs.

    Every ring must lie entirely inside one chunk; rings crossing chunks
    cannot arise from a partitioning sampler and raise
    :class:`RingCrossesChunks`.
    """
    if partition.n_users != graph.n_users:
        raise ValueError(
            f"partition covers {partition.n_users} users, graph has {graph.n_users}"
        )
    local_user = [0] * graph.n_users
    for chunk in partition.chunks:
        for li, u in enumerate(chunk):
            local_user[u] = li
    ring_home: list[list[int]] = [[] for _ in range(partition.n_chunks)]
    for r in range(graph.n_rings):
        ms = graph.ring_members(r)
        if not ms:
            raise EmptyRing(r)
        cid = partition.chunk_of(ms[0])
        if any(partition.chunk_of(u) != cid for u in ms[1:]):
            raise RingCrossesChunks(f"ring {r} spans multiple chunks")
        ring_home[cid].append(r)
    out: list[GraphChunk] = []
    for cid, chunk in enumerate(partition.chunks):
        rings = ring_home[cid]
        members = [
            [local_user[u] for u in graph.ring_members(r)] for r in rings
        ]
        sub = TransactionGraph._from_members(len(chunk), members)
        out.append(GraphChunk(graph=sub, users=tuple(chunk), rings=tuple(rings)))
    return out
