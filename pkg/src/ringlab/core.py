"""Core of a transaction graph: the union of all its maximum matchings.

Edges outside the core belong to no maximum matching, so they are
impossible signer assignments and can be discarded by an analyst.  The
core is computed in near-linear time from a single maximum matching M:
an edge (u_i, r_j) survives exactly when it is in M, or its induced
digraph edge (i, j) lies within a strongly connected component, or (i, j)
is reachable from the unmatched user nodes.  An exponential
matching-enumeration oracle is kept alongside for verification only.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InstanceTooLarge, NotATransactionGraph
from .graph import (
    Matching,
    TransactionGraph,
    _user_relabel,
    induced_digraph,
    maximum_matching,
    reachable_from,
    scc,
)

__all__ = [
    "CoreReport",
    "core",
    "is_core_equal",
    "core_report",
    "core_bruteforce_oracle",
    "enumerate_maximum_matchings",
    "BRUTE_FORCE_USER_CAP",
]

# Default ceiling for the exhaustive enumeration paths.
BRUTE_FORCE_USER_CAP = 10


def core(graph: TransactionGraph, *, matching: Matching | None = None) -> TransactionGraph:
    """Subgraph of edges that occur in at least one maximum matching.

    ``matching`` may supply a known size-``n_rings`` maximum matching
    (e.g. the signer assignment of a freshly sampled graph) to skip the
    matching computation; the result does not depend on which maximum
    matching is used.
    """
    if matching is None:
        matching = maximum_matching(graph)
        if matching.size != graph.n_rings:
            raise NotATransactionGraph(
                f"maximum matching has size {matching.size} < {graph.n_rings} rings"
            )
    flags = _core_member_flags(graph, matching)
    members = [
        [u for u, keep in zip(graph.ring_members(r), flags[r]) if keep]
        for r in range(graph.n_rings)
    ]
    return TransactionGraph._from_members(graph.n_users, members, matching=matching)


def _core_member_flags(
    graph: TransactionGraph, matching: Matching
) -> list[list[bool]]:
    """Per ring, which members' edges survive in the core."""
    n, m = graph.n_users, graph.n_rings
    relabel = _user_relabel(graph, matching)
    digraph = induced_digraph(graph, matching)
    _, comp_of = scc(digraph)
    from_unmatched = reachable_from(digraph, range(m, n))
    flags: list[list[bool]] = []
    for r in range(m):
        row = []
        for u in graph.ring_members(r):
            i = relabel[u]
            row.append(i == r or comp_of[i] == comp_of[r] or i in from_unmatched)
        flags.append(row)
    return flags


def is_core_equal(graph: TransactionGraph) -> bool:
    """True when no edge of the graph can be ruled out, i.e. core(G) == G."""
    return core(graph).edge_count == graph.edge_count


@dataclass(frozen=True)
class CoreReport:
    """Attack-oriented summary of a core computation.

    ``deanonymised_rings`` lists rings whose core degree is 1 together
    with their only possible signer.
    """

    core_edges: frozenset[tuple[int, int]]
    removed_edges: frozenset[tuple[int, int]]
    deanonymised_rings: tuple[tuple[int, int], ...]
    per_ring_core_degree: tuple[int, ...]


def core_report(graph: TransactionGraph) -> CoreReport:
    c = core(graph)
    core_edges = c.edges
    removed = graph.edges - core_edges
    degrees = c.ring_sizes()
    deanon = tuple(
        (r, c.ring_members(r)[0]) for r in range(c.n_rings) if degrees[r] == 1
    )
    return CoreReport(
        core_edges=core_edges,
        removed_edges=removed,
        deanonymised_rings=deanon,
        per_ring_core_degree=degrees,
    )


def enumerate_maximum_matchings(
    graph: TransactionGraph, *, max_users: int = BRUTE_FORCE_USER_CAP
) -> list[Matching]:
    """All maximum matchings, by exhaustive backtracking over rings.

    Exponential; guarded by ``max_users``.  The graph must admit a
    matching covering every ring, so each maximum matching assigns every
    ring exactly one user and the enumeration can proceed ring by ring.
    """
    if graph.n_users > max_users:
        raise InstanceTooLarge(
            f"{graph.n_users} users exceeds the brute-force cap of {max_users}"
        )
    m = graph.n_rings
    probe = maximum_matching(graph)
    if probe.size != m:
        raise NotATransactionGraph(
            f"maximum matching has size {probe.size} < {m} rings"
        )
    results: list[Matching] = []
    used = [False] * graph.n_users
    chosen: list[int] = []

    def backtrack(ring: int) -> None:
        if ring == m:
            results.append(Matching((u, r) for r, u in enumerate(chosen)))
            return
        for u in graph.ring_members(ring):
            if not used[u]:
                used[u] = True
                chosen.append(u)
                backtrack(ring + 1)
                chosen.pop()
                used[u] = False

    backtrack(0)
    return results


def core_bruteforce_oracle(
    graph: TransactionGraph, *, max_users: int = BRUTE_FORCE_USER_CAP
) -> TransactionGraph:
    """Reference core: the literal union of all enumerated maximum matchings."""
    edges: set[tuple[int, int]] = set()
    for matching in enumerate_maximum_matchings(graph, max_users=max_users):
        edges.update(matching.pairs)
    return TransactionGraph(graph.n_users, graph.n_rings, edges)
