"""Shared graph generators and independent oracles for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from ringlab.graph import Digraph, Matching, TransactionGraph


def make_graph(n_users, n_rings, edges, **kw):
    return TransactionGraph(n_users, n_rings, edges, **kw)


@pytest.fixture
def toy_graph():
    """Three users, three rings; ring 2 contains everyone, rings 0/1 only
    their signers.  The unique maximum matching pins down every signer."""
    return make_graph(3, 3, [(0, 0), (1, 1), (2, 2), (0, 2), (1, 2)])


def random_valid_graph(
    gen: np.random.Generator,
    max_users: int = 7,
    *,
    balanced: bool = False,
    min_users: int = 1,
    extra_edge_prob: float = 0.35,
) -> TransactionGraph:
    """Random transaction graph, valid by construction.

    A random injection of rings into users is embedded first, so a
    covering matching always exists; extra edges are sprinkled on top.
    """
    n = int(gen.integers(min_users, max_users + 1))
    m = n if balanced else int(gen.integers(0, n + 1))
    signers = gen.permutation(n)[:m]
    edges = {(int(signers[j]), j) for j in range(m)}
    for u in range(n):
        for r in range(m):
            if (u, r) not in edges and gen.random() < extra_edge_prob:
                edges.add((u, r))
    cert = Matching((int(signers[j]), j) for j in range(m))
    return TransactionGraph(n, m, edges, matching=cert)


def weakly_connected(graph: TransactionGraph) -> bool:
    """Whether the bipartite graph is connected ignoring edge direction."""
    total = graph.n_users + graph.n_rings
    if total <= 1:
        return True
    if graph.edge_count == 0:
        return False
    seen_users: set[int] = set()
    seen_rings: set[int] = set()
    first_ring = next(
        r for r in range(graph.n_rings) if graph.ring_members(r)
    )
    stack = [("r", first_ring)]
    seen_rings.add(first_ring)
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            for u in graph.ring_members(idx):
                if u not in seen_users:
                    seen_users.add(u)
                    stack.append(("u", u))
        else:
            for r in graph.rings_of_user(idx):
                if r not in seen_rings:
                    seen_rings.add(r)
                    stack.append(("r", r))
    return len(seen_users) == graph.n_users and len(seen_rings) == graph.n_rings


def random_connected_balanced_graph(
    gen: np.random.Generator, max_users: int = 7, min_users: int = 2
) -> TransactionGraph:
    while True:
        g = random_valid_graph(gen, max_users, balanced=True, min_users=min_users)
        if weakly_connected(g):
            return g


def sc_bruteforce(digraph: Digraph) -> bool:
    """Independent strong-connectivity oracle: Floyd-Warshall closure."""
    n = digraph.n_nodes
    if n == 0:
        return False
    reach = [[i == j for j in range(n)] for i in range(n)]
    for i, j in digraph.edges():
        reach[i][j] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return all(all(row) for row in reach)


def permanent(matrix: list[list[int]]) -> int:
    """Permanent by expansion over the first row; fine for n <= 8."""
    size = len(matrix)
    if size == 0:
        return 1
    cols = list(range(size))

    def rec(r: int, used: int) -> int:
        if r == size:
            return 1
        total = 0
        for c in cols:
            if matrix[r][c] and not used >> c & 1:
                total += rec(r + 1, used | 1 << c)
        return total

    return rec(0, 0)
