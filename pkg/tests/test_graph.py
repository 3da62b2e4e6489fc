"""Graph types and operations against small oracles and stated invariants."""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringlab.errors import (
    EmptyRing,
    IndexOutOfRange,
    MatchingNotMaximum,
    NotATransactionGraph,
    RingCrossesChunks,
)
from ringlab.graph import (
    Digraph,
    Matching,
    Partition,
    TransactionGraph,
    _kuhn,
    induced_digraph,
    is_strongly_connected,
    maximum_matching,
    partition_graph,
    reachable_from,
    scc,
    upper_graph,
    validate,
)

from conftest import make_graph, random_valid_graph, sc_bruteforce


# -- construction and validation ------------------------------------------------


def test_validate_toy(toy_graph):
    assert validate(toy_graph) is toy_graph
    assert maximum_matching(toy_graph).size == 3


def test_validate_zero_rings():
    g = make_graph(3, 0, [])
    assert validate(g) is g


def test_validate_rejects_unmatchable():
    g = make_graph(2, 2, [(0, 0), (0, 1)])
    with pytest.raises(NotATransactionGraph):
        validate(g)


def test_validate_rejects_empty_ring():
    g = make_graph(3, 2, [(0, 0), (1, 0)])
    with pytest.raises(EmptyRing) as exc:
        validate(g)
    assert "EmptyRing at ring 1" in str(exc.value)


def test_more_rings_than_users_rejected():
    with pytest.raises(NotATransactionGraph):
        make_graph(2, 3, [(0, 0), (1, 1), (0, 2)])


def test_bad_indices_rejected():
    with pytest.raises(IndexOutOfRange):
        make_graph(2, 2, [(2, 0), (0, 1)])
    with pytest.raises(IndexOutOfRange):
        make_graph(2, 2, [(0, 0), (0, 2)])


def test_duplicate_edge_rejected():
    with pytest.raises(ValueError):
        make_graph(2, 2, [(0, 0), (0, 0), (1, 1)])


def test_certificate_must_cover_and_be_edges():
    edges = [(0, 0), (1, 1)]
    make_graph(2, 2, edges, matching=Matching([(0, 0), (1, 1)]))
    with pytest.raises(NotATransactionGraph):
        make_graph(2, 2, edges, matching=Matching([(0, 0)]))
    with pytest.raises(ValueError):
        make_graph(2, 2, edges, matching=Matching([(1, 0), (0, 1)]))


def test_matching_rejects_reuse():
    with pytest.raises(ValueError):
        Matching([(0, 0), (0, 1)])
    with pytest.raises(ValueError):
        Matching([(0, 0), (1, 0)])


# -- maximum matching ------------------------------------------------------------


def test_matching_toy_unique(toy_graph):
    assert maximum_matching(toy_graph).pairs == ((0, 0), (1, 1), (2, 2))


def test_matching_complete_bipartite():
    g = make_graph(3, 3, [(u, r) for u in range(3) for r in range(3)])
    assert maximum_matching(g).size == 3


def _bruteforce_max_matching_size(graph):
    best = 0
    users = range(graph.n_users)
    for m_size in range(min(graph.n_users, graph.n_rings), -1, -1):
        for rings in itertools.combinations(range(graph.n_rings), m_size):
            for perm in itertools.permutations(users, m_size):
                if all(graph.has_edge(u, r) for u, r in zip(perm, rings)):
                    return m_size
    return best


def test_matching_size_matches_bruteforce_on_random_graphs():
    gen = np.random.default_rng(42)
    for _ in range(60):
        n = int(gen.integers(1, 7))
        m = int(gen.integers(0, min(n, 5) + 1))
        edges = {
            (u, r)
            for u in range(n)
            for r in range(m)
            if gen.random() < 0.4
        }
        for r in range(m):  # no empty rings
            if not any(u for u, rr in edges if rr == r) and not any(
                (u, r) in edges for u in range(n)
            ):
                edges.add((int(gen.integers(0, n)), r))
        g = make_graph(n, m, edges)
        assert maximum_matching(g).size == _bruteforce_max_matching_size(g)


def test_matching_deterministic(toy_graph):
    gen = np.random.default_rng(7)
    for _ in range(30):
        g = random_valid_graph(gen)
        assert maximum_matching(g) == maximum_matching(g)
        alt = _kuhn(g, rings_desc=True, users_desc=True)
        assert alt.size == maximum_matching(g).size


def test_matching_pairs_are_edges():
    gen = np.random.default_rng(11)
    for _ in range(50):
        g = random_valid_graph(gen)
        m = maximum_matching(g)
        assert m.size == g.n_rings
        assert all(g.has_edge(u, r) for u, r in m)


# -- upper graph -----------------------------------------------------------------


def test_upper_graph_balanced_is_identity_shape(toy_graph):
    m = maximum_matching(toy_graph)
    up = upper_graph(toy_graph, m)
    assert up == toy_graph  # toy graph is balanced and already canonically labelled


def test_upper_graph_drops_unmatched_users():
    g = make_graph(3, 2, [(0, 0), (1, 1), (2, 0)])
    m = maximum_matching(g)
    assert m.pairs == ((0, 0), (1, 1))
    up = upper_graph(g, m)
    assert up.n_users == up.n_rings == 2
    assert up.edges == {(0, 0), (1, 1)}


def test_upper_graph_validates_and_is_balanced():
    gen = np.random.default_rng(13)
    for _ in range(40):
        g = random_valid_graph(gen)
        up = upper_graph(g, maximum_matching(g))
        assert up.is_balanced
        validate(up)


def test_upper_graph_rejects_partial_matching():
    g = make_graph(3, 2, [(0, 0), (1, 1), (2, 0)])
    with pytest.raises(MatchingNotMaximum):
        upper_graph(g, Matching([(0, 0)]))


# -- induced digraph ---------------------------------------------------------------


def test_induced_digraph_toy(toy_graph):
    d = induced_digraph(toy_graph, maximum_matching(toy_graph))
    assert d.n_nodes == 3
    assert d.edges() == [(0, 2), (1, 2)]


def test_induced_digraph_matching_only_graph():
    g = make_graph(4, 4, [(j, j) for j in range(4)])
    d = induced_digraph(g, maximum_matching(g))
    assert d.n_edges == 0


def test_induced_digraph_targets_are_rings():
    gen = np.random.default_rng(17)
    for _ in range(40):
        g = random_valid_graph(gen)
        d = induced_digraph(g, maximum_matching(g))
        assert d.n_nodes == g.n_users
        assert all(j < g.n_rings for _, j in d.edges())
        assert all(i != j for i, j in d.edges())


def test_induced_digraph_relabels_unmatched_ascending():
    # users 1 and 3 sign; users 0 and 2 are unmatched decoys
    g = make_graph(4, 2, [(1, 0), (3, 1), (0, 0), (2, 1)])
    m = Matching([(1, 0), (3, 1)])
    d = induced_digraph(g, m)
    # user 0 -> node 2, user 2 -> node 3 (ascending beyond the matched block)
    assert sorted(d.edges()) == [(2, 0), (3, 1)]


# -- scc / reachability -------------------------------------------------------------


def test_scc_cycle():
    d = Digraph(3, [(0, 1), (1, 2), (2, 0)])
    comps, comp_of = scc(d)
    assert comps == ((0, 1, 2),)
    assert comp_of == (0, 0, 0)


def test_scc_edgeless():
    d = Digraph(4)
    comps, comp_of = scc(d)
    assert comps == ((0,), (1,), (2,), (3,))
    assert comp_of == (0, 1, 2, 3)


def test_scc_toy_induced(toy_graph):
    d = induced_digraph(toy_graph, maximum_matching(toy_graph))
    comps, _ = scc(d)
    assert comps == ((0,), (1,), (2,))


def test_scc_two_cycles_bridge():
    d = Digraph(5, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2), (3, 4)])
    comps, comp_of = scc(d)
    assert comps == ((0, 1), (2, 3), (4,))
    assert comp_of[0] == comp_of[1]
    assert comp_of[2] == comp_of[3]
    assert comp_of[4] == 2


def _random_digraph(gen, max_nodes=8, p=0.3) -> Digraph:
    n = int(gen.integers(1, max_nodes + 1))
    edges = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and gen.random() < p
    ]
    return Digraph(n, edges)


def test_scc_partitions_nodes_and_matches_mutual_reachability():
    gen = np.random.default_rng(23)
    for _ in range(60):
        d = _random_digraph(gen)
        comps, comp_of = scc(d)
        all_nodes = sorted(v for comp in comps for v in comp)
        assert all_nodes == list(range(d.n_nodes))
        for i in range(d.n_nodes):
            fwd = reachable_from(d, {i})
            for j in range(d.n_nodes):
                mutual = j in fwd and i in reachable_from(d, {j})
                assert (comp_of[i] == comp_of[j]) == (mutual or i == j)


def test_is_strongly_connected_cases():
    assert is_strongly_connected(Digraph(1))
    assert not is_strongly_connected(Digraph(3, [(0, 1), (1, 2)]))
    n = 6
    cycle = Digraph(n, [(i, (i + 1) % n) for i in range(n)])
    assert is_strongly_connected(cycle)


def test_is_strongly_connected_equals_single_scc():
    gen = np.random.default_rng(29)
    for _ in range(200):
        d = _random_digraph(gen)
        by_scc = len(scc(d)[0]) == 1
        assert is_strongly_connected(d) == by_scc == sc_bruteforce(d)


def test_sparse_and_dense_reachability_agree(monkeypatch):
    import ringlab.graph as graph_mod

    gen = np.random.default_rng(31)
    digraphs = [_random_digraph(gen, max_nodes=12) for _ in range(80)]
    dense = [is_strongly_connected(d) for d in digraphs]
    monkeypatch.setattr(graph_mod, "_DENSE_LIMIT", 0)
    sparse = [is_strongly_connected(d) for d in digraphs]
    assert dense == sparse


@given(st.data())
@settings(max_examples=100, deadline=None)
def test_reachable_from_monotone_idempotent(data):
    n = data.draw(st.integers(1, 7))
    edges = data.draw(
        st.sets(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(
                lambda e: e[0] != e[1]
            ),
            max_size=n * (n - 1),
        )
    )
    d = Digraph(n, edges)
    small = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    extra = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    big = small | extra
    r_small = reachable_from(d, small)
    r_big = reachable_from(d, big)
    assert r_small <= r_big  # monotone
    assert reachable_from(d, r_small) == r_small  # idempotent
    assert small <= r_small


def test_reachable_from_examples():
    d = Digraph(3, [(0, 1), (1, 2)])
    assert reachable_from(d, {0}) == {0, 1, 2}
    assert reachable_from(d, range(3)) == {0, 1, 2}
    assert reachable_from(d, set()) == set()


def test_digraph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Digraph(3, [(0, 0)])
    with pytest.raises(ValueError):
        Digraph(3, [(0, 1), (0, 1)])
    with pytest.raises(IndexOutOfRange):
        Digraph(3, [(0, 3)])


# -- partitions ---------------------------------------------------------------------


def test_partition_validation():
    p = Partition([[0, 1], [2, 3]])
    assert p.n_users == 4
    assert p.chunk_of(2) == 1
    with pytest.raises(ValueError):
        Partition([[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        Partition([[0], []])
    with pytest.raises(IndexOutOfRange):
        Partition([[0, 5]])


def test_partition_equal_chunks():
    p = Partition.equal_chunks(8, 4)
    assert p.chunk_sizes() == (4, 4)
    with pytest.raises(ValueError):
        Partition.equal_chunks(9, 4)


def test_partition_graph_single_chunk_is_graph(toy_graph):
    chunks = partition_graph(toy_graph, Partition.single(3))
    assert len(chunks) == 1
    assert chunks[0].graph == toy_graph
    assert chunks[0].users == (0, 1, 2)
    assert chunks[0].rings == (0, 1, 2)


def test_partition_graph_two_bicliques():
    edges = [(u, r) for u in range(2) for r in range(2)]
    edges += [(u + 2, r + 2) for u in range(2) for r in range(2)]
    g = make_graph(4, 4, edges)
    chunks = partition_graph(g, Partition([[0, 1], [2, 3]]))
    assert len(chunks) == 2
    for chunk in chunks:
        assert chunk.graph.edge_count == 4
        assert chunk.graph.is_balanced
        validate(chunk.graph)


def test_partition_graph_rejects_crossing_ring():
    g = make_graph(4, 2, [(0, 0), (2, 0), (1, 1)])
    with pytest.raises(RingCrossesChunks):
        partition_graph(g, Partition([[0, 1], [2, 3]]))


def _random_partitioned_graph(gen, n_chunks=2, chunk_max=4):
    sizes = [int(gen.integers(1, chunk_max + 1)) for _ in range(n_chunks)]
    offset = 0
    chunks = []
    all_edges = []
    total_rings = 0
    for size in sizes:
        sub = random_valid_graph(gen, size, min_users=size)
        for r in range(sub.n_rings):
            for u in sub.ring_members(r):
                all_edges.append((u + offset, r + total_rings))
        chunks.append(list(range(offset, offset + size)))
        offset += size
        total_rings += sub.n_rings
    g = TransactionGraph(offset, total_rings, all_edges)
    return g, Partition(chunks)


def test_partition_graph_edges_partition_and_matchings_concatenate():
    gen = np.random.default_rng(37)
    for _ in range(40):
        g, p = _random_partitioned_graph(gen)
        chunks = partition_graph(g, p)
        recovered = set()
        matching_pairs = []
        for chunk in chunks:
            for lu, lr in chunk.graph.edges:
                edge = (chunk.users[lu], chunk.rings[lr])
                assert edge not in recovered  # disjoint
                recovered.add(edge)
            for lu, lr in maximum_matching(chunk.graph):
                matching_pairs.append((chunk.users[lu], chunk.rings[lr]))
        assert recovered == g.edges  # union is E
        glued = Matching(matching_pairs)
        assert glued.size == g.n_rings
        assert all(g.has_edge(u, r) for u, r in glued)
