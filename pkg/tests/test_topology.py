import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qratio import topology
from qratio.topology import (
    Digraph,
    GraphFormatError,
    NotStronglyConnectedError,
    diameter,
    generate_random_digraph,
    is_strongly_connected,
    load_digraph,
    save_digraph,
)


def ring(n):
    """Directed ring: node i sends to i+1, so edge (i+1 mod n, i)."""
    return Digraph(n, [((i + 1) % n, i) for i in range(n)])


def complete(n):
    return Digraph(n, [(j, i) for j in range(n) for i in range(n) if i != j])


def brute_force_distances(g):
    """Independent BFS over sender-to-receiver steps, per source."""
    n = g.node_count
    dist = [[None] * n for _ in range(n)]
    for src in range(n):
        dist[src][src] = 0
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in g.out_neighbors(u):
                    v = int(v)
                    if dist[src][v] is None:
                        dist[src][v] = d
                        nxt.append(v)
            frontier = nxt
    return dist


def transitive_closure(n, edges):
    """Boolean closure by repeated relaxation; edges are (receiver, sender)."""
    reach = [[False] * n for _ in range(n)]
    for j, i in edges:
        reach[i][j] = True
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(n):
                if not reach[a][b]:
                    if any(reach[a][c] and reach[c][b] for c in range(n)):
                        reach[a][b] = True
                        changed = True
    return reach


class TestGenerate:
    def test_p1_complete_n4(self):
        g = generate_random_digraph(4, 1.0, seed=11)
        assert g.edge_count == 12
        assert g.is_complete()
        assert diameter(g) == 1

    def test_p1_two_nodes_mutual(self):
        g = generate_random_digraph(2, 1.0, seed=3)
        assert g.edge_set() == {(0, 1), (1, 0)}
        assert diameter(g) == 1

    def test_200_nodes_half_density_diameter_two(self):
        # statistical expectation; tolerate one unlucky seed in fifty
        hits = 0
        for seed in range(50):
            g = generate_random_digraph(200, 0.5, seed=seed)
            if g.is_strongly_connected() and g.diameter() == 2:
                hits += 1
        assert hits >= 49

    def test_same_seed_same_edges(self):
        a = generate_random_digraph(40, 0.3, seed=9)
        b = generate_random_digraph(40, 0.3, seed=9)
        assert a == b
        assert a.edge_set() == b.edge_set()

    def test_distinct_seed_usually_differs(self):
        a = generate_random_digraph(40, 0.3, seed=9)
        b = generate_random_digraph(40, 0.3, seed=10)
        assert a != b

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            generate_random_digraph(1, 0.5, seed=0)
        with pytest.raises(ValueError):
            generate_random_digraph(4, 0.0, seed=0)
        with pytest.raises(ValueError):
            generate_random_digraph(4, 1.5, seed=0)


class TestConnectivity:
    def test_directed_three_cycle(self):
        assert is_strongly_connected(ring(3))

    def test_single_edge_pair_is_not(self):
        g = Digraph(2, [(1, 0)])  # node 1 receives from 0, no way back
        assert not is_strongly_connected(g)

    def test_complete_five(self):
        assert is_strongly_connected(complete(5))

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_agrees_with_transitive_closure(self, data):
        n = data.draw(st.integers(min_value=1, max_value=7))
        pairs = [(j, i) for j in range(n) for i in range(n) if i != j]
        edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
        g = Digraph(n, edges)
        reach = transitive_closure(n, edges)
        expected = all(reach[a][b] for a in range(n) for b in range(n) if a != b)
        assert is_strongly_connected(g) == expected


class TestDiameter:
    def test_complete_is_one(self):
        assert diameter(complete(6)) == 1

    def test_ring_four_is_three(self):
        g = ring(4)
        dist = brute_force_distances(g)
        expected = max(dist[a][b] for a in range(4) for b in range(4) if a != b)
        assert expected == 3
        assert diameter(g) == 3

    def test_matches_brute_force_on_random_graphs(self):
        for seed in range(20):
            g = generate_random_digraph(12, 0.3, seed=seed)
            if not g.is_strongly_connected():
                continue
            dist = brute_force_distances(g)
            expected = max(dist[a][b] for a in range(12) for b in range(12) if a != b)
            assert g.diameter() == expected

    def test_diameter_one_iff_complete(self):
        for seed in range(30):
            g = generate_random_digraph(8, 0.7, seed=seed)
            if not g.is_strongly_connected():
                continue
            assert (g.diameter() == 1) == g.is_complete()

    def test_not_strongly_connected_raises(self):
        g = Digraph(2, [(1, 0)])
        with pytest.raises(NotStronglyConnectedError):
            diameter(g)

    def test_cached(self):
        g = ring(5)
        assert g.diameter() == 4
        assert g._diameter == 4
        assert g.diameter() == 4


class TestDigraphBasics:
    def test_rejects_self_edges(self):
        with pytest.raises(ValueError):
            Digraph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Digraph(3, [(0, 3)])

    def test_neighbor_views_consistent_with_edges(self):
        g = Digraph(4, [(1, 0), (2, 0), (0, 2), (3, 1)])
        assert list(g.out_neighbors(0)) == [1, 2]
        assert list(g.in_neighbors(0)) == [2]
        assert g.out_degree(0) == 2
        assert g.in_degree(2) == 1
        assert g.has_edge(1, 0)
        assert not g.has_edge(0, 1)
        assert g.max_out_degree == 2

    def test_duplicate_edges_collapse(self):
        g = Digraph(3, [(1, 0), (1, 0), (2, 1)])
        assert g.edge_count == 2


class TestFileFormat:
    def test_two_node_mutual(self):
        g = load_digraph("n 2\n1 2\n2 1\n")
        assert g.node_count == 2
        assert g.edge_set() == {(0, 1), (1, 0)}

    def test_round_trip_normalizes(self):
        text = "n 3\n2 1\n1 3\n3 2\n"
        g = load_digraph(text)
        saved = save_digraph(g)
        assert load_digraph(saved) == g
        assert saved == "n 3\n1 3\n2 1\n3 2\n"

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_round_trip_arbitrary(self, data):
        n = data.draw(st.integers(min_value=1, max_value=6))
        pairs = [(j, i) for j in range(n) for i in range(n) if i != j]
        edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
        g = Digraph(n, edges)
        assert load_digraph(save_digraph(g)) == g

    def test_self_edge_rejected(self):
        with pytest.raises(GraphFormatError):
            load_digraph("n 2\n1 1\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(GraphFormatError):
            load_digraph("n 2\n1 2 3\n")
        with pytest.raises(GraphFormatError):
            load_digraph("n 2\n1 x\n")

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphFormatError):
            load_digraph("n 2\n1 3\n")

    def test_bad_header_rejected(self):
        with pytest.raises(GraphFormatError):
            load_digraph("nodes 2\n1 2\n")
        with pytest.raises(GraphFormatError):
            load_digraph("")
