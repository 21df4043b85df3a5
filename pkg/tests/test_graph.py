import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expanderkit.exceptions import ValidationError
from expanderkit.graph import (
    ball,
    bfs_metric,
    boundary,
    build_graph,
    complete,
    complete_bipartite,
    cycle,
    degree_profile,
    disjoint_union,
    edge_cut,
    generate,
    induced_subgraph,
    is_bipartite,
    parse_edge_list,
    path,
    petersen,
    to_dot,
    to_edge_list,
    torus,
    tree_ball,
)


@st.composite
def graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))) if pairs else []
    return build_graph(n, chosen)


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


class TestBuild:
    def test_triangle(self):
        g = build_graph(3, [(0, 1), (1, 2), (0, 2)])
        assert g.m == 3
        assert degree_profile(g) == (True, 2, [2, 2, 2])

    def test_loop_rejected(self):
        with pytest.raises(ValidationError, match="loop"):
            build_graph(2, [(0, 0)])

    @pytest.mark.parametrize("edge", [(0, 4), (-1, 2), (3, 7)])
    def test_out_of_range(self, edge):
        with pytest.raises(ValidationError):
            build_graph(4, [edge])

    def test_dedup(self):
        g = build_graph(4, [(0, 1), (0, 1), (2, 3), (1, 0)])
        assert g.m == 2
        assert list(g.edges) == [(0, 1), (2, 3)]

    @given(graphs())
    def test_invariants(self, g):
        assert 2 * g.m == int(g.degrees.sum())
        for u in range(g.n):
            nb = list(g.adjacency[u])
            assert nb == sorted(nb)
            assert u not in nb
            for v in nb:
                assert g.has_edge(u, v) and u in g.adjacency[v]


class TestProfiles:
    @pytest.mark.parametrize(
        "g, expected",
        [
            (complete(4), (True, 3, [3, 3, 3, 3])),
            (path(3), (False, None, [1, 1, 2])),
            (petersen(), (True, 3, [3] * 10)),
        ],
    )
    def test_degree_profile(self, g, expected):
        assert degree_profile(g) == expected

    def test_petersen_matches_networkx(self):
        assert nx.is_isomorphic(to_nx(petersen()), nx.petersen_graph())


class TestBoundaryAndCut:
    def test_cycle_boundary(self):
        assert boundary(cycle(6), [0]) == (1, 5)
        assert boundary(cycle(6), range(6)) == ()
        assert boundary(cycle(6), []) == ()

    def test_torus_row(self):
        g = torus(4, 4)
        row = [0, 1, 2, 3]
        assert boundary(g, row) == tuple(sorted([4, 5, 6, 7, 12, 13, 14, 15]))

    @pytest.mark.parametrize(
        "g, A, B, expected",
        [
            (cycle(6), [0, 1, 2], [3, 4, 5], 2),
            (complete(4), [0, 1], [2, 3], 4),
            (complete_bipartite(2, 3), [0, 1], [2, 3, 4], 6),
        ],
    )
    def test_edge_cut(self, g, A, B, expected):
        assert edge_cut(g, A, B) == expected

    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            edge_cut(cycle(4), [0, 1], [1, 2])

    @given(graphs(), st.data())
    def test_cut_vs_boundary(self, g, data):
        A = data.draw(st.sets(st.integers(0, g.n - 1)))
        rest = [v for v in range(g.n) if v not in A]
        bd = boundary(g, A)
        cut = edge_cut(g, A, rest)
        dmax = int(g.degrees.max()) if g.n else 0
        assert len(bd) <= cut <= dmax * len(bd)
        assert not set(bd) & set(A)
        # oracle: networkx node boundary
        assert set(bd) == set(nx.node_boundary(to_nx(g), A)) if A else bd == ()


class TestMetric:
    def test_examples(self):
        assert bfs_metric(cycle(6))[0, 3] == 3
        d = bfs_metric(complete(5))
        assert np.all(d[~np.eye(5, dtype=bool)] == 1)
        assert bfs_metric(petersen()).max() == 2

    def test_disconnected_infinite(self):
        g = disjoint_union(cycle(3), cycle(3))
        d = bfs_metric(g)
        assert np.isinf(d[0, 3]) and d[0, 1] == 1

    @given(graphs())
    def test_matches_networkx_and_is_metric(self, g):
        d = bfs_metric(g)
        ref = dict(nx.all_pairs_shortest_path_length(to_nx(g)))
        for u in range(g.n):
            for v in range(g.n):
                assert d[u, v] == ref[u].get(v, np.inf)
        assert np.array_equal(d, d.T) and np.all(np.diag(d) == 0)
        off = ~np.eye(g.n, dtype=bool)
        assert np.all(d[off] > 0)
        # triangle inequality
        assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :])

    def test_read_only(self):
        with pytest.raises(ValueError):
            cycle(4).distances[0, 1] = 7


class TestGenerators:
    @pytest.mark.parametrize("n", range(3, 11))
    def test_cycle_and_complete_counts(self, n):
        assert cycle(n).m == n
        assert complete(n).m == n * (n - 1) // 2

    def test_kpq(self):
        g = complete_bipartite(2, 3)
        assert g.m == 6 and degree_profile(g)[2] == [2, 2, 2, 3, 3]

    @pytest.mark.parametrize("k, r, n", [(3, 2, 10), (3, 1, 4), (4, 2, 17), (2, 3, 7)])
    def test_tree_ball(self, k, r, n):
        g = tree_ball(k, r)
        assert g.n == n and g.m == n - 1 and g.is_connected

    @pytest.mark.parametrize("a, b", [(3, 3), (4, 5), (8, 8)])
    def test_torus_is_product(self, a, b):
        g = torus(a, b)
        ref = nx.cartesian_product(nx.cycle_graph(a), nx.cycle_graph(b))
        assert degree_profile(g)[:2] == (True, 4)
        assert nx.is_isomorphic(to_nx(g), ref)

    @pytest.mark.parametrize("a, b", [(2, 3), (3, 1)])
    def test_torus_small_side(self, a, b):
        with pytest.raises(ValidationError):
            torus(a, b)

    def test_generate_dispatch(self):
        assert generate("cycle", 5).m == 5
        assert generate("tree-ball", 3, 2).n == 10
        with pytest.raises(ValidationError):
            generate("hypercube", 3)
        with pytest.raises(ValidationError):
            generate("cycle")


class TestHelpers:
    def test_ball_and_induced(self):
        g = cycle(10)
        assert ball(g, 0, 2) == (0, 1, 2, 8, 9)
        sub, labels = induced_subgraph(g, [0, 1, 2])
        assert sub.m == 2 and labels == (0, 1, 2)

    @pytest.mark.parametrize("g, expected", [(cycle(6), True), (cycle(5), False), (petersen(), False),
                                             (complete_bipartite(2, 3), True)])
    def test_bipartite(self, g, expected):
        assert is_bipartite(g) is expected


class TestEdgeListIO:
    @given(graphs())
    def test_round_trip(self, g):
        text = to_edge_list(g)
        h = parse_edge_list(text)
        assert h == g and to_edge_list(h) == text

    def test_comments_and_errors(self):
        g = parse_edge_list("# c6\n3 2\n0 1\n# mid\n1 2\n")
        assert g.m == 2
        with pytest.raises(ValidationError, match="declares"):
            parse_edge_list("3 3\n0 1\n")
        with pytest.raises(ValidationError):
            parse_edge_list("3 1\n2 1\n")
        with pytest.raises(ValidationError):
            parse_edge_list("")

    def test_dot(self):
        out = to_dot(build_graph(3, [(0, 1)]))
        assert out.startswith("graph G {") and "0 -- 1;" in out and "  2;" in out
