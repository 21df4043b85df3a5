import itertools
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expanderkit.exceptions import ResourceError, ValidationError
from expanderkit.graph import (
    boundary,
    build_graph,
    complete,
    complete_bipartite,
    cycle,
    disjoint_union,
    edge_cut,
    is_bipartite,
    path,
    petersen,
    torus,
)
from expanderkit.groups import cayley_graph, enumerate_group, sl_generators
from expanderkit.spectra import (
    cheeger_bounds,
    cheeger_exact,
    cheeger_heuristic,
    expander_constant,
    folner_ratio,
    markov_matrix,
    spectrum,
)

from conftest import regular_suite


def brute_cheeger(g):
    """min |E(A,B)| / min(|A|,|B|) over all bipartitions, as exact fractions."""
    best = None
    V = range(g.n)
    for r in range(1, g.n // 2 + 1):
        for A in itertools.combinations(V, r):
            B = [v for v in V if v not in A]
            val = Fraction(edge_cut(g, A, B), min(len(A), len(B)))
            best = val if best is None else min(best, val)
    return best


def brute_expander(g):
    n = g.n
    best = None
    for r in range(1, n):
        for A in itertools.combinations(range(n), r):
            val = Fraction(n * len(boundary(g, A)), (n - r) * r)
            best = val if best is None else min(best, val)
    return best


def nx_markov_eigs(g):
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(g.n))
    a = nx.to_numpy_array(h, nodelist=range(g.n))
    return np.sort(np.linalg.eigvalsh(a / a.sum(axis=1)[0]))[::-1]


class TestMarkov:
    def test_k2(self):
        assert np.array_equal(markov_matrix(complete(2)), [[0, 1], [1, 0]])

    def test_c4(self):
        m = markov_matrix(cycle(4))
        assert np.allclose(m, [[0, .5, 0, .5], [.5, 0, .5, 0], [0, .5, 0, .5], [.5, 0, .5, 0]])

    def test_petersen_stochastic(self):
        m = markov_matrix(petersen())
        assert m.shape == (10, 10) and np.allclose(m.sum(axis=1), 1) and np.array_equal(m, m.T)

    @pytest.mark.parametrize("g", [path(3), build_graph(1, []), build_graph(2, [])])
    def test_rejects(self, g):
        with pytest.raises(ValidationError):
            markov_matrix(g)

    def test_sparse_matches(self):
        g = torus(4, 5)
        assert np.allclose(markov_matrix(g, sparse=True).toarray(), markov_matrix(g))


class TestSpectrum:
    def test_k4(self):
        r = spectrum(complete(4))
        assert np.allclose(r.eigenvalues, [1, -1 / 3, -1 / 3, -1 / 3])
        assert r.lambda_ == pytest.approx(-1 / 3) and r.gap == pytest.approx(4 / 3)

    def test_c6(self):
        r = spectrum(cycle(6))
        ref = sorted((math.cos(2 * math.pi * j / 6) for j in range(6)), reverse=True)
        assert np.allclose(r.eigenvalues, ref) and r.lambda_ == pytest.approx(0.5)
        assert r.bipartite

    def test_petersen(self):
        r = spectrum(petersen())
        assert np.allclose(r.eigenvalues, [1] + [1 / 3] * 5 + [-2 / 3] * 4)
        assert r.lambda_ == pytest.approx(1 / 3)

    @pytest.mark.parametrize("g", regular_suite(), ids=lambda g: g.name)
    def test_against_independent_solver(self, g):
        r = spectrum(g)
        assert np.allclose(r.eigenvalues, nx_markov_eigs(g), atol=1e-10)
        ev = np.array(r.eigenvalues)
        assert ev.max() == pytest.approx(1) and ev.min() >= -1 - 1e-9
        assert r.multiplicity_of_one == g.n_components == 1
        assert r.bipartite == is_bipartite(g)

    def test_constant_vector(self):
        g = petersen()
        one = np.ones(g.n)
        assert np.linalg.norm(markov_matrix(g) @ one - one) <= 1e-8 * g.n

    def test_disjoint_union(self):
        u = disjoint_union(cycle(4), cycle(4))
        single = spectrum(cycle(4)).eigenvalues
        assert np.allclose(sorted(spectrum(u).eigenvalues), sorted(single * 2))
        assert spectrum(u).multiplicity_of_one == 2

    def test_iterative_path(self):
        g = torus(8, 8)
        dense = spectrum(g)
        it = spectrum(g, dense_max=10)
        assert it.method == "iterative"
        assert it.lambda_ == pytest.approx(dense.lambda_, abs=1e-9)


class TestCheeger:
    @pytest.mark.parametrize("g, h", [(complete(4), 2), (cycle(6), Fraction(2, 3)), (torus(4, 4), 1),
                                      (petersen(), 1), (complete(2), 1)])
    def test_examples(self, g, h):
        r = cheeger_exact(g)
        assert r.fraction == (Fraction(h).numerator, Fraction(h).denominator)
        A, B = r.witness
        assert Fraction(edge_cut(g, A, B), min(len(A), len(B))) == h

    def test_c6_witness_is_arc(self):
        assert cheeger_exact(cycle(6)).witness == ((0, 1, 2), (3, 4, 5))

    @pytest.mark.parametrize("g", [g for g in regular_suite() if g.n <= 12], ids=lambda g: g.name)
    def test_against_brute_force(self, g):
        assert Fraction(*cheeger_exact(g).fraction) == brute_cheeger(g)

    def test_cap(self):
        with pytest.raises(ResourceError, match="heuristic"):
            cheeger_exact(cycle(25))

    @pytest.mark.parametrize("g", regular_suite(), ids=lambda g: g.name)
    def test_inequalities_and_heuristic(self, g):
        h = cheeger_exact(g).h
        mu = spectrum(g).gap
        d = int(g.degrees[0])
        assert d * mu / 2 <= h + 1e-9
        assert h <= d * math.sqrt(2 * mu) + 1e-9
        assert cheeger_heuristic(g).h >= h - 1e-12

    def test_heuristic_witness_recount(self):
        grp = enumerate_group(sl_generators(2, 5))
        g, _ = cayley_graph(grp)
        r = cheeger_heuristic(g)
        A, B = r.witness
        assert r.method == "heuristic-upper-bound"
        assert 0 < r.h == pytest.approx(edge_cut(g, A, B) / min(len(A), len(B)))
        lo, hi = cheeger_bounds(g)
        assert lo <= hi == r.h

    def test_k2_heuristic(self):
        r = cheeger_heuristic(complete(2))
        assert r.h == 1 and r.witness == ((0,), (1,))


class TestExpanderConstant:
    @pytest.mark.parametrize("n", range(2, 8))
    def test_complete(self, n):
        assert Fraction(*expander_constant(complete(n)).fraction) == Fraction(n, n - 1)

    @pytest.mark.parametrize("g", [cycle(6), petersen(), path(4), complete_bipartite(2, 3)], ids=lambda g: g.name)
    def test_brute_force_and_witness(self, g):
        r = expander_constant(g)
        assert Fraction(*r.fraction) == brute_expander(g)
        A = r.witness
        assert len(boundary(g, A)) == pytest.approx(r.c * (1 - len(A) / g.n) * len(A), abs=1e-12)

    def test_cycle6_value(self):
        assert expander_constant(cycle(6)).c == pytest.approx(6 / 5)

    @given(st.integers(3, 9), st.integers(0, 8))
    def test_single_vertex_bound(self, n, v):
        g = cycle(n)
        v = v % n
        single = len(g.adjacency[v]) / (1 - 1 / n)
        assert expander_constant(g).c <= single + 1e-12


class TestFolner:
    def test_c6(self):
        r = folner_ratio(cycle(6), 3)
        assert r.ratio == pytest.approx(2 / 3) and r.witness == (0, 1, 2) and r.mode == "exact"

    def test_k4(self):
        assert folner_ratio(complete(4), 2).ratio == 1

    @pytest.mark.parametrize("g, s", [(cycle(10), 5), (petersen(), 5), (torus(3, 3), 4)])
    def test_exact_vs_brute(self, g, s):
        best = min(Fraction(len(boundary(g, F)), len(F))
                   for r in range(1, s + 1) for F in itertools.combinations(range(g.n), r))
        assert folner_ratio(g, s, mode="exact").ratio == pytest.approx(float(best))

    @pytest.mark.parametrize("g, s", [(cycle(10), 5), (petersen(), 5), (torus(4, 4), 8)])
    def test_greedy_upper_bounds_exact(self, g, s):
        exact = folner_ratio(g, s, mode="exact")
        greedy = folner_ratio(g, s, mode="greedy")
        assert greedy.ratio >= exact.ratio - 1e-12
        assert len(boundary(g, greedy.witness)) / len(greedy.witness) == pytest.approx(greedy.ratio)

    def test_torus_vs_cayley(self):
        tor = folner_ratio(torus(8, 8), 32, mode="greedy")
        g, _ = cayley_graph(enumerate_group(sl_generators(2, 7)))
        cay = folner_ratio(g, 32, mode="greedy")
        assert tor.ratio / 4 < cay.ratio / 4

    def test_bad_size(self):
        with pytest.raises(ValidationError):
            folner_ratio(cycle(6), 4)
        with pytest.raises(ResourceError):
            folner_ratio(cycle(30), 15, mode="exact")
