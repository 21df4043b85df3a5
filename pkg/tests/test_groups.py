import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expanderkit.exceptions import ResourceError, ValidationError
from expanderkit.graph import cycle, degree_profile
from expanderkit.groups import (
    ModMatrix,
    action_from_permutations,
    cayley_graph,
    cyclic_group,
    enumerate_group,
    is_automorphism,
    kazhdan_structure,
    left_translation_action,
    orbits_and_stabilizers,
    parse_group_spec,
    reduction_hom,
    sl_generators,
    sl_order,
)


pytestmark = pytest.mark.filterwarnings("ignore:duplicate generator")


def brute_sl_count(dim, n):
    """Count dim x dim matrices over Z/n with determinant 1 by listing them all."""
    count = 0
    for entries in itertools.product(range(n), repeat=dim * dim):
        a = np.array(entries).reshape(dim, dim)
        if round(np.linalg.det(a)) % n == 1:
            count += 1
    return count


def quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args, **kw)


class TestModMatrix:
    def test_inverse_and_det(self):
        a = ModMatrix.from_array([[2, 1], [1, 1]], 7)
        assert a.det() == 1
        assert (a @ a.inverse()).is_identity

    def test_not_invertible(self):
        with pytest.raises(ValidationError):
            ModMatrix.from_array([[2, 0], [0, 2]], 4).inverse()

    def test_reduce_and_label(self):
        a = ModMatrix.from_array([[1, 8], [0, 1]], 9)
        assert a.reduce(3) == ModMatrix.from_array([[1, 2], [0, 1]], 3)
        assert a.label() == "[1,8,0,1]"


class TestGenerators:
    def test_sl2_3(self):
        gens = sl_generators(2, 3)
        assert len(gens) == 4
        assert all(g.det() == 1 for g in gens)

    def test_sl2_2_collapses(self):
        with pytest.warns(UserWarning, match="duplicate"):
            gens = sl_generators(2, 2)
        assert len(gens) == 2

    def test_sl3_2_self_inverse(self):
        gens = quiet(sl_generators, 3, 2)
        assert len(gens) == 3
        assert all((g @ g).is_identity for g in gens)

    def test_unsupported_dim(self):
        with pytest.raises(ValidationError):
            sl_generators(4, 3)


class TestEnumeration:
    @pytest.mark.parametrize("dim, n, order", [(2, 3, 24), (2, 9, 648), (3, 2, 168), (2, 4, 48), (2, 5, 120),
                                               (2, 7, 336)])
    def test_orders(self, dim, n, order):
        grp = quiet(enumerate_group, sl_generators(dim, n))
        assert grp.order == order == sl_order(dim, n)

    @pytest.mark.parametrize("dim, n", [(2, 2), (2, 3), (2, 4), (3, 2)])
    def test_orders_against_full_listing(self, dim, n):
        grp = quiet(enumerate_group, sl_generators(dim, n))
        assert grp.order == brute_sl_count(dim, n)

    @pytest.mark.parametrize("p", [2, 3])
    def test_prime_power_orders(self, p):
        base = quiet(enumerate_group, sl_generators(2, p)).order
        assert quiet(enumerate_group, sl_generators(2, p * p)).order == p**3 * base

    def test_identity_first_and_deterministic(self):
        a = enumerate_group(sl_generators(2, 5))
        b = enumerate_group(sl_generators(2, 5))
        assert np.array_equal(a.elements, b.elements)
        assert ModMatrix.from_array(a.elements[0], 5).is_identity

    def test_cap(self):
        with pytest.raises(ResourceError):
            enumerate_group(sl_generators(2, 7), cap=100)

    def test_closure_exhaustive(self):
        grp = enumerate_group(sl_generators(2, 3))
        idx = np.arange(grp.order)
        prod = grp.mul(idx[:, None], idx[None, :])
        assert prod.min() >= 0 and prod.max() < grp.order
        # Latin square: every row is a permutation
        assert all(len(set(row)) == grp.order for row in prod.tolist())
        assert np.all(grp.mul(idx, grp.inv(idx)) == 0)

    @given(st.data())
    def test_associativity_sampled(self, data):
        grp = enumerate_group(sl_generators(2, 7))
        i, j, k = (data.draw(st.integers(0, grp.order - 1)) for _ in range(3))
        assert grp.mul(grp.mul(i, j), k) == grp.mul(i, grp.mul(j, k))


class TestCayley:
    def test_cyclic_is_cycle(self):
        g, labels = cayley_graph(cyclic_group(6))
        # vertices follow BFS order from 0, so relabel by element value
        relabel = {v: int(labels[v]) for v in range(6)}
        assert sorted(labels, key=int) == [str(i) for i in range(6)]
        assert {frozenset((relabel[u], relabel[v])) for u, v in g.edges} == {
            frozenset((i, (i + 1) % 6)) for i in range(6)}

    def test_sl2_3(self):
        g, _ = cayley_graph(enumerate_group(sl_generators(2, 3)))
        assert g.n == 24 and degree_profile(g)[:2] == (True, 4) and g.is_connected

    def test_involution_generator(self):
        g, _ = cayley_graph(cyclic_group(2, (1,)))
        assert g.n == 2 and g.m == 1

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError, match="symmetric"):
            cayley_graph(cyclic_group(5, (1,)))

    @pytest.mark.parametrize("spec", ["sl:2:3", "sl:3:2", "cyclic:7", "cyclic:8:1,-1,3,-3"])
    def test_left_translation_transitive(self, spec):
        grp = quiet(parse_group_spec, spec)
        g, _ = cayley_graph(grp)
        act = left_translation_action(grp, g)
        assert all(is_automorphism(g, p) for p in act.perms)
        od = orbits_and_stabilizers(act)
        assert od.representatives == (0,)
        assert np.all(od.stabilizer_sizes == 1)

    def test_mismatched_action(self):
        grp = enumerate_group(sl_generators(2, 3))
        with pytest.raises(ValidationError):
            left_translation_action(grp, cycle(6))

    def test_action_homomorphism(self):
        grp = cyclic_group(6)
        g, _ = cayley_graph(grp)
        act = left_translation_action(grp, g)
        for a in range(6):
            for b in range(6):
                ab = int(grp.mul(a, b))
                assert np.array_equal(act.perms[ab], act.perms[a][act.perms[b]])


class TestSpecs:
    @pytest.mark.parametrize("bad", ["sl:2", "sl:x:3", "cyclic", "perm:3", "cyclic:6:a"])
    def test_bad(self, bad):
        with pytest.raises(ValidationError):
            parse_group_spec(bad)

    def test_cap_precheck(self):
        with pytest.raises(ResourceError):
            parse_group_spec("sl:3:9")


class TestReduction:
    def test_9_to_3(self):
        h = reduction_hom(2, 9, 3)
        assert h.kernel_size == 27 == h.source.order // h.target.order
        assert not h.collapsed

    def test_4_to_2(self):
        h = reduction_hom(2, 4, 2)
        assert h.kernel_size == 8
        assert h.collapsed

    @pytest.mark.parametrize("n, m", [(3, 3), (9, 2), (9, 1)])
    def test_bad_moduli(self, n, m):
        with pytest.raises(ValidationError):
            reduction_hom(2, n, m)

    def test_homomorphism_exhaustive(self):
        h = reduction_hom(2, 4, 2)
        src, tgt = h.source, h.target
        idx = np.arange(src.order)
        lhs = h.image[src.mul(idx[:, None], idx[None, :])]
        rhs = tgt.mul(h.image[idx][:, None], h.image[idx][None, :])
        assert np.array_equal(lhs, rhs)
        assert set(h.image.tolist()) == set(range(tgt.order))

    def test_homomorphism_sampled(self):
        h = reduction_hom(2, 9, 3)
        rng = np.random.default_rng(0)
        i, j = rng.integers(0, h.source.order, (2, 2000))
        assert np.array_equal(h.image[h.source.mul(i, j)], h.target.mul(h.image[i], h.image[j]))

    def test_kernel_subgroup_action(self):
        h = reduction_hom(2, 9, 3)
        g, _ = cayley_graph(h.source)
        act = left_translation_action(h.source, g, elements=h.kernel)
        od = orbits_and_stabilizers(act)
        assert len(od.representatives) == 24
        assert np.all(od.stabilizer_sizes == 1)


class TestActions:
    def test_trivial_action(self):
        g = cycle(5)
        od = orbits_and_stabilizers(action_from_permutations(g, [np.arange(5)]))
        assert od.representatives == tuple(range(5))

    def test_non_automorphism_rejected(self):
        with pytest.raises(ValidationError):
            action_from_permutations(cycle(5), [[1, 0, 2, 3, 4]])

    def test_non_group_detected(self):
        g = cycle(6)
        rot = (np.arange(6) + 1) % 6
        refl = (-np.arange(6)) % 6
        with pytest.raises(ValidationError, match="orbit-stabilizer"):
            orbits_and_stabilizers(action_from_permutations(g, [np.arange(6), refl, rot]))

    def test_kazhdan_metadata(self):
        grp = enumerate_group(sl_generators(2, 3))
        g, _ = cayley_graph(grp)
        ks = kazhdan_structure(left_translation_action(grp, g), assumed_kazhdan=True)
        assert ks.orbit_count == 1 and ks.max_stabilizer == 1 and ks.regular_degree == 4
        assert ks.assumed_kazhdan and ks.finite_orbit_space
