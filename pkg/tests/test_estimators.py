import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from expanderkit.estimators import (
    CheegerConstant,
    NegativeTypeTest,
    RoundnessEstimator,
    SpectralGap,
    check_graph,
    check_graphs,
)
from expanderkit.exceptions import ValidationError
from expanderkit.graph import build_graph, complete, cycle, path, petersen


class TestCheckGraph:
    def test_adjacency(self):
        a = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        g = check_graph(a)
        assert g.n == 3 and len(g.edges) == 3

    def test_pair(self):
        assert check_graph((4, [(0, 1), (1, 2), (2, 3), (3, 0)])).n == 4

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.array([[0, 1], [0, 0]]), np.array([[0, 2], [2, 0]])])
    def test_bad_matrix(self, bad):
        with pytest.raises(ValidationError):
            check_graph(bad)

    def test_requirements(self):
        with pytest.raises(ValidationError, match="regular"):
            check_graph(path(3), require_regular=True)
        with pytest.raises(ValidationError, match="connected"):
            check_graph(build_graph(4, [(0, 1), (2, 3)]), require_connected=True)

    def test_single_wrapped(self):
        assert len(check_graphs(cycle(5))) == 1


@pytest.mark.parametrize("est", [SpectralGap(eps2=0.1), CheegerConstant(method="heuristic"),
                                 NegativeTypeTest(p=0.5), RoundnessEstimator(n_max=3, seed=4)])
def test_params_roundtrip(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        (c.predict if isinstance(c, NegativeTypeTest) else c.transform)([cycle(4)])


def test_spectral_gap():
    X = [cycle(6), complete(4), petersen()]
    est = SpectralGap(eps2=0.4).fit(X)
    t = est.transform(X)
    assert t.shape == (3, 2)
    assert t[:, 0] == pytest.approx([0.5, -1 / 3, 1 / 3])
    assert np.allclose(t.sum(axis=1), 1)
    assert est.predict(X).tolist() == [True, True, True]
    assert SpectralGap(eps2=0.6).fit(X).predict(X).tolist() == [False, True, True]
    assert est.transform([cycle(6)]).shape == (1, 2)


def test_spectral_gap_rejects_irregular():
    with pytest.raises(ValidationError):
        SpectralGap().fit([path(4)])


def test_cheeger_modes():
    X = [cycle(6), petersen()]
    exact = CheegerConstant().fit_transform(X)
    assert exact[:, 0] == pytest.approx([2 / 3, 1.0])
    assert np.array_equal(exact[:, 0], exact[:, 1])
    lo, hi = CheegerConstant(method="heuristic").fit_transform(X).T
    assert np.all(lo <= exact[:, 0] + 1e-12) and np.all(exact[:, 0] <= hi + 1e-12)
    with pytest.raises(ValidationError):
        CheegerConstant(method="bogus").fit(X)


def test_negative_type():
    est = NegativeTypeTest(p=2).fit([cycle(4)])
    assert est.predict([cycle(4), path(3), np.zeros((3, 3))]).tolist() == [False, True, True]
    assert NegativeTypeTest(p=1).fit([cycle(4)]).predict([cycle(4)]).tolist() == [True]


def test_roundness():
    t = RoundnessEstimator(n_max=2).fit_transform([path(3), complete(2)])
    assert t.shape == (2, 2)
    assert t[0, 1] == pytest.approx(2, abs=1e-3) and np.isinf(t[1, 1])
