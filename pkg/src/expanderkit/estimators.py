"""scikit-learn style wrappers over the functional API.

Each estimator takes a list of graphs (or metric / kernel matrices) as
``X``; ``fit`` stores per-item results in trailing-underscore attributes and
``transform(X)`` returns a numeric feature table for ``X``. Hyperparameters are plain
constructor arguments so ``get_params`` / ``set_params`` and ``clone`` work.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ValidationError
from .graph import Graph, build_graph
from .kernels import CND_TOL, Kernel, is_negative_kernel, kernel_from_metric, roundness_estimate
from .spectra import TOL_EIG, cheeger_bounds, cheeger_exact, spectrum

__all__ = [
    "check_graph",
    "check_graphs",
    "check_kernel",
    "SpectralGap",
    "CheegerConstant",
    "NegativeTypeTest",
    "RoundnessEstimator",
]


def check_graph(g, require_regular: bool = False, require_connected: bool = False) -> Graph:
    """Coerce ``g`` to a Graph.

    Accepts a Graph, a square 0/1 adjacency matrix or a pair ``(n, edges)``.
    """
    if isinstance(g, Graph):
        out = g
    elif isinstance(g, tuple) and len(g) == 2 and np.isscalar(g[0]):
        out = build_graph(int(g[0]), g[1])
    else:
        a = np.asarray(g)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"expected a Graph or square adjacency matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValidationError("adjacency matrix must be symmetric")
        if not np.isin(a, (0, 1)).all():
            raise ValidationError("adjacency matrix must be 0/1")
        iu, ju = np.nonzero(np.triu(a))
        out = build_graph(len(a), zip(iu.tolist(), ju.tolist()))
    if require_connected and not out.is_connected:
        raise ValidationError(f"graph {out.name!r} is not connected")
    if require_regular and len(set(out.degrees.tolist())) > 1:
        raise ValidationError(f"graph {out.name!r} is not regular")
    return out


def check_graphs(X, **kw) -> list[Graph]:
    if isinstance(X, (Graph, np.ndarray)) and not (isinstance(X, np.ndarray) and X.ndim == 3):
        X = [X]
    return [check_graph(g, **kw) for g in X]


def check_kernel(h) -> Kernel:
    return h if isinstance(h, Kernel) else Kernel(np.asarray(h, dtype=np.float64))


class SpectralGap(BaseEstimator, TransformerMixin):
    """Markov spectral gap of regular graphs.

    ``transform`` returns columns ``[lambda, gap]``; ``predict`` returns
    whether ``gap >= eps2``.
    """

    def __init__(self, eps2: float = 0.05, tol_eig: float = TOL_EIG):
        self.eps2 = eps2
        self.tol_eig = tol_eig

    def fit(self, X, y=None):
        graphs = check_graphs(X, require_regular=True)
        self.reports_ = [spectrum(g, tol_eig=self.tol_eig) for g in graphs]
        self.gaps_ = np.array([r.gap for r in self.reports_])
        return self

    def transform(self, X):
        check_is_fitted(self, "reports_")
        reports = [spectrum(g, tol_eig=self.tol_eig) for g in check_graphs(X, require_regular=True)]
        return np.array([[r.lambda_, r.gap] for r in reports]).reshape(-1, 2)

    def predict(self, X):
        return self.transform(X)[:, 1] >= self.eps2


class CheegerConstant(BaseEstimator, TransformerMixin):
    """Cheeger constant; exact below ``max_exact`` vertices.

    With ``method="auto"`` larger graphs get the interval
    ``[k gap / 2, sweep bound]``; ``method="exact"`` raises instead.
    ``transform`` returns ``[h_lo, h_hi]`` per graph.
    """

    def __init__(self, method: str = "auto", max_exact: int = 24):
        self.method = method
        self.max_exact = max_exact

    def fit(self, X, y=None):
        self.bounds_ = self._bounds(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "bounds_")
        return self._bounds(X)

    def _bounds(self, X):
        graphs = check_graphs(X, require_regular=True, require_connected=True)
        bounds = []
        for g in graphs:
            if self.method == "exact" or (self.method == "auto" and g.n <= self.max_exact):
                h = cheeger_exact(g, max_n=self.max_exact).h
                bounds.append((h, h))
            elif self.method in ("auto", "heuristic"):
                bounds.append(cheeger_bounds(g))
            else:
                raise ValidationError(f"unknown method {self.method!r}")
        return np.array(bounds, dtype=np.float64).reshape(-1, 2)


class NegativeTypeTest(BaseEstimator):
    """Conditional negative definiteness of kernels ``d**p`` or raw kernels.

    ``X`` holds graphs (their path metric raised to ``p``) or square
    zero-diagonal matrices used as-is.
    """

    def __init__(self, p: float = 1.0, tol: float = CND_TOL):
        self.p = p
        self.tol = tol

    def _kernel(self, x) -> Kernel:
        if isinstance(x, Graph):
            return kernel_from_metric(x, self.p)
        return check_kernel(x)

    def fit(self, X, y=None):
        items = X if isinstance(X, (list, tuple)) else [X]
        self.verdicts_ = [is_negative_kernel(self._kernel(x), tol=self.tol) for x in items]
        return self

    def predict(self, X):
        check_is_fitted(self, "verdicts_")
        items = X if isinstance(X, (list, tuple)) else [X]
        return np.array([is_negative_kernel(self._kernel(x), tol=self.tol).is_cnd for x in items])


class RoundnessEstimator(BaseEstimator, TransformerMixin):
    """Generalized-roundness bracket ``[q_lower, q_upper]`` per metric."""

    def __init__(self, n_max: int = 4, tol_q: float = 1e-4, seed: int = 0, samples: int = 10**5,
                 mode: str = "auto"):
        self.n_max = n_max
        self.tol_q = tol_q
        self.seed = seed
        self.samples = samples
        self.mode = mode

    def _estimate(self, X):
        items = X if isinstance(X, (list, tuple)) else [X]
        return [roundness_estimate(x, n_max=self.n_max, tol_q=self.tol_q, seed=self.seed,
                                   samples=self.samples, mode=self.mode, cross_check=False) for x in items]

    def fit(self, X, y=None):
        self.estimates_ = self._estimate(X)
        return self

    @staticmethod
    def _table(est):
        return np.array([[e.q_lower, np.inf if e.q_upper is None else e.q_upper] for e in est]).reshape(-1, 2)

    def transform(self, X):
        check_is_fitted(self, "estimates_")
        return self._table(self._estimate(X))

    def fit_transform(self, X, y=None):
        return self._table(self.fit(X).estimates_)
