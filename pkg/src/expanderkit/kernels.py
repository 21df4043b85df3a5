"""Conditionally negative definite kernels on finite point sets.

A kernel is a symmetric real matrix with zero diagonal. It is *negative*
(CND) when ``c @ H @ c <= 0`` for every ``c`` summing to zero; this is
decided from the spectrum of the centered matrix ``J H J`` with
``J = I - 11^T / n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConsistencyError, ValidationError
from .graph import Graph, ball, induced_subgraph
from .groups import GroupAction, orbits_and_stabilizers

__all__ = [
    "CND_TOL",
    "Kernel",
    "CndVerdict",
    "QuasiTriangleReport",
    "InvarianceReport",
    "BoundCertificate",
    "SupExponent",
    "RoundnessEstimate",
    "kernel_from_metric",
    "metric_power",
    "is_negative_kernel",
    "quadratic_form",
    "quasi_triangle_check",
    "invariance_check",
    "restrict_to_orbit",
    "bound_certificate",
    "cnd_sup_exponent",
    "roundness_violation",
    "roundness_estimate",
    "ball_roundness_trend",
    "parse_kernel_text",
]

CND_TOL = 1e-8
EXP_MAX = 8.0


@dataclass
class Kernel:
    values: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        h = np.asarray(self.values, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError(f"kernel must be a square matrix, got shape {h.shape}")
        if not np.all(np.diag(h) == 0):
            raise ValidationError("kernel diagonal must be exactly zero")
        if not np.array_equal(h, h.T):
            raise ValidationError("kernel must be symmetric")
        self.values = h

    @property
    def n(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {"n": self.n, "values": self.values.tolist()}


def metric_power(d: np.ndarray, p: float) -> np.ndarray:
    """``d**p`` with ``0**p = 0`` for every p (so ``p = 0`` gives 1 off-diagonal)."""
    d = np.asarray(d, dtype=np.float64)
    out = np.zeros_like(d)
    nz = d > 0
    out[nz] = d[nz] ** p
    return out


def kernel_from_metric(g: Graph, p: float = 1.0) -> Kernel:
    """The kernel ``d(x, y)**p`` of the edge-path metric."""
    if p < 0:
        raise ValidationError(f"exponent must be >= 0, got {p}")
    if not g.is_connected:
        raise ValidationError("kernel_from_metric needs a connected graph")
    return Kernel(metric_power(g.distances, p))


def quadratic_form(h: np.ndarray, c: np.ndarray) -> float:
    """``sum_ij c_i c_j h_ij`` evaluated directly."""
    c = np.asarray(c, dtype=np.float64)
    return float(np.einsum("i,ij,j->", c, np.asarray(h, dtype=np.float64), c))


@dataclass
class CndVerdict:
    is_cnd: bool
    max_centered_eigenvalue: float
    witness: np.ndarray | None = None
    form_value: float | None = None

    def to_dict(self) -> dict:
        return {
            "is_cnd": self.is_cnd,
            "max_centered_eigenvalue": self.max_centered_eigenvalue,
            "witness": None if self.witness is None else self.witness.tolist(),
            "form_value": self.form_value,
        }


def is_negative_kernel(k: Kernel | np.ndarray, tol: float = CND_TOL) -> CndVerdict:
    """Decide conditional negative definiteness.

    The kernel fails when the top eigenvalue of ``J H J`` exceeds
    ``tol * max|H|``. The witness is that eigenvector made exactly zero-sum,
    scaled to unit max-norm and signed so its first nonzero entry is positive.
    """
    if not isinstance(k, Kernel):
        k = Kernel(k)
    h = k.values
    n = k.n
    scale = float(np.abs(h).max()) if n else 0.0
    if n < 2 or scale == 0.0:
        return CndVerdict(True, 0.0)
    J = np.eye(n) - 1.0 / n
    w, v = np.linalg.eigh(J @ h @ J)
    top = float(w[-1])
    if top <= tol * scale:
        return CndVerdict(True, top)
    c = v[:, -1] - v[:, -1].mean()
    c /= np.abs(c).max()
    first = c[np.flatnonzero(np.abs(c) > 1e-12)[0]]
    if first < 0:
        c = -c
    c -= c.mean()
    return CndVerdict(False, top, c, quadratic_form(h, c))


@dataclass
class QuasiTriangleReport:
    holds: bool
    worst_slack: float
    worst_triple: tuple[int, int, int] | None


def quasi_triangle_check(k: Kernel, tol: float = 1e-12) -> QuasiTriangleReport:
    """Check ``h(a,b) <= 2 (h(a,c) + h(c,b))`` over all triples.

    Slack is the right side minus the left; the triple with the smallest
    slack is reported.
    """
    h = k.values
    n = k.n
    if n == 0:
        return QuasiTriangleReport(True, 0.0, None)
    best, arg = np.inf, None
    for c in range(n):
        slack = 2.0 * (h[:, c][:, None] + h[c, :][None, :]) - h
        j = int(np.argmin(slack))
        if slack.flat[j] < best:
            best = float(slack.flat[j])
            arg = (j // n, j % n, c)
    scale = max(1.0, float(np.abs(h).max()))
    return QuasiTriangleReport(best >= -tol * scale, best, arg)


@dataclass
class InvarianceReport:
    invariant: bool
    worst_violation: float
    worst: tuple[int, int, int] | None
    exhaustive: bool


def invariance_check(k: Kernel, action: GroupAction, tol: float = 1e-9, seed: int = 0,
                     exhaustive_limit: int = 10**7, samples: int = 10**6) -> InvarianceReport:
    """Test ``h(g x, g y) == h(x, y)`` for all acting elements and pairs.

    ``worst`` is ``(element position, x, y)``. Above ``exhaustive_limit``
    element-pair combinations, ``samples`` random triples are drawn.
    """
    if k.n != action.graph.n:
        raise ValidationError(f"kernel has {k.n} points but action moves {action.graph.n} vertices")
    h = k.values
    G, n = action.order, k.n
    if G * n * n <= exhaustive_limit:
        worst, arg = 0.0, None
        for e, perm in enumerate(action.perms):
            diff = np.abs(h[np.ix_(perm, perm)] - h)
            j = int(np.argmax(diff))
            if diff.flat[j] > worst:
                worst, arg = float(diff.flat[j]), (e, j // n, j % n)
        return InvarianceReport(worst <= tol, worst, arg, True)
    rng = np.random.default_rng(seed)
    e = rng.integers(0, G, samples)
    x = rng.integers(0, n, samples)
    y = rng.integers(0, n, samples)
    P = action.perms
    diff = np.abs(h[P[e, x], P[e, y]] - h[x, y])
    j = int(np.argmax(diff))
    worst = float(diff[j])
    arg = (int(e[j]), int(x[j]), int(y[j])) if worst > 0 else None
    return InvarianceReport(worst <= tol, worst, arg, False)


def restrict_to_orbit(k: Kernel, action: GroupAction, x: int) -> Kernel:
    """Kernel on the acting elements: ``(g1, g2) -> h(g1 x, g2 x)``.

    The group is only an index set here; no metric on it is used.
    """
    orbit_pts = action.perms[:, x]
    return Kernel(k.values[np.ix_(orbit_pts, orbit_pts)], labels=tuple(range(action.order)))


@dataclass
class BoundCertificate:
    K: float
    L: float
    max_h: float
    bound: float
    holds: bool
    representatives: tuple[int, ...]

    @property
    def slack(self) -> float:
        return self.bound - self.max_h

    def to_dict(self) -> dict:
        return {"K": self.K, "L": self.L, "max_h": self.max_h, "bound": self.bound,
                "holds": self.holds, "slack": self.slack, "representatives": list(self.representatives)}


def bound_certificate(k: Kernel, action: GroupAction, tol: float = 1e-9) -> BoundCertificate:
    """Check ``max h <= 6K + 4L`` for an invariant negative kernel.

    ``K`` is the largest ``h(g x_i, x_i)`` over orbit representatives and
    acting elements, ``L`` the largest ``h(x_i, x_j)`` between representatives.
    """
    verdict = is_negative_kernel(k)
    if not verdict.is_cnd:
        raise ValidationError(f"kernel is not conditionally negative definite "
                              f"(centered eigenvalue {verdict.max_centered_eigenvalue:.3g})")
    inv = invariance_check(k, action, tol=tol)
    if not inv.invariant:
        raise ValidationError(f"kernel is not invariant under the action (violation {inv.worst_violation:.3g} at {inv.worst})")
    reps = orbits_and_stabilizers(action).representatives
    h = k.values
    r = np.asarray(reps)
    K = float(max(h[action.perms[:, x], x].max() for x in reps))
    L = float(h[np.ix_(r, r)].max())
    max_h = float(h.max()) if k.n else 0.0
    bound = 6.0 * K + 4.0 * L
    return BoundCertificate(K, L, max_h, bound, max_h <= bound + tol, tuple(int(x) for x in reps))


@dataclass
class SupExponent:
    p_lo: float
    p_hi: float
    capped: bool
    probes: list[tuple[float, bool]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"p_lo": self.p_lo, "p_hi": self.p_hi, "capped": self.capped,
                "probes": [[p, v] for p, v in self.probes]}


def cnd_sup_exponent(g: Graph | np.ndarray, tol_p: float = 1e-4, p_max: float = EXP_MAX,
                     tol: float = CND_TOL) -> SupExponent:
    """Bracket ``sup{p : d**p is CND}`` by bisection.

    A coarse grid of integer exponents is probed first; a non-monotone
    pattern there aborts with :class:`ConsistencyError`.
    """
    d = _metric(g)

    probes: list[tuple[float, bool]] = []

    def cnd(p: float) -> bool:
        ok = is_negative_kernel(metric_power(d, p), tol=tol).is_cnd
        probes.append((float(p), ok))
        return ok

    grid = np.linspace(0.0, p_max, int(round(p_max)) + 1)
    verdicts = [cnd(p) for p in grid]
    _check_monotone(grid, verdicts, "CND")
    if verdicts[-1]:
        return SupExponent(p_max, p_max, True, probes)
    j = verdicts.index(False)
    lo, hi = float(grid[j - 1]), float(grid[j])
    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if cnd(mid):
            lo = mid
        else:
            hi = mid
    return SupExponent(lo, hi, False, probes)


def _check_monotone(grid, verdicts, what: str) -> None:
    if not verdicts[0]:
        raise ConsistencyError(f"{what} fails already at exponent 0")
    seen_false = False
    for p, ok in zip(grid, verdicts):
        if not ok:
            seen_false = True
        elif seen_false:
            raise ConsistencyError(f"{what} holds again at exponent {p} after failing below it; bisection invalid")


def _metric(g) -> np.ndarray:
    if isinstance(g, Graph):
        if not g.is_connected:
            raise ValidationError("metric computations need a connected graph")
        return np.asarray(g.distances, dtype=np.float64)
    d = np.asarray(g, dtype=np.float64)
    Kernel(d)
    return d


# -- generalized roundness ---------------------------------------------------------


@dataclass
class RoundnessEstimate:
    """Bracket for the generalized roundness from configurations of <= n_max pairs.

    ``q_upper`` is certified by ``witness`` (None when no violation was found
    up to the cap); ``q_lower`` is only evidence, as larger configurations
    are never tried.
    """

    q_lower: float
    q_upper: float | None
    witness: dict | None
    scope: str
    n_max: int
    cnd_sup: tuple[float, float] | None = None
    agrees_with_cnd: bool | None = None
    history: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"q_lower": self.q_lower, "q_upper": self.q_upper, "witness": self.witness,
                "scope": self.scope, "n_max": self.n_max,
                "cnd_sup": None if self.cnd_sup is None else list(self.cnd_sup),
                "agrees_with_cnd": self.agrees_with_cnd}


def _roundness_sides(d: np.ndarray, a: np.ndarray, b: np.ndarray, q: float) -> tuple[np.ndarray, np.ndarray]:
    """LHS and RHS for a batch of configurations ``a, b`` of shape (M, n)."""
    n = a.shape[1]
    iu, ju = np.triu_indices(n, 1)
    lhs = metric_power(d[a[:, iu], a[:, ju]], q).sum(axis=1) + metric_power(d[b[:, iu], b[:, ju]], q).sum(axis=1)
    rhs = metric_power(d[a[:, :, None], b[:, None, :]], q).sum(axis=(1, 2))
    return lhs, rhs


def _violates(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return lhs - rhs > 1e-9 * np.maximum(1.0, rhs)


def _configs(npts: int, n: int, mode: str, rng, samples: int, chunk: int = 50000):
    """Yield (a, b) batches. Exhaustive mode walks sorted multisets in
    lexicographic order (the inequality is symmetric under permuting each
    side and swapping sides, so a <= b suffices)."""
    if mode == "exhaustive":
        ms = np.array(list(itertools.combinations_with_replacement(range(npts), n)), dtype=np.int64)
        m = len(ms)
        ia, ib = np.triu_indices(m)
        for s in range(0, len(ia), chunk):
            yield ms[ia[s:s + chunk]], ms[ib[s:s + chunk]]
    else:
        for s in range(0, samples, chunk):
            size = min(chunk, samples - s)
            a = np.sort(rng.integers(0, npts, (size, n)), axis=1)
            b = np.sort(rng.integers(0, npts, (size, n)), axis=1)
            yield a, b


def roundness_violation(d: np.ndarray, q: float, n_max: int = 4, mode: str = "auto", seed: int = 0,
                        samples: int = 10**5, extra: list[dict] | None = None,
                        exhaustive_limit: int = 10**7) -> dict | None:
    """First configuration violating the roundness inequality at exponent q.

    Configurations are searched by increasing n; within one n the
    lexicographically smallest violator of the searched batch order wins.
    ``extra`` configurations (e.g. witnesses from a sub-space) are tried first.
    """
    npts = len(d)
    for cfg in extra or []:
        a, b = np.array([cfg["a"]]), np.array([cfg["b"]])
        lhs, rhs = _roundness_sides(d, a, b, q)
        if _violates(lhs, rhs)[0]:
            return {"a": list(cfg["a"]), "b": list(cfg["b"]), "q": q, "lhs": float(lhs[0]), "rhs": float(rhs[0])}
    for n in range(2, n_max + 1):
        m = mode
        if m == "auto":
            m = "exhaustive" if npts ** (2 * n) <= exhaustive_limit else "sampled"
        rng = np.random.default_rng([seed, n])
        found = None
        for a, b in _configs(npts, n, m, rng, samples):
            lhs, rhs = _roundness_sides(d, a, b, q)
            bad = np.flatnonzero(_violates(lhs, rhs))
            if len(bad):
                cand = sorted((tuple(a[i].tolist()), tuple(b[i].tolist()), float(lhs[i]), float(rhs[i])) for i in bad)[0]
                if found is None or cand[:2] < found[:2]:
                    found = cand
                if m == "exhaustive":
                    break
        if found is not None:
            return {"a": list(found[0]), "b": list(found[1]), "q": q, "lhs": found[2], "rhs": found[3]}
    return None


def roundness_estimate(g: Graph | np.ndarray, n_max: int = 4, tol_q: float = 1e-4, seed: int = 0,
                       samples: int = 10**5, q_max: float = EXP_MAX, mode: str = "auto",
                       carry: dict[float, list[dict]] | None = None, cross_check: bool = True,
                       tol_p: float = 1e-4) -> RoundnessEstimate:
    """Bisect on q using the violation search as oracle.

    ``carry`` maps an exponent to configurations that are tried first when
    that exponent is probed. With ``cross_check`` the CND supremum exponent
    is computed too; in exhaustive scope the two brackets are expected to
    agree within ``4 * max(tol_q, tol_p)``, and the outcome is recorded
    either way.
    """
    d = _metric(g)
    npts = len(d)
    scope = "exhaustive" if (mode == "exhaustive" or (mode == "auto" and npts ** (2 * n_max) <= 10**7)) else "sampled"
    history: dict[float, dict] = {}

    def viol(q: float):
        q = float(q)
        r = roundness_violation(d, q, n_max=n_max, mode=mode, seed=seed, samples=samples,
                                extra=(carry or {}).get(q))
        if r is not None:
            history[q] = r
        return r

    grid = np.linspace(0.0, q_max, int(round(q_max)) + 1)
    results = [viol(q) for q in grid]
    _check_monotone(grid, [r is None for r in results], "roundness inequality")
    cnd = cnd_sup_exponent(d, tol_p=tol_p, p_max=q_max) if cross_check else None
    if results[-1] is None:
        est = RoundnessEstimate(q_max, None, None, scope, n_max)
    else:
        j = next(i for i, r in enumerate(results) if r is not None)
        lo, hi, wit = float(grid[j - 1]), float(grid[j]), results[j]
        while hi - lo > tol_q:
            mid = 0.5 * (lo + hi)
            r = viol(mid)
            if r is None:
                lo = mid
            else:
                hi, wit = mid, r
        est = RoundnessEstimate(lo, hi, wit, scope, n_max)
    est.history = history
    if cnd is not None:
        est.cnd_sup = (cnd.p_lo, cnd.p_hi)
        tol = 4 * max(tol_q, tol_p)
        if est.q_upper is None:
            est.agrees_with_cnd = cnd.capped
        else:
            est.agrees_with_cnd = abs(est.q_upper - cnd.p_hi) <= tol
    return est


def ball_roundness_trend(g: Graph, center: int, radii, n_max: int = 4, tol_q: float = 1e-3,
                         seed: int = 0, samples: int = 10**5) -> list[dict]:
    """Roundness brackets on nested balls around ``center``.

    Each ball carries the ambient metric of ``g`` restricted to it. Every
    violating configuration found on a smaller ball is re-tried at the same
    exponent on the larger ones, so the violation oracle only grows with the
    radius and the reported ``q_upper`` values cannot increase.
    """
    rows = []
    carried: dict[float, list[tuple[list[int], list[int]]]] = {}
    dist = np.asarray(g.distances, dtype=np.float64)
    for r in sorted(radii):
        vs = np.asarray(ball(g, center, r))
        d = dist[np.ix_(vs, vs)]
        pos = {int(v): i for i, v in enumerate(vs)}
        carry = {q: [{"a": [pos[x] for x in a], "b": [pos[x] for x in b]} for a, b in cfgs]
                 for q, cfgs in carried.items()}
        est = roundness_estimate(d, n_max=n_max, tol_q=tol_q, seed=seed, samples=samples,
                                 carry=carry, cross_check=False)
        for q, w in est.history.items():
            carried.setdefault(q, []).append(([int(vs[i]) for i in w["a"]], [int(vs[i]) for i in w["b"]]))
        row = {"radius": r, "size": len(vs), **est.to_dict()}
        if est.witness is not None:
            row["witness_vertices"] = {"a": [int(vs[i]) for i in est.witness["a"]],
                                       "b": [int(vs[i]) for i in est.witness["b"]]}
        rows.append(row)
    return rows


def parse_kernel_text(text: str) -> Kernel:
    """Whitespace-separated square matrix, one row per line; ``#`` comments."""
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    try:
        return Kernel(np.array([[float(x) for x in r] for r in rows]))
    except ValueError as exc:
        raise ValidationError(f"malformed kernel matrix: {exc}") from exc
