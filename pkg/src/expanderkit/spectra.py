"""Markov spectra, Cheeger constants, expander constants and Folner ratios.

All spectral quantities use the random-walk normalization ``P = A / k`` of a
k-regular graph. ``lambda`` is the largest eigenvalue of ``P`` below
``1 - tol_eig``; the gap is ``1 - lambda``.

Exhaustive searches run over vertex bitmasks in numpy chunks and refuse to
start above their caps rather than silently switching to a heuristic.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy.sparse.linalg import eigsh

from .exceptions import ResourceError, ValidationError
from .graph import Graph, boundary, degree_profile, is_bipartite

__all__ = [
    "TOL_EIG",
    "SpectralReport",
    "CheegerReport",
    "ExpanderReport",
    "FolnerReport",
    "markov_matrix",
    "spectrum",
    "cheeger_exact",
    "cheeger_heuristic",
    "cheeger_bounds",
    "expander_constant",
    "folner_ratio",
]

TOL_EIG = 1e-9
DENSE_MAX = 3000
EXACT_MAX_N = 24
_CHUNK = 1 << 20


@dataclass
class SpectralReport:
    name: str
    n: int
    k: int
    eigenvalues: list[float]
    lambda_: float
    gap: float
    bipartite: bool
    multiplicity_of_one: int
    method: str = "dense"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


@dataclass
class CheegerReport:
    h: float
    witness: tuple[tuple[int, ...], tuple[int, ...]]
    method: str
    fraction: tuple[int, int] = (0, 1)

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "h_fraction": list(self.fraction),
            "h_witness": [list(self.witness[0]), list(self.witness[1])],
            "method": self.method,
        }


@dataclass
class ExpanderReport:
    c: float
    witness: tuple[int, ...]
    n: int
    d: int | None
    fraction: tuple[int, int] = (0, 1)

    def to_dict(self) -> dict:
        return {"c": self.c, "c_fraction": list(self.fraction), "c_witness": list(self.witness),
                "n": self.n, "d": self.d}


@dataclass
class FolnerReport:
    ratio: float
    witness: tuple[int, ...]
    mode: str
    max_size: int
    boundary_size: int = field(default=0)

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "witness": list(self.witness), "mode": self.mode,
                "max_size": self.max_size, "boundary_size": self.boundary_size}


def _require_regular(g: Graph) -> int:
    regular, k, _ = degree_profile(g)
    if g.n == 0:
        raise ValidationError("empty graph")
    if not regular:
        raise ValidationError(f"graph {g.name!r} is not regular; the Markov operator needs a regular walk")
    if k == 0:
        raise ValidationError("0-regular graph has no random walk (degree k >= 1 required)")
    return int(k)


def markov_matrix(g: Graph, sparse: bool = False):
    """Transition matrix ``A / k`` of the simple random walk on a regular graph."""
    k = _require_regular(g)
    if sparse:
        return g.sparse_adjacency / k
    return g.adjacency_matrix / k


def spectrum(g: Graph, tol_eig: float = TOL_EIG, dense_max: int = DENSE_MAX, n_top: int = 8) -> SpectralReport:
    """Markov spectrum of a regular graph.

    Dense symmetric solve up to ``dense_max`` vertices; above that only the
    top ``n_top`` eigenvalues and the bottom one are computed (Lanczos).
    """
    k = _require_regular(g)
    if g.n <= dense_max:
        evals = np.linalg.eigvalsh(markov_matrix(g))[::-1]
        method = "dense"
    else:
        P = markov_matrix(g, sparse=True)
        top = eigsh(P, k=min(n_top, g.n - 2), which="LA", return_eigenvectors=False)
        bot = eigsh(P, k=1, which="SA", return_eigenvectors=False)
        evals = np.concatenate([np.sort(top)[::-1], bot])
        method = "iterative"
    evals = np.clip(evals, -1.0, 1.0)
    below = evals[evals <= 1.0 - tol_eig]
    if len(below) == 0:
        raise ValidationError("no eigenvalue below 1 was computed; increase n_top")
    lam = float(below.max())
    mult = int((evals > 1.0 - tol_eig).sum())
    return SpectralReport(
        name=g.name,
        n=g.n,
        k=k,
        eigenvalues=[float(x) for x in evals],
        lambda_=lam,
        gap=1.0 - lam,
        bipartite=bool(evals.min() < -1.0 + tol_eig),
        multiplicity_of_one=mult,
        method=method,
    )


def _second_eigenvectors(g: Graph, tol_eig: float) -> np.ndarray:
    """Columns spanning the eigenspace of lambda (or a Lanczos approximation)."""
    if g.n <= DENSE_MAX:
        w, v = np.linalg.eigh(markov_matrix(g))
        lam = w[w <= 1.0 - tol_eig].max()
        return v[:, np.abs(w - lam) <= 1e-8]
    w, v = eigsh(markov_matrix(g, sparse=True), k=min(8, g.n - 2), which="LA")
    keep = w <= 1.0 - tol_eig
    w, v = w[keep], v[:, keep]
    return v[:, [int(np.argmax(w))]]


# -- bitmask machinery ----------------------------------------------------------


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _masks_to_sets(masks: np.ndarray, n: int) -> np.ndarray:
    """Sorted member lists padded with -1 so row order matches tuple order."""
    bits = ((masks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(bool)
    idx = np.where(bits, np.arange(n, dtype=np.int16)[None, :], np.int16(n))
    idx.sort(axis=1)
    idx[idx == n] = -1
    return idx


def _lex_min_mask(masks: np.ndarray, n: int) -> tuple[int, ...]:
    rows = _masks_to_sets(masks, n)
    order = np.lexsort(rows.T[::-1])
    best = rows[order[0]]
    return tuple(int(x) for x in best if x >= 0)


class _Best:
    """Running exact minimum of num/den with a lexicographic tie-break."""

    def __init__(self):
        self.num = None
        self.den = None
        self.witness = None

    def offer(self, num: np.ndarray, den: np.ndarray, masks: np.ndarray, n: int):
        if len(num) == 0:
            return
        r = num / den
        j = int(np.argmin(r))
        bn, bd = int(num[j]), int(den[j])
        tie = num * bd == den * bn
        wit = _lex_min_mask(masks[tie], n)
        if self.num is None or bn * self.den < self.num * bd:
            self.num, self.den, self.witness = bn, bd, wit
        elif bn * self.den == self.num * bd and wit < self.witness:
            self.witness = wit


def cheeger_exact(g: Graph, max_n: int = EXACT_MAX_N) -> CheegerReport:
    """Minimum of ``|E(A,B)| / min(|A|,|B|)`` over all bipartitions.

    Vertex 0 is always placed in ``A``; among minimizers the lexicographically
    smallest ``A`` is reported.
    """
    if g.n < 2:
        raise ValidationError("Cheeger constant needs at least 2 vertices")
    if g.n > max_n:
        raise ResourceError(f"exact Cheeger search capped at n={max_n} (graph has {g.n}); use cheeger_heuristic")
    if not g.is_connected:
        raise ValidationError("cheeger_exact requires a connected graph")
    n = g.n
    nbr = np.array(g.neighbor_masks(), dtype=np.int64)
    full = (1 << n) - 1
    total = 1 << (n - 1)
    best = _Best()
    for start in range(0, total - 1, _CHUNK):
        x = np.arange(start, min(start + _CHUNK, total - 1), dtype=np.int64)
        A = 1 | (x << 1)
        notA = full & ~A
        cut = np.zeros(len(A), dtype=np.int64)
        for u in range(n):
            inu = (A >> u) & 1
            cut += inu * _popcount(nbr[u] & notA)
        a = _popcount(A)
        best.offer(cut, np.minimum(a, n - a), A, n)
    Aw = best.witness
    Bw = tuple(v for v in range(n) if v not in set(Aw))
    return CheegerReport(best.num / best.den, (Aw, Bw), "exact", _reduced(best.num, best.den))


def _reduced(num: int, den: int) -> tuple[int, int]:
    f = Fraction(num, den)
    return f.numerator, f.denominator


def cheeger_heuristic(g: Graph, tol_eig: float = TOL_EIG) -> CheegerReport:
    """Sweep-cut upper bound on the Cheeger constant.

    Every basis vector of the lambda-eigenspace is sorted and each prefix is
    scored; the best prefix partition is returned.
    """
    _require_regular(g)
    if not g.is_connected:
        raise ValidationError("cheeger_heuristic requires a connected graph")
    n = g.n
    vecs = _second_eigenvectors(g, tol_eig)
    deg = g.degrees
    best_num, best_den, best_A = None, None, None
    for col in range(vecs.shape[1]):
        order = np.lexsort((np.arange(n), vecs[:, col]))
        inside = np.zeros(n, dtype=bool)
        cut = 0
        for s, v in enumerate(order[:-1], start=1):
            internal = sum(1 for w in g.adjacency[v] if inside[w])
            cut += int(deg[v]) - 2 * internal
            inside[v] = True
            den = min(s, n - s)
            if best_num is None or cut * best_den < best_num * den:
                best_num, best_den = cut, den
                best_A = inside.copy()
    A = tuple(int(v) for v in np.flatnonzero(best_A))
    B = tuple(int(v) for v in np.flatnonzero(~best_A))
    if 0 not in A:
        A, B = B, A
    return CheegerReport(best_num / best_den, (A, B), "heuristic-upper-bound", _reduced(best_num, best_den))


def cheeger_bounds(g: Graph, gap: float | None = None) -> tuple[float, float]:
    """Interval ``[k*gap/2, sweep upper bound]`` containing the Cheeger constant."""
    k = _require_regular(g)
    if gap is None:
        gap = spectrum(g).gap
    return k * gap / 2.0, cheeger_heuristic(g).h


def expander_constant(g: Graph, max_n: int = EXACT_MAX_N) -> ExpanderReport:
    """Largest c with ``|dA| >= c (1 - |A|/n) |A|`` for every nonempty proper A."""
    n = g.n
    if n < 2:
        raise ValidationError("expander constant needs at least 2 vertices")
    if n > max_n:
        raise ResourceError(f"exact expander-constant search capped at n={max_n} (graph has {n})")
    nbr = np.array(g.neighbor_masks(), dtype=np.int64)
    full = (1 << n) - 1
    best = _Best()
    for start in range(1, full, _CHUNK):
        A = np.arange(start, min(start + _CHUNK, full), dtype=np.int64)
        reach = np.zeros(len(A), dtype=np.int64)
        for u in range(n):
            reach |= np.where((A >> u) & 1 == 1, nbr[u], 0)
        bd = _popcount(reach & ~A & full)
        a = _popcount(A)
        best.offer(n * bd, (n - a) * a, A, n)
    regular, k, _ = degree_profile(g)
    return ExpanderReport(best.num / best.den, best.witness, n, k, _reduced(best.num, best.den))


def folner_ratio(g: Graph, max_size: int, mode: str = "auto", exhaustive_limit: int = 10**6) -> FolnerReport:
    """Minimum of ``|dF| / |F|`` over nonempty F with ``|F| <= max_size``.

    ``mode`` is ``"exact"`` (all subsets), ``"greedy"`` (growth from every
    vertex) or ``"auto"`` (exact when at most ``exhaustive_limit`` subsets).
    """
    if not 1 <= max_size <= max(1, g.n // 2):
        raise ValidationError(f"max_size must be in 1..{max(1, g.n // 2)}, got {max_size}")
    count = sum(comb(g.n, s) for s in range(1, max_size + 1))
    if mode == "auto":
        mode = "exact" if count <= exhaustive_limit else "greedy"
    if mode == "exact":
        if count > exhaustive_limit:
            raise ResourceError(f"{count} subsets exceed the exhaustive limit {exhaustive_limit}")
        ratio, F = _folner_exact(g, max_size)
    elif mode == "greedy":
        ratio, F = _folner_greedy(g, max_size)
    else:
        raise ValidationError(f"unknown folner mode {mode!r}")
    return FolnerReport(float(ratio), F, mode, max_size, len(boundary(g, F)))


def _folner_exact(g: Graph, max_size: int) -> tuple[Fraction, tuple[int, ...]]:
    adj = g.adjacency_matrix.astype(bool)
    best, wit = None, None
    for s in range(1, max_size + 1):
        it = itertools.combinations(range(g.n), s)
        while True:
            chunk = list(itertools.islice(it, 20000))
            if not chunk:
                break
            F = np.array(chunk, dtype=np.int64)
            member = np.zeros((len(F), g.n), dtype=bool)
            np.put_along_axis(member, F, True, axis=1)
            reach = adj[F].any(axis=1) & ~member
            bd = reach.sum(axis=1)
            j = int(np.argmin(bd))
            r = Fraction(int(bd[j]), s)
            cand = tuple(int(x) for x in F[j])
            if best is None or r < best or (r == best and cand < wit):
                best, wit = r, cand
    return best, wit


def _folner_greedy(g: Graph, max_size: int) -> tuple[Fraction, tuple[int, ...]]:
    """Grow sets from each vertex two ways: BFS-ball prefixes and greedy
    boundary minimization; keep the best set seen at any size."""
    A = g.sparse_adjacency
    dist = g.distances
    best, wit = None, None

    def offer(members: list[int], bsize: int):
        nonlocal best, wit
        r = Fraction(bsize, len(members))
        cand = tuple(sorted(members))
        if best is None or r < best or (r == best and cand < wit):
            best, wit = r, cand

    for v in range(g.n):
        # BFS ball prefixes, ties by vertex index
        order = np.lexsort((np.arange(g.n), dist[v]))[:max_size]
        state = np.zeros(g.n, dtype=np.int8)
        bsize = 0
        for s, u in enumerate(order, start=1):
            if state[u] == 1:
                bsize -= 1
            state[u] = 2
            for w in g.adjacency[u]:
                if state[w] == 0:
                    state[w] = 1
                    bsize += 1
            offer([int(x) for x in order[:s]], bsize)
        # greedy: add the boundary vertex creating the fewest new boundary vertices
        state = np.zeros(g.n, dtype=np.int8)
        members = [v]
        state[v] = 2
        for w in g.adjacency[v]:
            state[w] = 1
        bsize = len(g.adjacency[v])
        offer(members, bsize)
        while len(members) < max_size and bsize > 0:
            outside = (state == 0).astype(np.float64)
            fresh = A @ outside
            cands = np.flatnonzero(state == 1)
            u = int(cands[np.argmin(fresh[cands])])
            state[u] = 2
            members.append(u)
            bsize -= 1
            for w in g.adjacency[u]:
                if state[w] == 0:
                    state[w] = 1
                    bsize += 1
            offer(members, bsize)
    return best, wit
