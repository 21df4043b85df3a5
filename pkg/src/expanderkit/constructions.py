"""Vertex replacement by K_{p,q} copies, plus automorphism diagnostics.

Each group element g carries a copy of K_{p,q} whose vertices are slots
``(g, i)``; slots ``i < p`` form class p, the rest class q. Identification
rules merge slots across copies, and the merged slots become the vertices
of the result.

Two identification policies exist:

``literal``
    For ``i < p``: ``(g, i) ~ (g s_i, p)``; for ``j >= p``: ``(g, j) ~ (g s_j, 0)``.
    Executed exactly as written; clusters may grow well beyond two slots.
``matched``
    ``(g, s) ~ (g s, s^-1)``, an involution on slots. Needs the class-q
    generators to be the inverses of the class-p ones, hence p == q and no
    involutions in S.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .exceptions import ResourceError, ValidationError
from .graph import Graph, build_graph
from .groups import FiniteGroup, is_automorphism

__all__ = [
    "DisjointSet",
    "ReplacementResult",
    "kpq_replace",
    "automorphism_group",
    "find_automorphism",
    "vertex_transitive",
    "ParityReport",
    "fixed_vertex_parity_check",
]


class DisjointSet:
    """Union-find with path halving; the root of a class is its smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return [groups[r] for r in sorted(groups)]


@dataclass
class ReplacementResult:
    graph: Graph
    slot_labels: list[list[tuple[int, int]]]
    policy: str
    p: int
    q: int
    generator_order: tuple[int, ...]
    degree_sequence: list[int]
    regular: bool
    merge_histogram: dict[int, int]
    dropped_loops: int
    collapsed_parallel: int
    left_translation_compatible: bool

    @property
    def slot_count(self) -> int:
        return sum(len(s) for s in self.slot_labels)

    def class_vertices(self, g: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Merged vertices holding the class-p and class-q slots of copy ``g``."""
        where = {s: v for v, slots in enumerate(self.slot_labels) for s in slots}
        P = tuple(sorted({where[(g, i)] for i in range(self.p)}))
        Q = tuple(sorted({where[(g, i)] for i in range(self.p, self.p + self.q)}))
        return P, Q

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "p": self.p,
            "q": self.q,
            "n": self.graph.n,
            "edges": [list(e) for e in self.graph.edges],
            "degree_sequence": self.degree_sequence,
            "regular": self.regular,
            "merge_histogram": {str(k): v for k, v in sorted(self.merge_histogram.items())},
            "slot_labels": [[list(s) for s in slots] for slots in self.slot_labels],
            "dropped_loops": self.dropped_loops,
            "collapsed_parallel": self.collapsed_parallel,
            "left_translation_compatible": self.left_translation_compatible,
        }


def _matched_order(group: FiniteGroup, p: int, q: int) -> tuple[int, ...]:
    gens = list(group.generators)
    inv = {s: int(group.inv(s)) for s in gens}
    invol = [group.label(s) for s in gens if inv[s] == s]
    if invol:
        raise ValidationError(f"matched policy infeasible: involution generator(s) {invol} cannot sit in both classes")
    if p != q:
        raise ValidationError(f"matched policy infeasible: class q must be the inverses of class p, forcing p == q (got p={p}, q={q})")
    P, seen = [], set()
    for s in gens:
        if s not in seen:
            P.append(s)
            seen.update((s, inv[s]))
    return tuple(P + [inv[s] for s in P])


def kpq_replace(group: FiniteGroup, p: int, q: int, policy: str = "literal") -> ReplacementResult:
    """Replace each vertex of Cay(group, S) by K_{p,q} and merge slots.

    Loops and parallel edges produced by merging are dropped from the returned
    simple graph but counted in ``dropped_loops`` / ``collapsed_parallel``.
    """
    k = len(group.generators)
    if p < 1 or q < 1 or p + q != k:
        raise ValidationError(f"need p, q >= 1 with p + q = |S| = {k}; got p={p}, q={q}")
    if policy == "matched":
        order = _matched_order(group, p, q)
    elif policy == "literal":
        order = tuple(group.generators)
    else:
        raise ValidationError(f"unknown policy {policy!r}")
    N = group.order
    idx = np.arange(N)
    right = np.stack([group.mul(idx, np.full(N, s)) for s in order], axis=1)  # right[g, i] = g s_i

    def slot(g, i):
        return int(g) * k + i

    partner = [order.index(int(group.inv(s))) for s in order]
    ds = DisjointSet(N * k)
    for g in range(N):
        for i in range(k):
            if policy == "matched":
                ds.union(slot(g, i), slot(right[g, i], partner[i]))
            elif i < p:
                ds.union(slot(g, i), slot(right[g, i], p))
            else:
                ds.union(slot(g, i), slot(right[g, i], 0))
    classes = ds.classes()
    vertex_of = np.empty(N * k, dtype=np.int64)
    for v, members in enumerate(classes):
        vertex_of[members] = v

    edges = set()
    loops = parallel = 0
    for g in range(N):
        for i in range(p):
            for j in range(p, k):
                a, b = int(vertex_of[slot(g, i)]), int(vertex_of[slot(g, j)])
                if a == b:
                    loops += 1
                    continue
                e = (min(a, b), max(a, b))
                if e in edges:
                    parallel += 1
                else:
                    edges.add(e)
    graph = build_graph(len(classes), edges, name=f"Kpq-replace({policy},{p},{q})")
    degs = sorted(int(d) for d in graph.degrees)
    hist = Counter(len(c) for c in classes)
    labels = [[(s // k, s % k) for s in members] for members in classes]

    compatible = True
    for h in range(N):
        moved = group.mul(np.full(N, h), idx)
        perm = np.empty(len(classes), dtype=np.int64)
        for v, members in enumerate(classes):
            imgs = {int(vertex_of[slot(moved[s // k], s % k)]) for s in members}
            if len(imgs) != 1:
                compatible = False
                break
            perm[v] = imgs.pop()
        if not compatible or not is_automorphism(graph, perm):
            compatible = False
            break

    return ReplacementResult(
        graph=graph,
        slot_labels=labels,
        policy=policy,
        p=p,
        q=q,
        generator_order=order,
        degree_sequence=degs,
        regular=len(set(degs)) == 1,
        merge_histogram=dict(sorted(hist.items())),
        dropped_loops=loops,
        collapsed_parallel=parallel,
        left_translation_compatible=compatible,
    )


# -- automorphisms --------------------------------------------------------------


class _AutSearch:
    """Backtracking over vertices in BFS order with distance-profile pruning.

    A bijection preserving all pairwise distances is an automorphism, so
    each new assignment is checked against the distances to every vertex
    already placed.
    """

    def __init__(self, g: Graph):
        self.g = g
        d = g.distances.copy()
        d[np.isinf(d)] = -1
        self.dist = d.astype(np.int64)
        self.profile = [tuple(sorted(row)) for row in self.dist.tolist()]
        self.order = self._vertex_order()

    def _vertex_order(self) -> list[int]:
        g = self.g
        order, seen = [], [False] * g.n
        for s in range(g.n):
            if seen[s]:
                continue
            seen[s] = True
            queue = [s]
            while queue:
                u = queue.pop(0)
                order.append(u)
                for w in g.adjacency[u]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
        return order

    def search(self, fixed: dict[int, int] | None = None, first_only: bool = False) -> list[np.ndarray]:
        g, dist, order = self.g, self.dist, self.order
        n = g.n
        img = np.full(n, -1, dtype=np.int64)
        used = np.zeros(n, dtype=bool)
        placed: list[int] = []
        out: list[np.ndarray] = []
        fixed = fixed or {}
        for u, v in fixed.items():
            if self.profile[u] != self.profile[v]:
                return out
        seq = list(fixed) + [u for u in order if u not in fixed]

        def ok(u: int, v: int) -> bool:
            if used[v] or self.profile[u] != self.profile[v]:
                return False
            if placed:
                pa = np.asarray(placed)
                return bool(np.array_equal(dist[u, pa], dist[v, img[pa]]))
            return True

        def rec(t: int) -> bool:
            if t == n:
                out.append(img.copy())
                return first_only
            u = seq[t]
            if u in fixed:
                cands = [fixed[u]]
            else:
                prev = [w for w in g.adjacency[u] if img[w] >= 0]
                cands = g.adjacency[img[prev[0]]] if prev else range(n)
            for v in cands:
                if ok(u, v):
                    img[u] = v
                    used[v] = True
                    placed.append(u)
                    if rec(t + 1):
                        return True
                    placed.pop()
                    used[v] = False
                    img[u] = -1
            return False

        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * n + 100))
        try:
            rec(0)
        finally:
            sys.setrecursionlimit(limit)
        return out


def automorphism_group(g: Graph, cap: int = 16) -> list[np.ndarray]:
    """Every automorphism of ``g`` (identity first), by backtracking."""
    if g.n > cap:
        raise ResourceError(f"automorphism enumeration capped at {cap} vertices (graph has {g.n})")
    auts = _AutSearch(g).search()
    auts.sort(key=lambda a: tuple(a.tolist()))
    return auts


def find_automorphism(g: Graph, u: int, v: int, search: _AutSearch | None = None) -> np.ndarray | None:
    """Some automorphism mapping ``u`` to ``v``, or None."""
    search = search or _AutSearch(g)
    found = search.search(fixed={u: v}, first_only=True)
    return found[0] if found else None


def vertex_transitive(g: Graph, cap: int = 16) -> tuple[bool, list[tuple[int, ...]]]:
    """Whether Aut(g) has a single vertex orbit, and the orbit partition.

    Orbits are merged using one witness automorphism per successful search,
    so the full group is never enumerated; ``cap`` bounds the vertex count.
    """
    if g.n > cap:
        raise ResourceError(f"vertex-transitivity check capped at {cap} vertices (graph has {g.n})")
    search = _AutSearch(g)
    ds = DisjointSet(g.n)
    reps: list[int] = []
    for v in range(g.n):
        if any(ds.find(r) == ds.find(v) for r in reps):
            continue
        merged = False
        for r in reps:
            if search.profile[r] != search.profile[v]:
                continue
            a = find_automorphism(g, r, v, search)
            if a is not None:
                for x in range(g.n):
                    ds.union(x, int(a[x]))
                merged = True
                break
        if not merged:
            reps.append(v)
    orbits = [tuple(c) for c in ds.classes()]
    return len(orbits) == 1, orbits


@dataclass
class ParityReport:
    """Which automorphisms stabilizing a K_{p,q} copy fix one of its vertices."""

    stabilizing: int
    fixing: int
    per_automorphism: list[tuple[tuple[int, ...], bool]]

    @property
    def all_fix(self) -> bool:
        return self.fixing == self.stabilizing

    def to_dict(self) -> dict:
        return {"stabilizing": self.stabilizing, "fixing": self.fixing, "all_fix": self.all_fix,
                "per_automorphism": [[list(p), f] for p, f in self.per_automorphism]}


def fixed_vertex_parity_check(g: Graph, class_p, class_q, cap: int = 16) -> ParityReport:
    """For every automorphism mapping ``class_p | class_q`` onto itself,
    record whether it fixes a vertex of that set."""
    P, Q = {int(x) for x in class_p}, {int(x) for x in class_q}
    if not (len(P) % 2 or len(Q) % 2):
        raise ValidationError("at least one class must have odd size")
    K = sorted(P | Q)
    rows = []
    for a in automorphism_group(g, cap=cap):
        if {int(a[x]) for x in K} != set(K):
            continue
        rows.append((tuple(int(x) for x in a), any(int(a[x]) == x for x in K)))
    return ParityReport(len(rows), sum(f for _, f in rows), rows)
