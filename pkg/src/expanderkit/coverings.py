"""Covering maps between finite graphs, deck groups and orbit quotients."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .graph import Graph, build_graph
from .groups import (
    DEFAULT_GROUP_CAP,
    GroupAction,
    ReductionHom,
    cayley_graph,
    is_automorphism,
    orbits_and_stabilizers,
    reduction_hom,
)

__all__ = [
    "Violation",
    "CoveringMap",
    "DeckGroup",
    "QuotientResult",
    "ReductionCover",
    "verify_cover",
    "deck_group",
    "deck_action",
    "quotient_graph",
    "quotient_cover_from_reduction",
    "orbit_map_isomorphism",
]


@dataclass
class Violation:
    """First failure found while checking a candidate covering map."""

    kind: str
    vertex: int
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "vertex": self.vertex, "detail": self.detail}


@dataclass
class CoveringMap:
    source: Graph
    target: Graph
    vmap: np.ndarray
    verified: bool
    violation: Violation | None = None
    fibers: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def fiber_sizes(self) -> set[int]:
        return {len(f) for f in self.fibers.values()}

    @property
    def fiber_size(self) -> int | None:
        sizes = self.fiber_sizes
        return sizes.pop() if len(sizes) == 1 else None

    def to_dict(self) -> dict:
        return {
            "source": self.source.name,
            "target": self.target.name,
            "vmap": [int(x) for x in self.vmap],
            "verified": self.verified,
            "fiber_size": self.fiber_size,
            "violation": self.violation.to_dict() if self.violation else None,
        }


def verify_cover(source: Graph, target: Graph, vmap) -> CoveringMap:
    """Check that ``vmap`` restricts to a bijection from each neighborhood
    ``N(u)`` onto ``N(vmap[u])``.

    Failures are returned in ``violation`` (never raised). Checks run per
    source vertex in index order: injectivity on the neighborhood, then
    adjacency preservation, then surjectivity onto the target neighborhood.
    """
    vmap = np.asarray(vmap, dtype=np.int64).reshape(-1)
    fibers: dict[int, list[int]] = {}

    def fail(kind, u, detail):
        return CoveringMap(source, target, vmap, False, Violation(kind, int(u), detail),
                           {k: tuple(v) for k, v in fibers.items()})

    if len(vmap) != source.n:
        return fail("map_not_total", -1, f"map has {len(vmap)} entries for {source.n} source vertices")
    if source.n and (vmap.min() < 0 or vmap.max() >= target.n):
        bad = int(np.flatnonzero((vmap < 0) | (vmap >= target.n))[0])
        return fail("out_of_range", bad, f"image {int(vmap[bad])} outside target")
    for u in range(source.n):
        fibers.setdefault(int(vmap[u]), []).append(u)
    for u in range(source.n):
        pu = int(vmap[u])
        imgs = [int(vmap[w]) for w in source.adjacency[u]]
        if len(set(imgs)) != len(imgs):
            return fail("neighborhood_not_injective", u,
                        f"neighbors {list(source.adjacency[u])} map to {imgs}")
        tn = set(target.adjacency[pu])
        for w, pw in zip(source.adjacency[u], imgs):
            if pw not in tn:
                return fail("edge_not_preserved", u, f"edge ({u},{w}) maps to non-edge ({pu},{pw})")
        if len(imgs) != len(tn):
            missing = sorted(tn - set(imgs))
            return fail("neighborhood_not_surjective", u, f"target neighbors {missing} of {pu} not hit")
    if len(fibers) != target.n:
        missing = sorted(set(range(target.n)) - set(fibers))
        return fail("not_surjective", -1, f"target vertices {missing[:10]} have empty fibers")
    return CoveringMap(source, target, vmap, True, None, {k: tuple(v) for k, v in sorted(fibers.items())})


@dataclass
class DeckGroup:
    """Deck transformations of a cover; ``perms[0]`` is the identity."""

    covering: CoveringMap
    perms: np.ndarray

    @property
    def order(self) -> int:
        return len(self.perms)

    def acts_freely(self) -> bool:
        ident = np.arange(self.covering.source.n)
        return all(not np.any(p == ident) for p in self.perms[1:])


def deck_group(cov: CoveringMap, basepoint: int = 0) -> DeckGroup:
    """All automorphisms ``a`` of the source with ``p o a = p``.

    A deck map of a connected cover is determined by the image of one
    basepoint. Each vertex of the basepoint's fiber is tried as that image and
    the map is extended along a BFS, lifting each edge through the unique
    neighbor with the required projection.
    """
    if not cov.verified:
        raise ValidationError("deck_group needs a verified covering map")
    src = cov.source
    if not src.is_connected:
        raise ValidationError("deck_group needs a connected source graph")
    p = cov.vmap
    # lift[x][t] = neighbor of x projecting to target vertex t
    lift = [{int(p[w]): w for w in src.adjacency[x]} for x in range(src.n)]
    perms = []
    for y in cov.fibers[int(p[basepoint])]:
        alpha = _extend(src, lift, p, basepoint, y)
        if alpha is not None and is_automorphism(src, alpha) and np.array_equal(p[alpha], p):
            perms.append(alpha)
    perms.sort(key=lambda a: (int(a[basepoint] != basepoint), int(a[basepoint])))
    return DeckGroup(cov, np.array(perms, dtype=np.int64))


def _extend(src: Graph, lift, p, x0: int, y0: int) -> np.ndarray | None:
    alpha = np.full(src.n, -1, dtype=np.int64)
    alpha[x0] = y0
    queue = deque([x0])
    while queue:
        u = queue.popleft()
        for w in src.adjacency[u]:
            img = lift[alpha[u]].get(int(p[w]))
            if img is None:
                return None
            if alpha[w] < 0:
                alpha[w] = img
                queue.append(w)
            elif alpha[w] != img:
                return None
    if (alpha < 0).any() or len(np.unique(alpha)) != src.n:
        return None
    return alpha


def deck_action(deck: DeckGroup) -> GroupAction:
    return GroupAction(deck.covering.source, deck.perms)


@dataclass
class QuotientResult:
    graph: Graph
    projection: np.ndarray
    is_cover: bool
    cover: CoveringMap
    fold_count: int
    parallel_count: int

    def to_dict(self) -> dict:
        return {
            "n": self.graph.n,
            "edges": [list(e) for e in self.graph.edges],
            "projection": [int(x) for x in self.projection],
            "is_cover": self.is_cover,
            "fold_count": self.fold_count,
            "parallel_count": self.parallel_count,
            "violation": self.cover.violation.to_dict() if self.cover.violation else None,
        }


def quotient_graph(g: Graph, action: GroupAction) -> QuotientResult:
    """Orbit graph of ``g`` under ``action`` (simple), plus whether the
    orbit projection is a covering map.

    ``fold_count`` counts edges inside a single orbit (dropped);
    ``parallel_count`` counts, per orbit representative, neighbors beyond the
    first that land in the same neighboring orbit (collapsed).
    """
    od = orbits_and_stabilizers(action)
    proj = od.orbit_index
    edges = set()
    fold = 0
    for u, v in g.edges:
        a, b = int(proj[u]), int(proj[v])
        if a == b:
            fold += 1
        else:
            edges.add((min(a, b), max(a, b)))
    parallel = 0
    for r in od.representatives:
        seen: dict[int, int] = {}
        for w in g.adjacency[r]:
            o = int(proj[w])
            if o != proj[r]:
                seen[o] = seen.get(o, 0) + 1
        parallel += sum(c - 1 for c in seen.values())
    q = build_graph(len(od.representatives), edges, name=f"{g.name}/G")
    cov = verify_cover(g, q, proj)
    return QuotientResult(q, proj, cov.verified, cov, fold, parallel)


@dataclass
class ReductionCover:
    """Cayley-graph cover induced by entrywise reduction mod m."""

    hom: ReductionHom
    cover: CoveringMap
    degenerate: bool
    collapsed: list[tuple[str, str]]

    def to_dict(self) -> dict:
        d = self.cover.to_dict()
        d.update({"degenerate": self.degenerate, "collapsed": [list(c) for c in self.collapsed],
                  "kernel_size": self.hom.kernel_size})
        return d


def quotient_cover_from_reduction(dim: int, n: int, m: int, cap: int = DEFAULT_GROUP_CAP) -> ReductionCover:
    """Cay(SL_dim(Z/n)) -> Cay(SL_dim(Z/m)) induced by reducing entries.

    Generators collapsing mod m are reported in ``collapsed`` and mark the
    result ``degenerate``; the cover is still verified and the honest
    outcome returned.
    """
    hom = reduction_hom(dim, n, m, cap=cap)
    src, _ = cayley_graph(hom.source)
    tgt, _ = cayley_graph(hom.target)
    src = src.with_name(f"Cay(SL{dim}(Z/{n}))")
    tgt = tgt.with_name(f"Cay(SL{dim}(Z/{m}))")
    cov = verify_cover(src, tgt, hom.image)
    return ReductionCover(hom, cov, bool(hom.collapsed), hom.collapsed)


def orbit_map_isomorphism(quotient: QuotientResult, cov: CoveringMap) -> bool:
    """True when ``orbit -> p(orbit representative)`` is a graph isomorphism
    from the quotient onto the cover's target."""
    q = quotient.graph
    if q.n != cov.target.n:
        return False
    phi = np.full(q.n, -1, dtype=np.int64)
    for v in range(cov.source.n):
        o = int(quotient.projection[v])
        t = int(cov.vmap[v])
        if phi[o] < 0:
            phi[o] = t
        elif phi[o] != t:
            return False
    if len(np.unique(phi)) != q.n:
        return False
    mapped = {(min(int(phi[a]), int(phi[b])), max(int(phi[a]), int(phi[b]))) for a, b in q.edges}
    return mapped == set(cov.target.edges)
