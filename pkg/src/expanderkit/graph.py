"""Finite simple undirected graphs on dense integer vertices.

A :class:`Graph` is immutable. Vertices are ``0..n-1``; any richer labels
(group elements, replacement slots) are kept in side maps by the module that
produced the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .exceptions import ValidationError

__all__ = [
    "Graph",
    "build_graph",
    "as_vertex_set",
    "degree_profile",
    "boundary",
    "edge_cut",
    "bfs_metric",
    "generate",
    "cycle",
    "path",
    "complete",
    "complete_bipartite",
    "torus",
    "tree_ball",
    "petersen",
    "disjoint_union",
    "induced_subgraph",
    "ball",
    "is_bipartite",
    "to_edge_list",
    "parse_edge_list",
    "read_edge_list",
    "write_edge_list",
    "to_dot",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with sorted adjacency lists.

    Use :func:`build_graph` rather than the constructor; it normalizes and
    validates the edge list.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    name: str = ""

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __len__(self) -> int:
        return self.n

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    @cached_property
    def sparse_adjacency(self) -> csr_matrix:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs edge-path distances; ``np.inf`` across components."""
        if self.n == 0:
            return np.zeros((0, 0))
        d = shortest_path(self.sparse_adjacency, method="D", unweighted=True, directed=False)
        d.setflags(write=False)
        return d

    @cached_property
    def n_components(self) -> int:
        if self.n == 0:
            return 0
        return int(connected_components(self.sparse_adjacency, directed=False)[0])

    @property
    def is_connected(self) -> bool:
        return self.n_components == 1

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.adjacency[u]
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v

    def neighbor_masks(self) -> list[int]:
        """Bitmask of each vertex's neighborhood (Python ints, any n)."""
        return [sum(1 << w for w in nb) for nb in self.adjacency]

    def with_name(self, name: str) -> "Graph":
        return Graph(self.n, self.edges, self.adjacency, name)


def build_graph(n: int, edges: Iterable[Sequence[int]], name: str = "") -> Graph:
    """Normalize, deduplicate and validate an edge list.

    Raises
    ------
    ValidationError
        On loops or out-of-range endpoints.
    """
    if n < 0:
        raise ValidationError(f"vertex count must be non-negative, got {n}")
    norm = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise ValidationError(f"loop edge ({u},{u}) not allowed in a simple graph")
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"edge ({u},{v}) out of range for n={n}")
        norm.add((u, v) if u < v else (v, u))
    es = tuple(sorted(norm))
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in es:
        adj[u].append(v)
        adj[v].append(u)
    return Graph(n, es, tuple(tuple(sorted(a)) for a in adj), name)


def as_vertex_set(g: Graph, A: Iterable[int]) -> tuple[int, ...]:
    """Sorted, deduplicated vertex tuple; validates the range."""
    s = sorted({int(a) for a in A})
    if s and (s[0] < 0 or s[-1] >= g.n):
        raise ValidationError(f"vertex set {s} not within 0..{g.n - 1}")
    return tuple(s)


def degree_profile(g: Graph) -> tuple[bool, int | None, list[int]]:
    """Return ``(is_regular, k, sorted degree sequence)``; ``k`` is None unless regular."""
    seq = sorted(int(d) for d in g.degrees)
    regular = len(set(seq)) <= 1 and g.n > 0
    return regular, (seq[0] if regular else None), seq


def boundary(g: Graph, A: Iterable[int]) -> tuple[int, ...]:
    """Vertices outside ``A`` at distance exactly one from ``A``."""
    a = set(as_vertex_set(g, A))
    out = set()
    for u in a:
        out.update(w for w in g.adjacency[u] if w not in a)
    return tuple(sorted(out))


def edge_cut(g: Graph, A: Iterable[int], B: Iterable[int]) -> int:
    """Number of edges with one endpoint in ``A`` and the other in ``B``."""
    a = set(as_vertex_set(g, A))
    b = set(as_vertex_set(g, B))
    if a & b:
        raise ValidationError(f"edge_cut needs disjoint sets; overlap {sorted(a & b)}")
    return sum(1 for u in a for w in g.adjacency[u] if w in b)


def bfs_metric(g: Graph) -> np.ndarray:
    """Shortest-path distance matrix (float; ``np.inf`` between components)."""
    return g.distances


def is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    stack.append(w)
                elif color[w] == color[u]:
                    return False
    return True


# -- generators ---------------------------------------------------------------


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValidationError(f"cycle needs n >= 3, got {n}")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path(n: int) -> Graph:
    if n < 1:
        raise ValidationError(f"path needs n >= 1, got {n}")
    return build_graph(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def complete(n: int) -> Graph:
    if n < 1:
        raise ValidationError(f"complete graph needs n >= 1, got {n}")
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)], name=f"K{n}")


def complete_bipartite(p: int, q: int) -> Graph:
    """K_{p,q}; class p is ``0..p-1`` and class q is ``p..p+q-1``."""
    if p < 1 or q < 1:
        raise ValidationError(f"complete_bipartite needs p, q >= 1, got {p}, {q}")
    return build_graph(p + q, [(i, p + j) for i in range(p) for j in range(q)], name=f"K{p},{q}")


def torus(a: int, b: int) -> Graph:
    """Cartesian product C_a x C_b; vertex ``(i, j)`` is ``i*b + j``."""
    if a < 3 or b < 3:
        raise ValidationError(f"torus sides must be >= 3 to stay simple, got {a}x{b}")
    edges = []
    for i in range(a):
        for j in range(b):
            v = i * b + j
            edges.append((v, ((i + 1) % a) * b + j))
            edges.append((v, i * b + (j + 1) % b))
    return build_graph(a * b, edges, name=f"C{a}xC{b}")


def tree_ball(k: int, r: int) -> Graph:
    """Radius-``r`` ball around a vertex of the ``k``-regular tree (BFS numbering)."""
    if k < 1 or r < 0:
        raise ValidationError(f"tree_ball needs k >= 1 and r >= 0, got k={k}, r={r}")
    edges = []
    frontier = [0]
    nxt = 1
    for depth in range(r):
        new = []
        for u in frontier:
            for _ in range(k if depth == 0 else k - 1):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return build_graph(nxt, edges, name=f"T{k}-ball{r}")


def petersen() -> Graph:
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))
        edges.append((i, i + 5))
        edges.append((5 + i, 5 + (i + 2) % 5))
    return build_graph(10, edges, name="Petersen")


def generate(kind: str, *params: int) -> Graph:
    """Dispatch on a generator name: cycle, path, complete, complete_bipartite,
    torus, tree_ball, petersen."""
    table = {
        "cycle": cycle,
        "path": path,
        "complete": complete,
        "complete_bipartite": complete_bipartite,
        "kpq": complete_bipartite,
        "torus": torus,
        "tree_ball": tree_ball,
        "tree-ball": tree_ball,
        "petersen": petersen,
    }
    try:
        fn = table[kind]
    except KeyError:
        raise ValidationError(f"unknown graph kind {kind!r}") from None
    try:
        return fn(*params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {params}") from exc


def disjoint_union(*graphs: Graph) -> Graph:
    edges = []
    off = 0
    for g in graphs:
        edges.extend((u + off, v + off) for u, v in g.edges)
        off += g.n
    return build_graph(off, edges, name="+".join(g.name for g in graphs))


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Induced subgraph relabeled to ``0..len-1``; returns it with the old labels."""
    vs = as_vertex_set(g, vertices)
    pos = {v: i for i, v in enumerate(vs)}
    edges = [(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos]
    return build_graph(len(vs), edges, name=f"{g.name}[{len(vs)}]"), vs


def ball(g: Graph, center: int, radius: int) -> tuple[int, ...]:
    """Vertices at distance at most ``radius`` from ``center``."""
    return tuple(int(v) for v in np.flatnonzero(g.distances[center] <= radius))


# -- text formats -------------------------------------------------------------


def to_edge_list(g: Graph) -> str:
    """Canonical edge-list text: ``n m`` header then one ``u v`` per line."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, name: str = "") -> Graph:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split())
    if not rows:
        raise ValidationError("empty edge list")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(r[0]), int(r[1])) for r in rows[1:]]
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"malformed edge list: {exc}") from exc
    if len(edges) != m:
        raise ValidationError(f"header declares {m} edges, found {len(edges)}")
    for u, v in edges:
        if not u < v:
            raise ValidationError(f"edge ({u},{v}) must satisfy u < v in canonical form")
    return build_graph(n, edges, name=name)


def read_edge_list(path: str) -> Graph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_edge_list(text, name=str(path))


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_edge_list(g))


def to_dot(g: Graph) -> str:
    body = "".join(f"  {u} -- {v};\n" for u, v in g.edges)
    isolated = "".join(f"  {v};\n" for v in range(g.n) if not g.adjacency[v])
    return "graph G {\n" + isolated + body + "}\n"
