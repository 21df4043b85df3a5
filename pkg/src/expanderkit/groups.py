"""Finite groups given by generators: SL_d(Z/nZ) matrices and cyclic groups.

Groups are enumerated by breadth-first closure from the identity, applying
generators on the right in their listed order. That order fixes the vertex
numbering of every Cayley graph built here, so all downstream reports are
reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ResourceError, ValidationError
from .graph import Graph, build_graph

__all__ = [
    "DEFAULT_GROUP_CAP",
    "ModMatrix",
    "FiniteGroup",
    "GroupAction",
    "OrbitData",
    "KazhdanStructure",
    "ReductionHom",
    "sl_generators",
    "sl_order",
    "enumerate_group",
    "cyclic_group",
    "parse_group_spec",
    "cayley_graph",
    "reduction_hom",
    "left_translation_action",
    "action_from_permutations",
    "is_automorphism",
    "orbits_and_stabilizers",
    "kazhdan_structure",
]

DEFAULT_GROUP_CAP = 2_000_000


@dataclass(frozen=True)
class ModMatrix:
    """Square integer matrix with entries reduced mod ``modulus``."""

    modulus: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.modulus < 2:
            raise ValidationError(f"modulus must be >= 2, got {self.modulus}")
        d = len(self.entries)
        if any(len(r) != d for r in self.entries):
            raise ValidationError("ModMatrix entries must be square")
        red = tuple(tuple(int(x) % self.modulus for x in r) for r in self.entries)
        object.__setattr__(self, "entries", red)

    @classmethod
    def from_array(cls, a, modulus: int) -> "ModMatrix":
        return cls(modulus, tuple(tuple(int(x) for x in row) for row in np.asarray(a)))

    @classmethod
    def identity(cls, dim: int, modulus: int) -> "ModMatrix":
        return cls.from_array(np.eye(dim, dtype=np.int64), modulus)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        if other.modulus != self.modulus:
            raise ValidationError("moduli differ")
        return ModMatrix.from_array(self.to_array() @ other.to_array(), self.modulus)

    def det(self) -> int:
        return int(_det(self.to_array()[None])[0]) % self.modulus

    def inverse(self) -> "ModMatrix":
        det = self.det()
        try:
            dinv = pow(det, -1, self.modulus)
        except ValueError:
            raise ValidationError(f"matrix not invertible mod {self.modulus}") from None
        return ModMatrix.from_array(_adjugate(self.to_array()[None])[0] * dinv, self.modulus)

    def reduce(self, m: int) -> "ModMatrix":
        return ModMatrix(m, self.entries)

    @property
    def is_identity(self) -> bool:
        return self == ModMatrix.identity(self.dim, self.modulus)

    def label(self) -> str:
        return "[" + ",".join(str(x) for r in self.entries for x in r) + "]"


def _det(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    if d == 1:
        return a[:, 0, 0]
    if d == 2:
        return a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    if d == 3:
        return (
            a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
            - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
            + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0])
        )
    raise ValidationError(f"matrix dimension {d} unsupported (1..3)")


def _adjugate(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    if d == 1:
        return np.ones_like(a)
    out = np.empty_like(a)
    for i in range(d):
        for j in range(d):
            minor = np.delete(np.delete(a, i, axis=1), j, axis=2)
            out[:, j, i] = (-1) ** (i + j) * _det(minor)
    return out


@dataclass(eq=False)
class FiniteGroup:
    """An enumerated finite group.

    Attributes
    ----------
    kind : {"matrix", "cyclic"}
    modulus : int
    dim : int
        Matrix dimension (0 for cyclic groups).
    elements : ndarray
        ``(N, dim, dim)`` residues, or ``(N,)`` residues for cyclic groups.
        Index 0 is the identity.
    generators : tuple of int
        Element indices of the generating set S, in order s_1, ..., s_|S|.
    """

    kind: str
    modulus: int
    dim: int
    elements: np.ndarray
    generators: tuple[int, ...]
    name: str = ""
    _codes: np.ndarray = field(init=False, repr=False)
    _sorter: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._codes = self.encode(self.elements)
        self._sorter = np.argsort(self._codes, kind="stable")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.order

    def encode(self, arr: np.ndarray) -> np.ndarray:
        return _encode(self.kind, self.modulus, arr)

    def index_of(self, arr: np.ndarray) -> np.ndarray:
        """Indices of the given raw elements; raises if any is missing."""
        codes = self.encode(arr)
        sc = self._codes[self._sorter]
        pos = np.searchsorted(sc, codes)
        pos = np.minimum(pos, len(sc) - 1)
        found = sc[pos] == codes
        if not found.all():
            raise ValidationError("element not in group")
        return self._sorter[pos]

    def mul(self, i, j) -> np.ndarray:
        """Indices of products ``elements[i] * elements[j]`` (broadcasting)."""
        i, j = np.broadcast_arrays(np.asarray(i), np.asarray(j))
        shape = i.shape
        a, b = self.elements[i.reshape(-1)], self.elements[j.reshape(-1)]
        prod = (a + b) if self.kind == "cyclic" else np.matmul(a, b)
        return self.index_of(prod % self.modulus).reshape(shape)

    def inv(self, i) -> np.ndarray:
        i = np.asarray(i)
        a = self.elements[i.reshape(-1)]
        if self.kind == "cyclic":
            raw = -a
        else:
            dets = _det(a) % self.modulus
            dinv = np.array([pow(int(x), -1, self.modulus) for x in dets], dtype=np.int64)
            raw = _adjugate(a) * dinv[:, None, None]
        return self.index_of(raw % self.modulus).reshape(i.shape)

    def element(self, i: int):
        if self.kind == "cyclic":
            return int(self.elements[i])
        return ModMatrix.from_array(self.elements[i], self.modulus)

    def label(self, i: int) -> str:
        if self.kind == "cyclic":
            return str(int(self.elements[i]))
        return "[" + ",".join(str(int(x)) for x in self.elements[i].reshape(-1)) + "]"

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(self.order)]

    def is_symmetric(self) -> bool:
        gens = set(self.generators)
        return all(int(self.inv(s)) in gens for s in self.generators)


# -- construction -------------------------------------------------------------


def sl_generators(dim: int, modulus: int) -> list[ModMatrix]:
    """Symmetric elementary generating set of SL_dim(Z/modulus).

    For ``dim == 2`` this is ``[A, A^-1, B, B^-1]`` with A upper and B lower
    unitriangular. For ``dim == 3`` it is the transvections ``e_ij(+1),
    e_ij(-1)`` for the cyclic pattern ``(i, j) in {(0,1), (1,2), (2,0)}``.
    Entries collapsing under reduction are dropped with a warning.
    """
    if dim not in (2, 3):
        raise ValidationError(f"sl_generators supports dim 2 or 3, got {dim}")
    if modulus < 2:
        raise ValidationError(f"modulus must be >= 2, got {modulus}")
    pairs = [(0, 1), (1, 0)] if dim == 2 else [(0, 1), (1, 2), (2, 0)]
    gens = []
    for i, j in pairs:
        for sign in (1, -1):
            e = np.eye(dim, dtype=np.int64)
            e[i, j] = sign
            gens.append(ModMatrix.from_array(e, modulus))
    return _dedup_generators(gens)


def _dedup_generators(gens: Sequence) -> list:
    out = []
    for g in gens:
        is_id = g.is_identity if isinstance(g, ModMatrix) else g == 0
        if is_id:
            warnings.warn(f"generator {g} reduces to the identity; dropped", stacklevel=3)
            continue
        if g in out:
            warnings.warn(f"duplicate generator {g}; dropped", stacklevel=3)
            continue
        out.append(g)
    return out


def _sl_prime_order(dim: int, p: int) -> int:
    out = p ** (dim * (dim - 1) // 2)
    for i in range(2, dim + 1):
        out *= p**i - 1
    return out


def _factor(n: int) -> dict[int, int]:
    f: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            f[d] = f.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        f[n] = f.get(n, 0) + 1
    return f


def sl_order(dim: int, n: int) -> int:
    """Closed-form order of SL_dim(Z/n), used to refuse oversize builds early."""
    out = 1
    for p, k in _factor(n).items():
        out *= p ** ((dim * dim - 1) * (k - 1)) * _sl_prime_order(dim, p)
    return out


def _encode(kind: str, modulus: int, arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64) % modulus
    if kind == "cyclic":
        return arr.reshape(-1)
    flat = arr.reshape(len(arr), -1)
    weights = modulus ** np.arange(flat.shape[1], dtype=np.int64)
    return flat @ weights


def _bfs_closure(kind: str, modulus: int, identity: np.ndarray, gens: np.ndarray, cap: int) -> np.ndarray:
    """Breadth-first closure; generator-index tie-breaking, vectorized per level."""
    seen_codes = _encode(kind, modulus, identity[None])
    seen_sorted = np.sort(seen_codes)
    found = [identity[None]]
    frontier = identity[None]
    total = 1
    while len(frontier):
        if kind == "cyclic":
            prods = (frontier[:, None] + gens[None, :]) % modulus
            prods = prods.reshape(-1)
        else:
            prods = np.matmul(frontier[:, None], gens[None]) % modulus
            prods = prods.reshape(-1, *identity.shape)
        codes = _encode(kind, modulus, prods)
        _, first = np.unique(codes, return_index=True)
        first.sort()
        cand, ccodes = prods[first], codes[first]
        pos = np.searchsorted(seen_sorted, ccodes)
        pos = np.minimum(pos, len(seen_sorted) - 1)
        new = seen_sorted[pos] != ccodes
        frontier = cand[new]
        total += len(frontier)
        if total > cap:
            raise ResourceError(f"group closure exceeded cap of {cap} elements")
        if len(frontier):
            found.append(frontier)
            seen_sorted = np.sort(np.concatenate([seen_sorted, ccodes[new]]))
    return np.concatenate(found)


def enumerate_group(gens: Sequence[ModMatrix], cap: int = DEFAULT_GROUP_CAP, name: str = "") -> FiniteGroup:
    """Enumerate the matrix group generated by ``gens`` (BFS from the identity)."""
    gens = _dedup_generators(list(gens))
    if not gens:
        raise ValidationError("need at least one non-identity generator")
    modulus, dim = gens[0].modulus, gens[0].dim
    if any(g.modulus != modulus or g.dim != dim for g in gens):
        raise ValidationError("generators must share modulus and dimension")
    if dim > 3 or modulus ** (dim * dim) >= 2**62:
        raise ValidationError(f"dim={dim}, modulus={modulus} too large for element encoding")
    for g in gens:
        if math.gcd(g.det(), modulus) != 1:
            raise ValidationError(f"generator {g.label()} is not invertible mod {modulus}")
    ident = np.eye(dim, dtype=np.int64)
    garr = np.stack([g.to_array() for g in gens])
    elems = _bfs_closure("matrix", modulus, ident, garr, cap)
    grp = FiniteGroup("matrix", modulus, dim, elems, (), name)
    grp.generators = tuple(int(i) for i in grp.index_of(garr))
    return grp


def cyclic_group(n: int, gens: Sequence[int] = (1, -1), cap: int = DEFAULT_GROUP_CAP) -> FiniteGroup:
    """Z/n (or the subgroup generated by ``gens``) with generating set ``gens``."""
    if n < 2:
        raise ValidationError(f"cyclic group needs n >= 2, got {n}")
    g = _dedup_generators([int(x) % n for x in gens])
    if not g:
        raise ValidationError("need at least one non-identity generator")
    elems = _bfs_closure("cyclic", n, np.array(0, dtype=np.int64), np.array(g, dtype=np.int64), cap)
    grp = FiniteGroup("cyclic", n, 0, elems, (), f"Z/{n}")
    grp.generators = tuple(int(i) for i in grp.index_of(np.array(g)))
    return grp


def parse_group_spec(spec: str, cap: int = DEFAULT_GROUP_CAP) -> FiniteGroup:
    """Parse ``sl:<dim>:<modulus>``, ``cyclic:<n>`` or ``cyclic:<n>:<s1>,<s2>,...``."""
    parts = spec.split(":")
    try:
        if parts[0] == "sl" and len(parts) == 3:
            dim, mod = int(parts[1]), int(parts[2])
            if sl_order(dim, mod) > cap:
                raise ResourceError(f"|SL_{dim}(Z/{mod})| = {sl_order(dim, mod)} exceeds cap {cap}")
            return enumerate_group(sl_generators(dim, mod), cap=cap, name=f"SL{dim}(Z/{mod})")
        if parts[0] == "cyclic" and len(parts) in (2, 3):
            n = int(parts[1])
            gens = [int(x) for x in parts[2].split(",")] if len(parts) == 3 else [1, -1]
            return cyclic_group(n, gens, cap=cap)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad group spec {spec!r}: {exc}") from exc
    raise ValidationError(f"bad group spec {spec!r}; expected sl:<dim>:<n> or cyclic:<n>[:gens]")


def cayley_graph(group: FiniteGroup) -> tuple[Graph, list[str]]:
    """Right Cayley graph: vertex per element, edge ``{g, g s}`` for s in S.

    Returns the graph and the vertex labels (element strings).
    """
    if not group.is_symmetric():
        raise ValidationError("generating set is not symmetric (s in S must imply s^-1 in S)")
    if 0 in group.generators:
        raise ValidationError("identity must not be a generator")
    idx = np.arange(group.order)
    cols = [group.mul(idx, np.full_like(idx, s)) for s in group.generators]
    edges = [(int(u), int(v)) for c in cols for u, v in zip(idx, c)]
    g = build_graph(group.order, edges, name=f"Cay({group.name or group.kind})")
    return g, group.labels()


@dataclass
class ReductionHom:
    """Entrywise reduction SL_dim(Z/n) -> SL_dim(Z/m)."""

    source: FiniteGroup
    target: FiniteGroup
    image: np.ndarray
    kernel: np.ndarray
    collapsed: list[tuple[str, str]]

    @property
    def kernel_size(self) -> int:
        return len(self.kernel)


def reduction_hom(dim: int, n: int, m: int, cap: int = DEFAULT_GROUP_CAP) -> ReductionHom:
    """Reduction map between SL groups; the target uses the reduced generators.

    ``collapsed`` lists generator pairs of the source that become equal (or
    trivial) mod ``m``.
    """
    if m < 2 or m >= n or n % m:
        raise ValidationError(f"reduction needs 2 <= m < n with m | n, got n={n}, m={m}")
    for mod in (n, m):
        if sl_order(dim, mod) > cap:
            raise ResourceError(f"|SL_{dim}(Z/{mod})| = {sl_order(dim, mod)} exceeds cap {cap}")
    src_gens = sl_generators(dim, n)
    src = enumerate_group(src_gens, cap=cap, name=f"SL{dim}(Z/{n})")
    collapsed = []
    reduced = [g.reduce(m) for g in src_gens]
    for a in range(len(reduced)):
        if reduced[a].is_identity:
            collapsed.append((src_gens[a].label(), "identity"))
        for b in range(a + 1, len(reduced)):
            if reduced[a] == reduced[b]:
                collapsed.append((src_gens[a].label(), src_gens[b].label()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tgt = enumerate_group(reduced, cap=cap, name=f"SL{dim}(Z/{m})")
    image = tgt.index_of(src.elements % m)
    return ReductionHom(src, tgt, image, np.flatnonzero(image == 0), collapsed)


# -- actions ------------------------------------------------------------------


def is_automorphism(g: Graph, perm: np.ndarray) -> bool:
    """Edge-by-edge check that ``perm`` is a bijective graph automorphism."""
    perm = np.asarray(perm)
    if perm.shape != (g.n,) or len(np.unique(perm)) != g.n:
        return False
    if g.m == 0:
        return True
    e = g.edge_array
    a, b = perm[e[:, 0]], perm[e[:, 1]]
    codes = np.minimum(a, b) * g.n + np.maximum(a, b)
    ref = e[:, 0] * g.n + e[:, 1]
    return bool(np.isin(codes, ref).all())


@dataclass
class GroupAction:
    """A finite group acting on a graph's vertices by automorphisms.

    ``perms[k]`` is the vertex permutation of the k-th acting element;
    ``element_ids[k]`` is that element's index in ``group`` when known.
    """

    graph: Graph
    perms: np.ndarray
    group: FiniteGroup | None = None
    element_ids: np.ndarray | None = None

    @property
    def order(self) -> int:
        return len(self.perms)


def action_from_permutations(graph: Graph, perms, check: bool = True) -> GroupAction:
    perms = np.asarray(perms, dtype=np.int64).reshape(-1, graph.n)
    if check:
        for k, p in enumerate(perms):
            if not is_automorphism(graph, p):
                raise ValidationError(f"permutation {k} is not an automorphism")
    return GroupAction(graph, perms)


def left_translation_action(group: FiniteGroup, cayley: Graph, elements=None) -> GroupAction:
    """Left multiplication ``x -> g x`` on a Cayley graph of ``group``.

    ``elements`` restricts to a subset (e.g. a subgroup such as a reduction
    kernel); the default is the whole group.
    """
    if cayley.n != group.order:
        raise ValidationError(f"graph has {cayley.n} vertices but group has order {group.order}")
    elements = np.arange(group.order) if elements is None else np.asarray(elements, dtype=np.int64)
    idx = np.arange(group.order)
    perms = group.mul(elements[:, None], idx[None, :])
    for k in range(min(len(perms), 2)):
        if not is_automorphism(cayley, perms[-1 - k]):
            raise ValidationError("left translation is not an automorphism; graph/group mismatch")
    return GroupAction(cayley, perms, group, elements)


@dataclass
class OrbitData:
    representatives: tuple[int, ...]
    orbit_index: np.ndarray
    orbits: list[tuple[int, ...]]
    stabilizer_sizes: np.ndarray


def orbits_and_stabilizers(action: GroupAction) -> OrbitData:
    """Orbit representatives (smallest index per orbit) and stabilizer sizes.

    Assumes ``action.perms`` lists every element of the acting group, so that
    the orbit of ``v`` is the column ``perms[:, v]``.
    """
    n = action.graph.n
    orbit_index = np.full(n, -1, dtype=np.int64)
    orbits = []
    for v in range(n):
        if orbit_index[v] >= 0:
            continue
        orb = tuple(sorted({int(x) for x in action.perms[:, v]}))
        orbit_index[list(orb)] = len(orbits)
        orbits.append(orb)
    stab = (action.perms == np.arange(n)[None, :]).sum(axis=0)
    for orb in orbits:
        if len(orb) * stab[orb[0]] != action.order:
            raise ValidationError("orbit-stabilizer check failed; perms do not form a group action")
    return OrbitData(tuple(o[0] for o in orbits), orbit_index, orbits, stab)


@dataclass
class KazhdanStructure:
    """Metadata for a pair (graph, acting group).

    Property (T) of the acting group cannot be decided here; it is carried
    as the user-supplied ``assumed_kazhdan`` flag.
    """

    action: GroupAction
    assumed_kazhdan: bool
    orbit_count: int
    max_stabilizer: int
    regular_degree: int | None

    @property
    def finite_orbit_space(self) -> bool:
        return self.orbit_count < math.inf


def kazhdan_structure(action: GroupAction, assumed_kazhdan: bool = False) -> KazhdanStructure:
    degs = set(action.graph.degrees.tolist())
    od = orbits_and_stabilizers(action)
    return KazhdanStructure(
        action,
        assumed_kazhdan,
        len(od.representatives),
        int(od.stabilizer_sizes.max()) if len(od.stabilizer_sizes) else 0,
        degs.pop() if len(degs) == 1 else None,
    )
