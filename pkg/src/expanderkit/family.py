"""Families of regular graphs: uniform-gap and Cheeger verdicts, quotient
towers of congruence Cayley graphs, and cover-based Folner probes.

A family may carry a common covering graph ``source`` and, per member, a
covering map from it. The (tau)-style verdict needs both a uniform spectral
gap and a verified cover onto every member; families without covers only
get the uniform-gap verdict.
"""

from __future__ import annotations

import csv
import io
import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coverings import CoveringMap, deck_action, deck_group, orbit_map_isomorphism, quotient_graph, verify_cover
from .exceptions import ResourceError, ValidationError
from .graph import Graph, ball, boundary, edge_cut, generate, induced_subgraph, read_edge_list
from .groups import DEFAULT_GROUP_CAP, FiniteGroup, cayley_graph, enumerate_group, sl_generators, sl_order
from .spectra import EXACT_MAX_N, cheeger_bounds, cheeger_exact, expander_constant, folner_ratio, spectrum

__all__ = [
    "EPS1",
    "EPS2",
    "FamilyMember",
    "GraphFamily",
    "FamilyRow",
    "FamilyReport",
    "build_tower",
    "build_prime_family",
    "build_torus_family",
    "analyze_family",
    "tower_diagnostics",
    "folner_injection_probe",
    "load_manifest",
    "is_prime",
]

EPS1 = 0.05
EPS2 = 0.05
ROW_FIELDS = ("name", "n", "k", "lambda", "gap", "h_lo", "h_hi", "c", "cover_verified")


@dataclass
class FamilyMember:
    graph: Graph
    cover: CoveringMap | None = None
    group: FiniteGroup | None = None


@dataclass
class GraphFamily:
    members: list[FamilyMember]
    provenance: dict = field(default_factory=dict)
    source: Graph | None = None
    # covers between consecutive levels of a tower, (upper, lower, map)
    links: list[tuple[int, int, CoveringMap]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def graphs(self) -> list[Graph]:
        return [m.graph for m in self.members]

    @property
    def has_covers(self) -> bool:
        return any(m.cover is not None for m in self.members)

    def permuted(self, order) -> "GraphFamily":
        return GraphFamily([self.members[i] for i in order], dict(self.provenance), self.source, [])


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def _sl_member(dim: int, modulus: int, cap: int) -> FamilyMember:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grp = enumerate_group(sl_generators(dim, modulus), cap=cap, name=f"SL{dim}(Z/{modulus})")
    g, _ = cayley_graph(grp)
    return FamilyMember(g.with_name(f"Cay(SL{dim}(Z/{modulus}))"), None, grp)


def build_tower(dim: int, p: int, depth: int, cap: int = DEFAULT_GROUP_CAP) -> GraphFamily:
    """Cayley graphs of SL_dim(Z/p^k) for k = 1..depth.

    Reduction mod p^k gives a covering map from the top level onto every
    member (the top covers itself by the identity) and between consecutive
    levels. Collapsing generators are recorded under ``degenerate``.
    """
    if not is_prime(p):
        raise ValidationError(f"tower needs a prime, got {p}")
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    for k in range(1, depth + 1):
        order = sl_order(dim, p**k)
        if order > cap:
            raise ResourceError(f"tower level {k} (SL{dim}(Z/{p**k}), order {order}) exceeds group cap {cap}")
    members = [_sl_member(dim, p**k, cap) for k in range(1, depth + 1)]
    top = members[-1]
    degenerate = []
    for k in range(1, depth):
        upper = _quiet(sl_generators, dim, p ** (k + 1))
        lower = [g.reduce(p**k) for g in upper]
        labels = [g.label() for g in upper]
        for a in range(len(lower)):
            for b in range(a + 1, len(lower)):
                if lower[a] == lower[b]:
                    degenerate.append({"level": k + 1, "pair": [labels[a], labels[b]]})
    for k, m in enumerate(members, start=1):
        vmap = m.group.index_of(top.group.elements % p**k)
        m.cover = verify_cover(top.graph, m.graph, vmap)
    links = []
    for k in range(1, depth):
        up, low = members[k], members[k - 1]
        vmap = low.group.index_of(up.group.elements % p**k)
        links.append((k, k - 1, verify_cover(up.graph, low.graph, vmap)))
    prov = {"kind": "tower", "dim": dim, "prime": p, "depth": depth, "degenerate": degenerate,
            "trivial_deck_intersection": "not checked (finite family)"}
    return GraphFamily(members, prov, top.graph, links)


def _quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args)


def build_prime_family(dim: int, primes, cap: int = DEFAULT_GROUP_CAP) -> GraphFamily:
    """Cay(SL_dim(Z/p)) for each prime; no covers exist between members."""
    primes = [int(p) for p in primes]
    if not primes:
        raise ValidationError("need at least one prime")
    for p in primes:
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
        if sl_order(dim, p) > cap:
            raise ResourceError(f"|SL{dim}(Z/{p})| = {sl_order(dim, p)} exceeds group cap {cap}")
    members = [_sl_member(dim, p, cap) for p in primes]
    return GraphFamily(members, {"kind": "primes", "dim": dim, "primes": primes, "covers": "absent"})


def build_torus_family(sizes) -> GraphFamily:
    """Tori C_n x C_n; an amenable family without a uniform gap."""
    members = [FamilyMember(generate("torus", n, n)) for n in sizes]
    return GraphFamily(members, {"kind": "torus", "sizes": [int(n) for n in sizes]})


@dataclass
class FamilyRow:
    name: str
    n: int
    k: int
    lambda_: float
    gap: float
    h_lo: float
    h_hi: float | None
    c: float | None
    cover_verified: bool | None
    cheeger_method: str = "bounds"

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "k": self.k, "lambda": self.lambda_, "gap": self.gap,
                "h_lo": self.h_lo, "h_hi": self.h_hi, "c": self.c, "cover_verified": self.cover_verified,
                "cheeger_method": self.cheeger_method}


@dataclass
class FamilyReport:
    rows: list[FamilyRow]
    eps1: float
    eps2: float
    inf_h: float
    inf_h_upper: float | None
    sup_lambda: float
    uniform_gap_verdict: bool
    cheeger_verdict: bool | None
    tau_verdict: bool | None
    notes: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "thresholds": {"eps1": self.eps1, "eps2": self.eps2},
            "inf_h": self.inf_h,
            "inf_h_upper": self.inf_h_upper,
            "sup_lambda": self.sup_lambda,
            "uniform_gap_verdict": self.uniform_gap_verdict,
            "cheeger_verdict": self.cheeger_verdict,
            "tau_verdict": self.tau_verdict,
            "notes": list(self.notes),
            "provenance": self.provenance,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in self.rows:
            d = r.to_dict()
            w.writerow(["" if d[f] is None else d[f] for f in ROW_FIELDS])
        return buf.getvalue()


def _row(m: FamilyMember, cheeger_mode: str, max_exact: int) -> FamilyRow:
    g = m.graph
    sp = spectrum(g)
    verified = None if m.cover is None else bool(m.cover.verified)
    exact_ok = g.n <= max_exact
    if cheeger_mode == "exact" and not exact_ok:
        raise ResourceError(f"exact Cheeger requested for {g.name} with n={g.n} > {max_exact}")
    if cheeger_mode in ("exact", "auto") and exact_ok:
        h = cheeger_exact(g, max_n=max_exact).h
        c = expander_constant(g, max_n=max_exact).c
        return FamilyRow(g.name, g.n, sp.k, sp.lambda_, sp.gap, h, h, c, verified, "exact")
    if cheeger_mode == "none":
        return FamilyRow(g.name, g.n, sp.k, sp.lambda_, sp.gap, sp.k * sp.gap / 2.0, None, None, verified,
                         "spectral-lower-bound")
    if cheeger_mode not in ("auto", "heuristic"):
        raise ValidationError(f"unknown cheeger mode {cheeger_mode!r}")
    lo, hi = cheeger_bounds(g, sp.gap)
    return FamilyRow(g.name, g.n, sp.k, sp.lambda_, sp.gap, lo, hi, None, verified, "bounds")


def analyze_family(fam: GraphFamily, eps1: float = EPS1, eps2: float = EPS2, cheeger_mode: str = "auto",
                   max_exact: int = EXACT_MAX_N) -> FamilyReport:
    """Per-member spectra and Cheeger data with family-level verdicts.

    ``cheeger_mode`` is ``"auto"`` (exact up to ``max_exact`` vertices,
    otherwise the interval ``[k gap / 2, sweep bound]``), ``"exact"`` (raise
    above the cap), ``"heuristic"`` (interval only) or ``"none"`` (spectral
    lower bound only). ``cheeger_verdict`` is None when the intervals do not
    decide ``inf h >= eps1``.
    """
    if not fam.members:
        raise ValidationError("empty family")
    rows = [_row(m, cheeger_mode, max_exact) for m in fam.members]
    notes = []
    inf_h = min(r.h_lo for r in rows)
    his = [r.h_hi for r in rows]
    inf_h_upper = None if any(h is None for h in his) else min(his)
    sup_lambda = max(r.lambda_ for r in rows)
    uniform = min(r.gap for r in rows) >= eps2
    if inf_h >= eps1:
        cheeger = True
    elif inf_h_upper is not None and inf_h_upper < eps1:
        cheeger = False
    else:
        cheeger = None
    degrees = {r.k for r in rows}
    if len(degrees) > 1:
        tau = None
        notes.append(f"mixed degrees {sorted(degrees)}; tau verdict suppressed")
    elif not fam.has_covers:
        tau = None
        notes.append("no covering maps; only the uniform-gap verdict applies")
    else:
        tau = uniform and all(r.cover_verified for r in rows)
    return FamilyReport(rows, eps1, eps2, inf_h, inf_h_upper, sup_lambda, uniform, cheeger, tau, notes,
                        dict(fam.provenance))


def tower_diagnostics(fam: GraphFamily) -> list[dict]:
    """For each consecutive cover: verification, fiber size, deck group
    order and freeness, and whether the deck quotient matches the target."""
    out = []
    for up, low, cov in fam.links:
        d = {"upper": fam.members[up].graph.name, "lower": fam.members[low].graph.name,
             "verified": cov.verified, "fiber_size": cov.fiber_size,
             "violation": cov.violation.to_dict() if cov.violation else None}
        if cov.verified:
            deck = deck_group(cov)
            q = quotient_graph(cov.source, deck_action(deck))
            d.update({"deck_order": deck.order, "deck_acts_freely": deck.acts_freely(),
                      "quotient_is_cover": q.is_cover, "quotient_isomorphic_to_target": orbit_map_isomorphism(q, cov)})
        out.append(d)
    return out


def folner_injection_probe(fam: GraphFamily, sizes, basepoint: int = 0, radius: int | None = None,
                           candidates=None, mode: str = "auto") -> dict:
    """Push small-boundary sets of the covering graph down to the members.

    Candidates are either given explicitly or taken as Folner-ratio
    minimizers of each size in the ball of ``radius`` around ``basepoint``.
    When the cover is injective on F and ``|F| <= |V(X_i)|/2``, the image
    p(F) certifies ``h(X_i) <= cut(p(F)) / |F|``; every edge leaving p(F)
    lifts to an edge leaving F, so this never exceeds the edge-boundary
    ratio of F.
    """
    if fam.source is None or not fam.has_covers:
        return {"skipped": True, "notice": "family has no covering maps; nothing to probe", "members": []}
    src = fam.source
    if candidates is None:
        candidates = []
        vs = ball(src, basepoint, radius if radius is not None else src.n)
        sub, labels = induced_subgraph(src, vs)
        for s in sizes:
            if 1 <= s <= max(1, sub.n // 2):
                w = folner_ratio(sub, s, mode=mode).witness
                candidates.append(tuple(sorted(labels[i] for i in w)))
    candidates = [tuple(sorted(int(v) for v in F)) for F in candidates]
    rows = []
    for m in fam.members:
        if m.cover is None or not m.cover.verified:
            rows.append({"member": m.graph.name, "skipped": True, "notice": "no verified cover"})
            continue
        p = m.cover.vmap
        for F in candidates:
            img = sorted({int(p[v]) for v in F})
            injective = len(img) == len(F)
            half = 2 * len(F) <= m.graph.n
            Fset = set(F)
            edge_bd = sum(1 for v in F for w in src.adjacency[v] if w not in Fset)
            row = {"member": m.graph.name, "F": list(F), "size": len(F), "injective": injective,
                   "at_most_half": half, "vertex_boundary_ratio": len(boundary(src, F)) / len(F),
                   "edge_boundary_ratio": edge_bd / len(F), "h_upper_bound": None}
            if injective and half:
                rest = [v for v in range(m.graph.n) if v not in set(img)]
                row["h_upper_bound"] = edge_cut(m.graph, img, rest) / len(F)
            else:
                row["reason"] = "fiber collision" if not injective else "|F| exceeds half the member"
            rows.append(row)
    return {"skipped": False, "source": src.name, "members": rows}


def _member_from_entry(entry, base: str) -> tuple[FamilyMember, list | None]:
    if isinstance(entry, str):
        entry = {"path": entry}
    if "path" in entry:
        path = entry["path"] if os.path.isabs(entry["path"]) else os.path.join(base, entry["path"])
        g = read_edge_list(path)
        g = g.with_name(entry.get("name", os.path.basename(path)))
    elif "gen" in entry:
        g = generate(entry["gen"], *entry.get("params", []))
    else:
        raise ValidationError(f"manifest member needs 'path' or 'gen': {entry}")
    return FamilyMember(g), entry.get("cover")


def load_manifest(path: str, cap: int = DEFAULT_GROUP_CAP) -> GraphFamily:
    """Load a JSON family manifest.

    Accepted shapes: ``{"tower": {"dim", "prime", "depth"}}``,
    ``{"primes": {"dim", "primes"}}`` or ``{"members": [...], "source": ...}``
    where a member is an edge-list path or ``{"path"|"gen", "params",
    "cover": [vertex map from source]}``. Relative paths resolve against the
    manifest's directory.
    """
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read manifest {path}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    if "tower" in data:
        t = data["tower"]
        return build_tower(int(t["dim"]), int(t["prime"]), int(t["depth"]), cap=cap)
    if "primes" in data:
        t = data["primes"]
        return build_prime_family(int(t["dim"]), t["primes"], cap=cap)
    if "members" not in data:
        raise ValidationError("manifest needs 'tower', 'primes' or 'members'")
    source = None
    if "source" in data:
        source, _ = _member_from_entry(data["source"], base)
        source = source.graph
    members = []
    for entry in data["members"]:
        m, vmap = _member_from_entry(entry, base)
        if vmap is not None:
            if source is None:
                raise ValidationError("member cover given but manifest has no 'source'")
            m.cover = verify_cover(source, m.graph, np.asarray(vmap))
        members.append(m)
    return GraphFamily(members, {"kind": "manifest", "path": os.path.basename(path)}, source)
