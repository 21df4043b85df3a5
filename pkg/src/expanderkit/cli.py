"""Command-line front end.

Every report is a JSON object holding the command, the full effective
configuration (seed included) and the result. Keys are sorted and no clock
values are written, so identical inputs give byte-identical output.

Exit codes: 0 success, 1 internal consistency failure, 2 invalid input or
usage, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import __version__
from .constructions import automorphism_group, kpq_replace, vertex_transitive
from .coverings import (
    deck_action,
    deck_group,
    orbit_map_isomorphism,
    quotient_cover_from_reduction,
    quotient_graph,
    verify_cover,
)
from .exceptions import ConsistencyError, ResourceError, ValidationError
from .family import (
    EPS1,
    EPS2,
    analyze_family,
    build_prime_family,
    build_tower,
    folner_injection_probe,
    load_manifest,
    tower_diagnostics,
)
from .graph import Graph, generate, parse_edge_list, to_dot, to_edge_list
from .groups import DEFAULT_GROUP_CAP, action_from_permutations, cayley_graph, left_translation_action, parse_group_spec
from .kernels import (
    CND_TOL,
    Kernel,
    ball_roundness_trend,
    bound_certificate,
    cnd_sup_exponent,
    invariance_check,
    is_negative_kernel,
    kernel_from_metric,
    parse_kernel_text,
    quasi_triangle_check,
    roundness_estimate,
)
from .spectra import TOL_EIG, cheeger_bounds, cheeger_exact, cheeger_heuristic, expander_constant, folner_ratio, spectrum

EXIT_OK, EXIT_CONSISTENCY, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3
GRAPH_KINDS = ("cycle", "complete", "kpq", "torus", "tree-ball", "petersen", "cayley", "path")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# -- input helpers ----------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _graph(path: str) -> Graph:
    return parse_edge_list(_read_text(path), name=path)


def _int_list(path: str) -> list:
    text = _read_text(path).strip()
    try:
        return json.loads(text) if text.startswith("[") else [int(x) for x in text.split()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse integer list in {path}: {exc}") from exc


def _graph_result(g: Graph, extra: dict | None = None) -> dict:
    out = {"name": g.name, "n": g.n, "m": g.m, "edges": [list(e) for e in g.edges]}
    out.update(extra or {})
    return out


# -- command handlers -------------------------------------------------------------


def cmd_gen(a):
    if a.kind == "cayley":
        if len(a.params) != 1:
            raise ValidationError("gen cayley needs one group spec, e.g. sl:2:3 or cyclic:6")
        grp = parse_group_spec(a.params[0], cap=a.cap_group)
        g, labels = cayley_graph(grp)
        return _graph_result(g, {"labels": labels}), g
    try:
        params = [int(x) for x in a.params]
    except ValueError as exc:
        raise ValidationError(f"integer parameters expected: {exc}") from exc
    g = generate(a.kind, *params)
    return _graph_result(g), g


def cmd_read(a):
    g = _graph(a.graph)
    return _graph_result(g.with_name("")), g


def cmd_spectrum(a):
    r = spectrum(_graph(a.graph), tol_eig=a.tol if a.tol is not None else TOL_EIG)
    return r.to_dict(), None


def cmd_cheeger(a):
    g = _graph(a.graph)
    if a.heuristic:
        lo, hi = cheeger_bounds(g)
        r = cheeger_heuristic(g).to_dict()
        r.update({"lower_bound": lo, "upper_bound": hi})
        return r, None
    return cheeger_exact(g, max_n=a.cap_exact).to_dict(), None


def cmd_expander(a):
    return expander_constant(_graph(a.graph), max_n=a.cap_exact).to_dict(), None


def cmd_cover(a):
    if a.cover_cmd == "reduction":
        rc = quotient_cover_from_reduction(a.dim, a.n, a.m, cap=a.cap_group)
        out = rc.to_dict()
        out.pop("vmap")
        return out, None
    if a.cover_cmd == "quotient":
        g = _graph(a.graph)
        action = action_from_permutations(g, _int_list(a.perms))
        q = quotient_graph(g, action)
        return q.to_dict(), q.graph
    cov = verify_cover(_graph(a.source), _graph(a.target), _int_list(a.map))
    out = cov.to_dict()
    if a.cover_cmd == "deck":
        if not cov.verified:
            raise ValidationError(f"not a covering map: {cov.violation.kind} at vertex {cov.violation.vertex}")
        deck = deck_group(cov)
        q = quotient_graph(cov.source, deck_action(deck))
        out.update({"deck_order": deck.order, "acts_freely": deck.acts_freely(),
                    "deck_perms": deck.perms.tolist(), "quotient_is_cover": q.is_cover,
                    "quotient_isomorphic_to_target": orbit_map_isomorphism(q, cov)})
    return out, None


def cmd_replace(a):
    grp = parse_group_spec(a.group, cap=a.cap_group)
    r = kpq_replace(grp, a.p, a.q, policy=a.policy)
    return r.to_dict(), r.graph


def cmd_aut(a):
    g = _graph(a.graph)
    if a.aut_cmd == "group":
        auts = automorphism_group(g, cap=a.cap_aut)
        return {"order": len(auts), "automorphisms": [x.tolist() for x in auts]}, None
    ok, orbits = vertex_transitive(g, cap=a.cap_aut)
    return {"vertex_transitive": ok, "orbits": [list(o) for o in orbits]}, None


def _kernel_input(a) -> tuple[Kernel, Graph | None, object]:
    """Kernel, its graph (if any) and an optional action."""
    action = None
    if getattr(a, "cayley", None):
        grp = parse_group_spec(a.cayley, cap=a.cap_group)
        g, _ = cayley_graph(grp)
        action = left_translation_action(grp, g)
        k = kernel_from_metric(g, a.power) if not a.kernel else parse_kernel_text(_read_text(a.kernel))
        return k, g, action
    g = _graph(a.graph) if a.graph else None
    if a.kernel:
        k = parse_kernel_text(_read_text(a.kernel))
    elif g is not None:
        k = kernel_from_metric(g, a.power)
    else:
        raise ValidationError("give --graph, --kernel or --cayley")
    if getattr(a, "perms", None):
        if g is None:
            raise ValidationError("--perms needs --graph")
        action = action_from_permutations(g, _int_list(a.perms))
    return k, g, action


def cmd_kernel(a):
    k, g, action = _kernel_input(a)
    tol = a.tol
    sub = a.kernel_cmd
    if sub == "cnd":
        return is_negative_kernel(k, tol=tol if tol is not None else CND_TOL).to_dict(), None
    if sub == "quasi-triangle":
        r = quasi_triangle_check(k)
        return {"holds": r.holds, "worst_slack": r.worst_slack,
                "worst_triple": None if r.worst_triple is None else list(r.worst_triple)}, None
    if sub in ("invariance", "bound-cert"):
        if action is None:
            raise ValidationError(f"kernel {sub} needs an action (--cayley or --graph with --perms)")
        if sub == "invariance":
            r = invariance_check(k, action, tol=tol if tol is not None else 1e-9, seed=a.seed,
                                 samples=a.cap_samples)
            return {"invariant": r.invariant, "worst_violation": r.worst_violation,
                    "worst": None if r.worst is None else list(r.worst), "exhaustive": r.exhaustive}, None
        return bound_certificate(k, action, tol=tol if tol is not None else 1e-9).to_dict(), None
    metric = k.values if a.kernel else g
    if sub == "sup-exponent":
        return cnd_sup_exponent(metric, tol_p=a.tol_p).to_dict(), None
    if a.radii:
        if g is None:
            raise ValidationError("--radii needs a graph")
        rows = ball_roundness_trend(g, a.center, [int(x) for x in a.radii.split(",")], n_max=a.n_max,
                                    tol_q=a.tol_p, seed=a.seed, samples=a.cap_samples)
        return {"rows": rows}, None
    r = roundness_estimate(metric, n_max=a.n_max, tol_q=a.tol_p, seed=a.seed, samples=a.cap_samples,
                           mode=a.mode, tol_p=a.tol_p)
    return r.to_dict(), None


def cmd_family(a):
    if a.family_cmd == "tower":
        fam = build_tower(a.dim, a.prime, a.depth, cap=a.cap_group)
    elif a.family_cmd == "primes":
        try:
            primes = [int(x) for x in a.primes.split(",")]
        except ValueError as exc:
            raise ValidationError(f"--primes expects comma-separated integers: {exc}") from exc
        fam = build_prime_family(a.dim, primes, cap=a.cap_group)
    else:
        fam = load_manifest(a.manifest, cap=a.cap_group)
    rep = analyze_family(fam, eps1=a.eps1, eps2=a.eps2, cheeger_mode=a.cheeger_mode, max_exact=a.cap_exact)
    out = rep.to_dict()
    out["covers"] = tower_diagnostics(fam)
    if a.probe_sizes:
        sizes = [int(x) for x in a.probe_sizes.split(",")]
        out["folner_probe"] = folner_injection_probe(fam, sizes, radius=a.probe_radius)
    return out, rep


def cmd_folner(a):
    g = _graph(a.graph)
    return folner_ratio(g, a.max_size, mode=a.mode, exhaustive_limit=a.cap_exhaustive).to_dict(), None


# -- output -------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _flat_csv(result: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = result.get("rows")
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow(["" if r.get(k) is None else _cell(r.get(k)) for k in keys])
    else:
        w.writerow(["key", "value"])
        for k in sorted(result):
            w.writerow([k, _cell(result[k])])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True, default=_jsonable, separators=(",", ":"))
    return "" if v is None else str(v)


def render(report: dict, fmt: str, artifact) -> str:
    result = report["result"]
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, default=_jsonable, allow_nan=True) + "\n"
    if fmt == "dot":
        if not isinstance(artifact, Graph):
            raise ValidationError(f"--format dot needs a graph-producing command, not {report['command']}")
        return to_dot(artifact)
    if fmt == "csv":
        if hasattr(artifact, "to_csv"):
            return artifact.to_csv()
        return _flat_csv(result)
    if isinstance(artifact, Graph):
        return to_edge_list(artifact)
    lines = [f"# {report['command']} seed={report['config']['seed']}"]
    lines += [f"{k}: {_cell(result[k])}" for k in sorted(result)]
    return "\n".join(lines) + "\n"


# -- parser ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--format", choices=("json", "csv", "dot", "text"), default=None,
                   help="output format (default: text for gen/read, json otherwise)")
    c.add_argument("--seed", type=int, default=0, help="seed for every sampled search (default 0)")
    c.add_argument("--tol", type=float, default=None, help="numerical tolerance override")
    c.add_argument("--cap-group", type=int, default=DEFAULT_GROUP_CAP, help="max enumerated group order")
    c.add_argument("--cap-exact", type=int, default=24, help="max vertices for exhaustive cut searches")
    c.add_argument("--cap-aut", type=int, default=64, help="max vertices for automorphism searches")
    c.add_argument("--cap-samples", type=int, default=10**5, help="random samples for sampled searches")
    c.add_argument("--cap-exhaustive", type=int, default=10**6, help="max subsets for exhaustive Folner search")
    c.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="expanderkit", description="Expander, covering and negative-kernel toolkit.")
    p.add_argument("--version", action="version", version=f"expanderkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name, handler, **kw):
        q = parent.add_parser(name, parents=[common], **kw)
        q.set_defaults(func=handler)
        return q

    g = leaf(sub, "gen", cmd_gen, help="generate a graph")
    g.add_argument("kind", choices=GRAPH_KINDS)
    g.add_argument("params", nargs="*", help="integer sizes, or a group spec for cayley")

    leaf(sub, "read", cmd_read, help="parse an edge list and re-emit it canonically").add_argument("graph")
    leaf(sub, "spectrum", cmd_spectrum, help="Markov spectrum and gap").add_argument("graph")

    ch = leaf(sub, "cheeger", cmd_cheeger, help="Cheeger constant")
    ch.add_argument("graph")
    mx = ch.add_mutually_exclusive_group()
    mx.add_argument("--exact", dest="heuristic", action="store_false", help="exhaustive search (default)")
    mx.add_argument("--heuristic", dest="heuristic", action="store_true", help="spectral bounds and sweep cut")
    ch.set_defaults(heuristic=False)

    leaf(sub, "expander-constant", cmd_expander, help="exact expander constant c").add_argument("graph")

    cov = sub.add_parser("cover", help="covering maps").add_subparsers(dest="cover_cmd", required=True,
                                                                        parser_class=_Parser)
    for name in ("verify", "deck"):
        q = leaf(cov, name, cmd_cover)
        q.add_argument("source")
        q.add_argument("target")
        q.add_argument("map", help="vertex map: JSON list or whitespace-separated integers")
    q = leaf(cov, "quotient", cmd_cover)
    q.add_argument("graph")
    q.add_argument("perms", help="JSON list of permutations forming the acting group")
    q = leaf(cov, "reduction", cmd_cover)
    q.add_argument("--dim", type=int, default=2)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)

    r = leaf(sub, "replace-kpq", cmd_replace, help="K_{p,q} vertex replacement of a Cayley graph")
    r.add_argument("group", help="group spec, e.g. cyclic:6:1,-1,2,-2,3")
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--q", type=int, required=True)
    r.add_argument("--policy", choices=("literal", "matched"), default="literal")

    au = sub.add_parser("aut", help="automorphisms").add_subparsers(dest="aut_cmd", required=True,
                                                                     parser_class=_Parser)
    for name in ("group", "transitive"):
        leaf(au, name, cmd_aut).add_argument("graph")

    ke = sub.add_parser("kernel", help="negative kernels and roundness").add_subparsers(
        dest="kernel_cmd", required=True, parser_class=_Parser)
    for name in ("cnd", "quasi-triangle", "invariance", "bound-cert", "sup-exponent", "roundness"):
        q = leaf(ke, name, cmd_kernel)
        q.add_argument("--graph", help="edge list; kernel is its path metric to --power")
        q.add_argument("--kernel", help="kernel / metric matrix file")
        q.add_argument("--cayley", help="group spec; use its Cayley graph with left translations")
        q.add_argument("--perms", help="JSON permutations acting on --graph")
        q.add_argument("--power", type=float, default=1.0)
        q.add_argument("--tol-p", type=float, default=1e-4, help="bisection width for exponents")
        q.add_argument("--n-max", type=int, default=4, help="max points per side in roundness")
        q.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
        q.add_argument("--center", type=int, default=0)
        q.add_argument("--radii", default=None, help="comma list; roundness on nested balls")

    fa = sub.add_parser("family", help="family analysis").add_subparsers(dest="family_cmd", required=True,
                                                                         parser_class=_Parser)
    t = leaf(fa, "tower", cmd_family, help="build, verify and analyze a congruence tower")
    t.add_argument("--dim", type=int, default=2)
    t.add_argument("--prime", type=int, required=True)
    t.add_argument("--depth", type=int, required=True)
    pr = leaf(fa, "primes", cmd_family)
    pr.add_argument("--dim", type=int, default=2)
    pr.add_argument("--primes", required=True, help="comma list, e.g. 3,5,7")
    leaf(fa, "manifest", cmd_family).add_argument("manifest")
    for q in (t, pr, fa.choices["manifest"]):
        q.add_argument("--eps1", type=float, default=EPS1)
        q.add_argument("--eps2", type=float, default=EPS2)
        q.add_argument("--cheeger-mode", choices=("auto", "exact", "heuristic", "none"), default="auto")
        q.add_argument("--probe-sizes", default=None, help="comma list of Folner set sizes to push down covers")
        q.add_argument("--probe-radius", type=int, default=None)

    f = leaf(sub, "folner", cmd_folner, help="minimum boundary ratio |dF|/|F|")
    f.add_argument("graph")
    f.add_argument("--max-size", type=int, required=True)
    f.add_argument("--mode", choices=("auto", "exact", "greedy"), default="auto")
    return p


def _command_name(a) -> str:
    parts = [a.command]
    for attr in ("cover_cmd", "aut_cmd", "kernel_cmd", "family_cmd"):
        if getattr(a, attr, None):
            parts.append(getattr(a, attr))
    return " ".join(parts)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or ("text" if args.command in ("gen", "read") else "json")
    # the destination path is not part of the computation, so it stays out of the report
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output")}
    config["format"] = fmt
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result, artifact = args.func(args)
        if not isinstance(result, dict):
            result = {"value": result}
        report = {"command": _command_name(args), "config": config, "seed": args.seed, "result": result,
                  "warnings": sorted({str(w.message) for w in caught})}
        text = render(report, fmt, artifact)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_INVALID
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
