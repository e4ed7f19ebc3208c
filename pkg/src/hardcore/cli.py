"""Command-line interface: ``hardcore <subcommand> [--flags]``.

Exit status is 0 on success, 1 when the library rejects the request, and 2 on
a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import decay, exact, fptas, graph, saw, threshold
from ._errors import NodeBudgetExceeded, StateCapExceeded

LATTICE_KINDS = {
    "z1": ("cartesian", 1), "z2": ("cartesian", 2), "z3": ("cartesian", 3),
    "z4": ("cartesian", 4), "z5": ("cartesian", 5), "z6": ("cartesian", 6),
    "triangular": ("triangular", 2), "honeycomb": ("honeycomb", 2),
}


class DomainError(Exception):
    pass


# -- output ---------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return ", ".join(_fmt(v) for v in x)
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def emit(args, record: dict, table: tuple[list, list] | None = None, text: str | None = None) -> None:
    """Write ``record`` as JSON, ``table`` (header, rows) as CSV, or a text summary."""
    if args.format == "json":
        out = json.dumps(_jsonable(record), indent=2) + "\n"
    elif args.format == "csv":
        if table is None:
            table = (list(record), [list(record.values())])
        out = _csv(*table)
    else:
        out = text if text is not None else "".join(
            f"{k}: {_fmt(v)}\n" for k, v in record.items() if not isinstance(v, (list, dict)) or len(v) <= 12)
    sys.stdout.write(out)


# -- inputs -----------------------------------------------------------------------

def _graph(args) -> graph.Graph:
    return graph.load_graph(args.graph)


def _boundary(args) -> graph.BoundaryCondition:
    if getattr(args, "boundary", None):
        return graph.load_boundary(args.boundary)
    return graph.EMPTY_BOUNDARY


def _lattice_patch(kind: str, radius: int) -> tuple[graph.Graph, int]:
    name, dim = LATTICE_KINDS[kind]
    side = 2 * radius + 1
    G = graph.generate_lattice_patch(name, [side] * dim)
    center = (G.n - 1) // 2  # row-major with odd sides
    return G, center


# -- subcommands -------------------------------------------------------------------

def cmd_oracle(args):
    G = _graph(args)
    sigma = _boundary(args)
    log_z = exact.exact_conditioned_log_partition(G, sigma, args.lam) if sigma.assignment else \
        exact.exact_log_partition(G, args.lam, size_limit=args.size_limit)
    rec = {"n": G.n, "m": G.m, "lambda": args.lam, "log_Z": log_z}
    if args.vertex is not None:
        r = exact.exact_occupation(G, sigma, args.vertex, args.lam, size_limit=args.size_limit)
        rec.update(vertex=args.vertex, p_v=r.p_v, R_v=r.R_v)
    emit(args, rec)


def cmd_count(args):
    G = _graph(args)
    res = fptas.approx_log_partition(G, args.lam, args.mu, order=args.order,
                                     node_budget=args.node_budget, max_depth=args.max_depth)
    data = res.to_json()
    rows = [[s.vertex, s.R_hat, s.R_minus, s.R_plus, s.depth, s.nodes_expanded] for s in res.per_vertex]
    emit(args, data, (["vertex", "R_hat", "R_minus", "R_plus", "depth", "nodes_expanded"], rows),
         f"log_Z: {res.log_Z:.10g}\nZ: {res.Z:.10g}\nrelative_error_bound: {res.relative_error_bound:.3g}\n"
         f"nodes_expanded: {res.nodes_expanded}\n")


def cmd_marginal(args):
    G = _graph(args)
    sigma = _boundary(args)
    if args.delta is not None:
        est = fptas.approx_occupation(G, sigma, args.vertex, args.delta, args.lam,
                                      node_budget=args.node_budget, max_depth=args.depth)
        rec = dict(est.interval.to_json(), R_hat=est.value)
    else:
        iv = decay.marginal_interval(G, args.vertex, sigma, args.depth, args.lam, node_budget=args.node_budget)
        rec = iv.to_json()
    emit(args, dict(vertex=args.vertex, **{"lambda": args.lam}, **rec))


def cmd_threshold(args):
    rep = threshold.lambda_star(args.arity, args.delta, args.lam)
    emit(args, rep.to_json())


def cmd_table1(args):
    rows = threshold.table1()
    recs = [dict(lattice=r.lattice.name, connective_constant=r.lattice.connective_constant,
                 max_degree=r.lattice.max_degree, alpha=r.report.alpha, lambda_star=r.report.lambda_star,
                 alpha_published=r.report.alpha_published, lambda_published=r.report.lambda_published,
                 previous_alpha=r.lattice.previous_alpha, previous_lambda=r.lattice.previous_lambda)
            for r in rows]
    text = "".join(f"{d['lattice']:<4} {d['connective_constant']:>10} {d['max_degree']:>3} "
                   f"{d['alpha']:8.3f} {d['lambda_star']:8.3f}\n" for d in recs)
    emit(args, {"rows": recs}, (threshold.TABLE1_COLUMNS, [r.csv_fields() for r in rows]),
         "lattice  delta      Dmax  alpha  lambda*\n" + text)


def cmd_certify(args):
    t1 = threshold.theorem1_certificate(args.delta, args.lam)
    rec = {"delta": args.delta, "lambda": args.lam, "degree_free_holds": t1.holds,
           "lambda_c_delta_plus_1": t1.lambda_c, "below_e_over_delta": t1.also_e_over_delta}
    if args.arity is not None:
        c = threshold.ssm_certificate(args.arity, args.delta, args.lam)
        rec.update(arity=args.arity, bounded_degree_holds=c.holds, nu=c.nu, margin=c.margin)
    emit(args, rec)


def cmd_saw(args):
    if args.graph:
        G, v = _graph(args), args.vertex if args.vertex is not None else 0
    else:
        G, v = _lattice_patch(args.lattice, args.radius if args.radius is not None else args.length)
        if args.vertex is not None:
            v = args.vertex
    sc = saw.count_saws(G, v, args.length, node_budget=args.node_budget)
    rows = [[i + 1, c, r] for i, (c, r) in enumerate(zip(sc.counts, sc.cumulative_roots))]
    emit(args, {"vertex": v, "counts": list(sc.counts), "cumulative_roots": sc.cumulative_roots,
                "nodes_expanded": sc.nodes_expanded},
         (["length", "count", "cumulative_root"], rows),
         "".join(f"{a}\t{b}\t{c:.6f}\n" for a, b, c in rows))


def cmd_connective(args):
    if args.graph:
        G = _graph(args)
    else:
        G = graph.generate_gnp(args.n, args.d, args.seed)
    ell = args.length or math.ceil(3 * math.log(max(G.n, 2)))
    rng = np.random.default_rng(args.seed)
    k = min(args.samples, G.n)
    sample = sorted(int(x) for x in rng.choice(G.n, size=k, replace=False))
    est = saw.estimate_connective(G, sample, ell, node_budget=args.node_budget)
    emit(args, {"n": G.n, "m": G.m, "length": ell, "max_root": est.max_root, "mean_root": est.mean_root,
                "roots": {str(v): r for v, r in est.roots.items()}},
         (["vertex", "cumulative_root"], [[v, r] for v, r in est.roots.items()]))


def cmd_branching(args):
    if args.lattice != "z2":
        raise DomainError("branching matrices are implemented for z2 only")
    orderings = saw.all_orderings() if args.ordering == "all" else [args.ordering]
    results = []
    for o in orderings:
        B = saw.branching_matrix(args.memory, o, args.mode, first_step_symmetry=args.symmetry,
                                 state_cap=args.state_cap)
        results.append((o, saw.perron_root(B, tol=args.tol), B))
    best = min(results, key=lambda t: t[1])
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(best[2].to_coo_text())
    rec = {"lattice": "z2", "memory": args.memory, "mode": args.mode, "ordering": best[0],
           "gamma": best[1], "states": best[2].n_states, "nnz": best[2].nnz}
    if len(results) > 1:
        rec["by_ordering"] = {o: g for o, g, _ in results}
    emit(args, rec, (["ordering", "gamma", "states", "nnz"], [[o, g, B.n_states, B.nnz] for o, g, B in results]))


def cmd_gnp(args):
    G = graph.generate_gnp(args.n, args.d, args.seed)
    if args.format == "json":
        out = json.dumps(graph.graph_to_json(G)) + "\n"
    else:
        out = graph.serialize_graph(G)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _depths(args):
    if args.min_depth > args.max_depth:
        raise DomainError("min-depth exceeds max-depth")
    return list(range(args.min_depth, args.max_depth + 1, args.step))


def cmd_decay(args):
    if args.graph:
        obj, v, sigma = _graph(args), args.vertex, _boundary(args)
    elif args.tree_arity:
        obj, v, sigma = decay.SymmetricTree.regular(args.tree_arity, args.max_depth), 0, graph.EMPTY_BOUNDARY
    else:
        raise DomainError("give --graph or --tree-arity")
    prof = decay.decay_profile(obj, v, sigma, _depths(args), args.lam)
    rows = [[iv.depth, iv.lower, iv.upper, iv.width] for iv in prof.intervals]
    emit(args, {"lambda": args.lam, "rate": prof.rate, "slope": prof.slope,
                "profile": [dict(zip(["depth", "R_minus", "R_plus", "width"], r)) for r in rows]},
         (["depth", "R_minus", "R_plus", "width"], rows),
         "".join(f"{d:>4} {a:.10g} {b:.10g} {w:.3e}\n" for d, a, b, w in rows) + f"rate: {prof.rate:.6g}\n")


def cmd_symmetric(args):
    arities = [int(a) for a in args.arities.split(",") if a.strip()]
    depth = args.depth
    if args.repeat:
        arities = (arities * (depth // len(arities) + 1))[:depth]
    rep = decay.symmetric_tree_report(arities, args.lam, depth)
    emit(args, rep.to_json())


# -- parser ---------------------------------------------------------------------------

def _positive_float(s):
    x = float(s)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="cap on internal parallelism (computations here are sequential)")

    p = argparse.ArgumentParser(prog="hardcore", description="Hard-core model counting and thresholds.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp_ = sub.add_parser(name, parents=[common], help=help_)
        sp_.set_defaults(func=fn)
        return sp_

    s = add("oracle", cmd_oracle, "exact partition function and marginals")
    s.add_argument("--graph", required=True)
    s.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    s.add_argument("--boundary")
    s.add_argument("--vertex", type=int)
    s.add_argument("--size-limit", type=int, default=exact.DEFAULT_SIZE_LIMIT)

    s = add("count", cmd_count, "approximate log Z by correlation decay")
    s.add_argument("--graph", required=True)
    s.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    s.add_argument("--mu", type=float, default=0.05)
    s.add_argument("--order", choices=["index", "max-degree"], default="index")
    s.add_argument("--node-budget", type=int, default=saw.DEFAULT_NODE_BUDGET)
    s.add_argument("--max-depth", type=int)

    s = add("marginal", cmd_marginal, "Weitz-tree interval for one vertex")
    s.add_argument("--graph", required=True)
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    s.add_argument("--depth", type=int, default=10)
    s.add_argument("--delta", type=_positive_float, help="deepen adaptively to this additive target")
    s.add_argument("--boundary")
    s.add_argument("--node-budget", type=int, default=saw.DEFAULT_NODE_BUDGET)

    s = add("threshold", cmd_threshold, "lambda* and alpha for arity d and connective constant")
    s.add_argument("--arity", type=int, required=True)
    s.add_argument("--delta", type=_positive_float, required=True)
    s.add_argument("--lambda", dest="lam", type=_positive_float)

    add("table1", cmd_table1, "thresholds for the standard lattices")

    s = add("certify", cmd_certify, "check the decay certificates at an activity")
    s.add_argument("--delta", type=_positive_float, required=True)
    s.add_argument("--lambda", dest="lam", type=_positive_float, required=True)
    s.add_argument("--arity", type=int)

    s = add("saw", cmd_saw, "exact self-avoiding walk counts")
    s.add_argument("--graph")
    s.add_argument("--lattice", choices=sorted(LATTICE_KINDS), default="z2")
    s.add_argument("--radius", type=int, help="patch half-width (default: the walk length)")
    s.add_argument("--vertex", type=int)
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--node-budget", type=int, default=saw.DEFAULT_NODE_BUDGET)

    s = add("connective", cmd_connective, "cumulative SAW roots over sampled vertices")
    s.add_argument("--graph")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--d", type=_positive_float, default=2.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--length", type=int, help="default ceil(3 log n)")
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--node-budget", type=int, default=saw.DEFAULT_NODE_BUDGET)

    s = add("branching", cmd_branching, "finite-memory branching matrix and its Perron root")
    s.add_argument("--lattice", default="z2")
    s.add_argument("--memory", type=int, required=True)
    s.add_argument("--mode", choices=["plain", "weitz-pruned"], default="plain")
    s.add_argument("--ordering", default="WSEN", help="permutation of WSEN, or 'all'")
    s.add_argument("--symmetry", action="store_true", help="fix the first step (plain mode)")
    s.add_argument("--state-cap", type=int, default=saw.DEFAULT_STATE_CAP)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--export", help="write the matrix as a coordinate list")

    s = add("gnp", cmd_gnp, "sample G(n, d/n) deterministically")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=_positive_float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output")

    s = add("decay", cmd_decay, "interval width against truncation depth")
    s.add_argument("--graph")
    s.add_argument("--tree-arity", type=int, help="complete tree with this many children per node")
    s.add_argument("--vertex", type=int, default=0)
    s.add_argument("--boundary")
    s.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    s.add_argument("--min-depth", type=int, default=1)
    s.add_argument("--max-depth", type=int, default=20)
    s.add_argument("--step", type=int, default=1)

    s = add("symmetric", cmd_symmetric, "spherically symmetric tree report")
    s.add_argument("--arities", required=True, help="comma-separated arities by level")
    s.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--repeat", action="store_true", help="cycle the arity list up to --depth")
    return p


DOMAIN_ERRORS = (DomainError, ValueError, ArithmeticError, OSError, NodeBudgetExceeded, StateCapExceeded,
                 exact.SizeGuardError, fptas.DepthCapReached, saw.PerronConvergenceError, KeyError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"hardcore {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
