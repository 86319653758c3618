"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 unreadable input
(graph, oracle, tree or pairs file), 3 build failure, 4 verification failure.
Results go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import lowerbound as lb
from .ghtree import GHTree, GHTreeError, approx_gh_tree, k_gh_tree, verify_gh_tree
from .graph import CutSet, Graph, GraphFormatError, gnp, parse_edge_list
from .oracle import AtLeastK, OracleFormatError, build_oracle, deserialize, serialize, vconn, vcut

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_USAGE, EXIT_PARSE, EXIT_BUILD, EXIT_VERIFY = 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _c_value(text: str):
    if text == "auto":
        return "auto"
    v = int(text)
    if v < 5:
        raise argparse.ArgumentTypeError("c must be at least 5 or 'auto'")
    return v


# ---------------------------------------------------------------------------
# file helpers


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None


def _load_graph(path: str) -> Graph:
    data = _read_bytes(path)
    try:
        return parse_edge_list(data)
    except GraphFormatError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _load_oracle(path: str):
    try:
        return deserialize(_read_bytes(path))
    except OracleFormatError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _write(path: str | None, data: bytes | str) -> None:
    if path is None or path == "-":
        sys.stdout.write(data if isinstance(data, str) else data.decode())
        return
    try:
        Path(path).write_bytes(data if isinstance(data, bytes) else data.encode())
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot write {path}: {exc.strerror}") from None


def _emit(args, summary: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# tree text format


def format_tree(tree: GHTree) -> str:
    """Text form: header, ``edge a b w`` lines, ``f terminal node`` lines, cut lines."""
    out = ["vconn-ghtree 1", f"nodes {tree.num_nodes}"]
    out.append(f"k {tree.k}" if tree.k is not None else f"eps {tree.eps!r}")
    for (a, b), w in zip(tree.edges.tolist(), tree.weights.tolist()):
        out.append(f"edge {a} {b} {w}")
    for x in sorted(tree.f):
        out.append(f"f {x} {tree.f[x]}")
    for e, cut in enumerate(tree.cuts):
        verts = " ".join(str(v) for v in sorted(cut.vertices))
        edges = " ".join(str(v) for v in sorted(cut.edges))
        out.append(f"cut {e} v {verts} e {edges}".replace("  ", " ").rstrip())
    return "\n".join(out) + "\n"


def parse_tree(text: str) -> GHTree:
    """Inverse of :func:`format_tree`; raises GraphFormatError with a line number."""
    num_nodes = None
    k = eps = None
    edges, weights, f, cuts = [], [], {}, {}
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        try:
            if not seen_header:
                if tok != ["vconn-ghtree", "1"]:
                    raise ValueError("expected header 'vconn-ghtree 1'")
                seen_header = True
            elif tok[0] == "nodes" and len(tok) == 2:
                num_nodes = int(tok[1])
            elif tok[0] == "k" and len(tok) == 2:
                k = int(tok[1])
            elif tok[0] == "eps" and len(tok) == 2:
                eps = float(tok[1])
            elif tok[0] == "edge" and len(tok) == 4:
                a, b, w = (int(x) for x in tok[1:])
                edges.append((a, b))
                weights.append(w)
            elif tok[0] == "f" and len(tok) == 3:
                f[int(tok[1])] = int(tok[2])
            elif tok[0] == "cut" and len(tok) >= 3 and "v" in tok and "e" in tok:
                iv, ie = tok.index("v"), tok.index("e")
                if not 2 == iv < ie:
                    raise ValueError("cut line must read 'cut <edge> v ... e ...'")
                cuts[int(tok[1])] = CutSet(
                    frozenset(int(x) for x in tok[iv + 1 : ie]), frozenset(int(x) for x in tok[ie + 1 :])
                )
            else:
                raise ValueError(f"unrecognized line {raw.strip()!r}")
        except ValueError as exc:
            raise GraphFormatError(lineno, str(exc)) from None
    if not seen_header or num_nodes is None:
        raise GraphFormatError(0, "missing header or node count")
    if k is None and eps is None:
        raise GraphFormatError(0, "missing 'k' or 'eps' line")
    cut_list = [cuts.get(e, CutSet()) for e in range(len(edges))]
    return GHTree(
        num_nodes,
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        np.array(weights, dtype=np.int64),
        f,
        cut_list,
        k=k,
        eps=eps,
    )


def _terminals(arg: str, g: Graph) -> list[int]:
    if arg == "all":
        return list(range(g.n))
    if arg == "leaves":
        return np.flatnonzero(g.degree() == 1).tolist()
    if Path(arg).is_file():
        text = Path(arg).read_text()
        try:
            ids = [int(x) for x in text.replace(",", " ").split()]
        except ValueError:
            raise CliError(EXIT_PARSE, f"{arg}: terminal ids must be integers") from None
    else:
        try:
            ids = [int(x) for x in arg.split(",") if x.strip()]
        except ValueError:
            raise CliError(EXIT_USAGE, f"--terminals: not 'all', 'leaves', a file, or an id list: {arg}") from None
    bad = [x for x in ids if not 0 <= x < g.n]
    if bad:
        raise CliError(EXIT_USAGE, f"terminal ids out of range [0, {g.n}): {bad}")
    if not ids:
        raise CliError(EXIT_USAGE, "terminal set is empty")
    return sorted(set(ids))


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    g = _load_graph(args.graph)
    if args.k > g.n:
        raise CliError(EXIT_USAGE, f"--k must be at most n={g.n}")
    t0 = time.perf_counter()
    try:
        o = build_oracle(
            g, args.k, args.seed, store_cuts=args.store_cuts, sparsify_first=not args.no_sparsify, threads=_threads(args)
        )
    except GHTreeError as exc:
        raise CliError(EXIT_BUILD, f"build failed: {exc}") from None
    wall = time.perf_counter() - t0
    data = serialize(o)
    _write(args.out, data)
    summary = {
        "n": g.n,
        "m": g.m,
        "k": args.k,
        "sets": o.family.num_sets,
        "trees": o.trees,
        "trees_built": o.build_stats["trees_built"],
        "bytes": len(data),
        "seconds": round(wall, 4),
        "out": args.out,
    }
    _emit(
        args,
        summary,
        [
            f"n={g.n} m={g.m} k={args.k}",
            f"sets={o.family.num_sets} trees={o.trees} distinct={o.build_stats['trees_built']}",
            f"bytes={len(data)} time={wall:.3f}s -> {args.out}",
        ],
    )
    return 0


def _cut_text(cut) -> str:
    if isinstance(cut, AtLeastK):
        return repr(cut)
    verts = " ".join(str(v) for v in sorted(cut.vertices))
    edges = " ".join(str(e) for e in sorted(cut.edges))
    return f"vertices [{verts}] edges [{edges}]"


def _answer(o, u: int, v: int, want_cut: bool) -> dict:
    if not (0 <= u < o.n and 0 <= v < o.n):
        raise CliError(EXIT_USAGE, f"vertex id out of range [0, {o.n}): ({u}, {v})")
    if u == v:
        raise CliError(EXIT_USAGE, f"query endpoints must differ: ({u}, {v})")
    rec = {"u": u, "v": v, "vconn": vconn(o, u, v)}
    if want_cut:
        if not o.store_cuts:
            raise CliError(EXIT_USAGE, "oracle was built without --store-cuts")
        cut = vcut(o, u, v)
        if isinstance(cut, AtLeastK):
            rec["cut"] = f">={cut.k}"
        else:
            rec["cut"] = {"vertices": sorted(cut.vertices), "edges": sorted(cut.edges)}
        rec["cut_text"] = _cut_text(cut)
    return rec


def _answer_lines(rec: dict) -> list[str]:
    lines = [f"vconn({rec['u']},{rec['v']}) = {rec['vconn']}"]
    if "cut_text" in rec:
        lines.append(f"cut({rec['u']},{rec['v']}): {rec['cut_text']}")
    return lines


def cmd_query(args) -> int:
    o = _load_oracle(args.oracle)
    rec = _answer(o, args.u, args.v, args.cut)
    _emit(args, {k: v for k, v in rec.items() if k != "cut_text"}, _answer_lines(rec))
    return 0


def cmd_batch_query(args) -> int:
    o = _load_oracle(args.oracle)
    text = _read_bytes(args.pairs).decode(errors="replace")
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        if len(tok) != 2:
            raise CliError(EXIT_PARSE, f"{args.pairs}: line {lineno}: expected 'u v'")
        try:
            pairs.append((int(tok[0]), int(tok[1])))
        except ValueError:
            raise CliError(EXIT_PARSE, f"{args.pairs}: line {lineno}: vertex ids must be integers") from None
    for u, v in pairs:
        rec = _answer(o, u, v, args.cut)
        if args.json:
            print(json.dumps({k: x for k, x in rec.items() if k != "cut_text"}, sort_keys=True))
        else:
            for line in _answer_lines(rec):
                print(line)
    return 0


def cmd_ghtree(args) -> int:
    g = _load_graph(args.graph)
    u = _terminals(args.terminals, g)
    rng = np.random.default_rng(args.seed)
    try:
        if args.k is not None:
            tree = k_gh_tree(g, u, args.k, rng)
        else:
            tree, _ = approx_gh_tree(g, u, (), args.eps, rng)
    except GHTreeError as exc:
        raise CliError(EXIT_BUILD, f"tree construction failed: {exc}") from None
    text = format_tree(tree)
    if args.out is None:
        sys.stdout.write(text)
        return 0
    _write(args.out, text)
    summary = {
        "nodes": tree.num_nodes,
        "edges": len(tree.edges),
        "terminals": len(u),
        "flow_calls": tree.stats.get("flow_calls"),
        "out": args.out,
    }
    _emit(args, summary, [f"nodes={tree.num_nodes} edges={len(tree.edges)} terminals={len(u)} -> {args.out}"])
    return 0


def cmd_verify(args) -> int:
    g = _load_graph(args.graph)
    try:
        tree = parse_tree(_read_bytes(args.tree).decode(errors="replace"))
    except GraphFormatError as exc:
        raise CliError(EXIT_PARSE, f"{args.tree}: {exc}") from None
    u = sorted(tree.f)
    bad = [x for x in u if not 0 <= x < g.n]
    if bad:
        raise CliError(EXIT_PARSE, f"{args.tree}: terminals out of range: {bad}")
    report = verify_gh_tree(g, u, tree)
    summary = {"ok": not report, "violations": report, "terminals": len(u)}
    if report:
        _emit(args, summary, [f"FAIL {report[0]}", f"{len(report)} violation(s)"])
        return EXIT_VERIFY
    _emit(args, summary, [f"OK {len(u)} terminals, {len(tree.edges)} edges"])
    return 0


def cmd_lb(args) -> int:
    if args.n < 12 or args.n % 6:
        raise CliError(EXIT_USAGE, "--n must be a multiple of 6 and at least 12")
    mode = args.mode or ("kappa" if args.n <= lb.KAPPA_MAX_N else "cthresh")
    if mode == "kappa" and args.n > lb.KAPPA_MAX_N:
        raise CliError(EXIT_USAGE, f"kappa mode is limited to n <= {lb.KAPPA_MAX_N}")
    if not 0 <= args.index < args.count:
        raise CliError(EXIT_USAGE, "--index must lie in [0, count)")
    n = args.n
    c = lb.auto_c(n) if args.c == "auto" else args.c
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    try:
        cb = lb.build_codebook(n, args.count, rng)
        t = cb.words[args.index]
        d = lb.decompose(t, c, args.r, rng, fill=args.fill)
    except (lb.CodebookError, lb.DecompositionError) as exc:
        raise CliError(EXIT_BUILD, str(exc)) from None
    c_dist = lb.hamming(d.decoded(), t)
    gg = lb.build_gadget_graph(d)
    pick = rng.integers(0, n, size=(args.pairs, 2))
    rep = lb.verify_connectivity_formula(gg, d, pick)
    if mode == "kappa":
        pairs = [(i, j) for i in range(n) for j in range(n)]
        kap = lb.gadget_kappa(gg, pairs).reshape(n, n)
        t_hat = kap >= 4 * n - 2
    else:
        t_hat = d.decoded()
    rec, _ = cb.nearest(t_hat)
    wall = time.perf_counter() - t0
    summary = {
        "n": n,
        "c": c,
        "r": d.r,
        "count": args.count,
        "fill": args.fill,
        "mode": mode,
        "codebook_min_distance": cb.min_distance,
        "eligible_rate": d.stats["eligible_rate"],
        "shortfall": d.stats["shortfall"],
        "max_c": int(d.cmat.max()),
        "c_threshold_distance": c_dist,
        "decode_distance": lb.hamming(t_hat, t),
        "radius": n * n / 6,
        "match_rate": rep.match_rate,
        "index": args.index,
        "recovered": rec,
        "decoded": rec == args.index,
        "seconds": round(wall, 3),
    }
    lines = [
        f"n={n} c={c} r={d.r} count={args.count} fill={args.fill} mode={mode}",
        f"codebook min distance {cb.min_distance} (need >= {n * n / 3:.0f})",
        f"eligible rate {d.stats['eligible_rate']:.4f}, worst row shortfall {d.stats['shortfall']}",
        f"max C {summary['max_c']} (2.1n = {2.1 * n:.1f})",
        f"C-threshold distance {c_dist} (radius {n * n / 6:.1f})",
        *rep.lines(),
        f"decode via {mode}: distance {summary['decode_distance']}, index {args.index} -> {rec} "
        f"{'ok' if rec == args.index else 'FAILED'}",
        f"time {wall:.2f}s",
    ]
    _emit(args, summary, lines)
    return 0


FIXTURES = {
    "path": lambda n: [(i, i + 1) for i in range(n - 1)],
    "cycle": lambda n: [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)],
    "star": lambda n: [(0, i) for i in range(1, n)],
    "complete": lambda n: [(i, j) for i in range(n) for j in range(i + 1, n)],
}


def _bench_graph(inst: dict, rng) -> Graph:
    n = int(inst["n"])
    if "fixture" in inst:
        name = inst["fixture"]
        if name not in FIXTURES:
            raise CliError(EXIT_PARSE, f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
        return Graph(n, FIXTURES[name](n))
    return gnp(n, float(inst["p"]), rng)


def cmd_bench(args) -> int:
    try:
        cfg = tomllib.loads(_read_bytes(args.config).decode())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_PARSE, f"{args.config}: {exc}") from None
    instances = cfg.get("instance", [])
    if not instances:
        raise CliError(EXIT_PARSE, f"{args.config}: no [[instance]] tables")
    seed = int(cfg.get("seed", 0))
    queries = int(cfg.get("queries", 1000))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "m", "k", "build_ms", "bytes", "avg_query_ns", "trees_built"])
    for idx, inst in enumerate(instances):
        try:
            k = int(inst["k"])
            rng = np.random.default_rng([seed, idx])
            g = _bench_graph(inst, rng)
        except (KeyError, ValueError, TypeError) as exc:
            raise CliError(EXIT_PARSE, f"{args.config}: instance {idx}: bad field {exc}") from None
        if not 1 <= k <= g.n:
            raise CliError(EXIT_USAGE, f"instance {idx}: k must lie in [1, {g.n}]")
        t0 = time.perf_counter()
        try:
            o = build_oracle(g, k, seed, store_cuts=bool(inst.get("store_cuts", False)), threads=_threads(args))
        except GHTreeError as exc:
            raise CliError(EXIT_BUILD, f"instance {idx}: {exc}") from None
        build_ms = (time.perf_counter() - t0) * 1e3
        size = len(serialize(o))
        us = rng.integers(0, g.n, size=queries)
        vs = (us + rng.integers(1, g.n, size=queries)) % g.n if g.n > 1 else us
        t0 = time.perf_counter_ns()
        for u, v in zip(us.tolist(), vs.tolist()):
            vconn(o, u, v)
        avg = (time.perf_counter_ns() - t0) / max(1, queries) if g.n > 1 else 0
        writer.writerow([g.n, g.m, k, f"{build_ms:.1f}", size, f"{avg:.0f}", o.build_stats["trees_built"]])
    return 0


# ---------------------------------------------------------------------------
# parser


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vconn", description="Vertex-connectivity oracles and element-connectivity Gomory-Hu trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, threads=False):
        sp.add_argument("--json", action="store_true", help="machine-readable summary on stdout")
        if threads:
            sp.add_argument("--threads", type=_positive, default=None, help="worker threads (default: all cores)")

    b = sub.add_parser("build", help="build and serialize an oracle")
    b.add_argument("graph")
    b.add_argument("--k", type=_positive, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--store-cuts", action="store_true")
    b.add_argument("--no-sparsify", action="store_true")
    b.add_argument("--out", required=True)
    common(b, threads=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer one vconn query")
    q.add_argument("oracle")
    q.add_argument("u", type=int)
    q.add_argument("v", type=int)
    q.add_argument("--cut", action="store_true", help="also print a minimum cut")
    common(q)
    q.set_defaults(func=cmd_query)

    bq = sub.add_parser("batch-query", help="answer the queries listed in a pairs file")
    bq.add_argument("oracle")
    bq.add_argument("pairs")
    bq.add_argument("--cut", action="store_true")
    common(bq)
    bq.set_defaults(func=cmd_batch_query)

    t = sub.add_parser("ghtree", help="build a k-bounded or approximate Gomory-Hu tree")
    t.add_argument("graph")
    t.add_argument("--terminals", default="all", help="'all', 'leaves', a file of ids, or a comma list")
    grp = t.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=_positive)
    grp.add_argument("--eps", type=_positive_float)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", default=None)
    common(t)
    t.set_defaults(func=cmd_ghtree)

    v = sub.add_parser("verify", help="check a tree file against its graph")
    v.add_argument("graph")
    v.add_argument("tree")
    common(v)
    v.set_defaults(func=cmd_verify)

    lbp = sub.add_parser("lb", help="run the lower-bound gadget experiment")
    lbp.add_argument("--n", type=int, default=24)
    lbp.add_argument("--c", type=_c_value, default=8, help="integer >= 5 or 'auto' (4/p + 1)")
    lbp.add_argument("--r", type=int, default=None, help="random ones per row of A (default ceil(8 log2 n))")
    lbp.add_argument("--count", type=_positive, default=8)
    lbp.add_argument("--index", type=int, default=0, help="codeword to encode")
    lbp.add_argument("--pairs", type=_positive, default=20, help="random pairs for the formula check")
    lbp.add_argument("--fill", choices=lb.FILLS, default="topup")
    lbp.add_argument("--seed", type=int, default=0)
    lbp.add_argument("--mode", choices=("kappa", "cthresh"), default=None)
    common(lbp)
    lbp.set_defaults(func=cmd_lb)

    be = sub.add_parser("bench", help="benchmark sweep from a TOML config; CSV on stdout")
    be.add_argument("config")
    be.add_argument("--threads", type=_positive, default=None)
    be.set_defaults(func=cmd_bench, json=False)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"vconn {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
