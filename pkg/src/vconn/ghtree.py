"""Gomory-Hu trees for element connectivity.

``approx_gh_tree`` builds a (1+eps)-approximate tree by repeatedly peeling
off small-side isolating cuts (``cut_threshold_step``) and recursing on the
two kinds of contracted graphs; ``k_gh_tree`` runs the same recursion with
an accuracy fine enough to be exact below ``k`` and stops as soon as the
global element connectivity reaches ``k``.

Inside the recursion every graph is in "working" vocabulary: the input graph
with each edge between two terminals subdivided once.  Contracted helper
vertices have label -1.  Cuts are mapped back to vertices and edge ids of the
input graph only when the tree is assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import _kernels
from .graph import CutSet, Graph, SubdivisionMap, contract_many, subdivide_terminal_edges
from .isolating import IsolatingCut
from .maxflow import INF, element_connectivity, split_structure

BOTTOM = -1


class GHTreeError(RuntimeError):
    """The recursion exceeded its depth cap or broke an internal invariant."""


@dataclass
class GHTree:
    """Weighted tree with terminal embedding ``f`` and per-edge cuts.

    ``edges[e] = (a, b)`` joins tree nodes ``a`` and ``b`` with weight
    ``weights[e]``; ``cuts[e]`` is a cut of the input graph of that size.
    """

    num_nodes: int
    edges: np.ndarray
    weights: np.ndarray
    f: dict[int, int]
    cuts: list[CutSet]
    k: int | None = None
    eps: float | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def adjacency(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_nodes)]
        for e, (a, b) in enumerate(self.edges.tolist()):
            adj[a].append((b, e))
            adj[b].append((a, e))
        return adj

    def path_edges(self, a: int, b: int) -> list[int]:
        """Edge ids on the tree path between nodes ``a`` and ``b``."""
        if a == b:
            return []
        adj = self.adjacency()
        prev = {a: (-1, -1)}
        stack = [a]
        while stack:
            x = stack.pop()
            for y, e in adj[x]:
                if y not in prev:
                    prev[y] = (x, e)
                    stack.append(y)
        out = []
        x = b
        while x != a:
            x, e = prev[x]
            out.append(e)
        return out

    def bottleneck(self, u: int, v: int) -> tuple[int, int] | None:
        """(min weight, witness edge) between the nodes of terminals u and v.

        None when both terminals sit on the same node.
        """
        path = self.path_edges(self.f[u], self.f[v])
        if not path:
            return None
        e = min(path, key=lambda i: (self.weights[i], i))
        return int(self.weights[e]), e


@dataclass
class PartialEmbedding:
    """Map from working-graph vertices to tree nodes; ``BOTTOM`` marks cut vertices.

    ``working`` is the input graph with terminal-terminal edges subdivided;
    ``smap`` translates the extra vertices back to edge ids.
    """

    g: np.ndarray
    working: Graph
    smap: SubdivisionMap
    cut_vertices: list[np.ndarray]

    def undefined(self) -> set[int]:
        return set(np.flatnonzero(self.g == BOTTOM).tolist())

    def in_some_cut(self) -> set[int]:
        out: set[int] = set()
        for c in self.cut_vertices:
            out.update(c.tolist())
        return out


@dataclass
class ThresholdLevel:
    r: list[int]
    r_sm: list[int]
    sides: dict[int, IsolatingCut]


@dataclass
class CutThresholdOutput:
    s: int
    levels: list[ThresholdLevel]


@dataclass
class SplitRecord:
    """Everything one recursion step decided; handed to the optional tracer."""

    graph: Graph
    u: np.ndarray
    f: np.ndarray
    lam: float
    w: int
    s: int
    level: int
    smalls: list[tuple]  # (v, S_v, boundary, G_v, U_v, F_v, vertex map into G_v)
    g_lg: Graph | None = None
    u_lg: np.ndarray | None = None
    f_lg: np.ndarray | None = None
    map_lg: np.ndarray | None = None


# ---------------------------------------------------------------------------
# cut-threshold step


def _threshold(
    g: Graph, u: np.ndarray, f_in: np.ndarray, w: int, rng: np.random.Generator, counter: list[int]
) -> CutThresholdOutput:
    """Algorithm core; level sides are (side array, boundary array) pairs."""
    nu = len(u)
    s = int(u[rng.integers(nu)])
    r = np.sort(u)
    half = nu / 2
    levels = []
    st = split_structure(g)
    u_mask = np.zeros(g.n, dtype=bool)
    u_mask[u] = True
    mask = u_mask.copy()
    mask[f_in] = True
    for _ in range(int(math.floor(math.log2(nu))) + 1):
        sides: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        r_sm: list[int] = []
        if len(r) >= 2:
            # terminals outside R^j stay uncuttable, exactly like F
            sizes, owner, bd_ptr, bd, calls = _kernels.isolating(
                st.start, st.order, st.head, st.capacities(mask), r, w, INF
            )
            counter[0] += int(calls)
            in_u = np.bincount(owner[u_mask & (owner >= 0)], minlength=len(r))
            for i, v in enumerate(r.tolist()):
                if v == s or sizes[i] < 0 or in_u[i] > half:
                    continue
                r_sm.append(v)
                sides[v] = (np.flatnonzero(owner == i), bd[bd_ptr[i] : bd_ptr[i + 1]])
        levels.append(ThresholdLevel(r.tolist(), r_sm, sides))
        keep = rng.random(len(r)) < 0.5
        keep |= r == s
        r = r[keep]
    return CutThresholdOutput(s, levels)


def cut_threshold_step(
    g: Graph,
    u_set: Iterable[int],
    f_in: Iterable[int],
    w_threshold: int,
    rng: np.random.Generator | int | None = None,
) -> CutThresholdOutput:
    """One round of random isolating cuts at threshold ``w_threshold``.

    Edges between two terminals are subdivided first when needed; the
    reported sides then drop the helper vertices again.
    """
    u = np.array(sorted(set(int(x) for x in u_set)), dtype=np.int64)
    f = np.array(sorted(set(int(x) for x in f_in)), dtype=np.int64)
    if len(u) < 2:
        raise ValueError("need at least two terminals")
    if np.intersect1d(u, f).size:
        raise ValueError("terminal and forbidden sets must be disjoint")
    rng = np.random.default_rng(rng)
    h, smap = subdivide_terminal_edges(g, np.concatenate([u, f]))
    if w_threshold < 0:
        raise ValueError("threshold must be non-negative")
    out = _threshold(h, u, f, int(w_threshold), rng, [0])
    for lvl in out.levels:
        for v, (side, bd) in lvl.sides.items():
            lvl.sides[v] = IsolatingCut(frozenset(x for x in side.tolist() if x < g.n), frozenset(bd.tolist()))
    return out


# ---------------------------------------------------------------------------
# recursion


@dataclass
class _Ctx:
    eps: float
    k: int | None
    exact_lambda: bool
    period: int
    depth_cap: int
    trace: Callable[[SplitRecord], None] | None
    nodes: int = 0
    tree_edges: list = field(default_factory=list)
    tree_weights: list = field(default_factory=list)
    tree_cuts: list = field(default_factory=list)
    flow_calls: int = 0
    max_small_depth: int = 0
    max_chain: int = 0
    lambdas: list = field(default_factory=list)


def _global_min(g: Graph, u: np.ndarray, f: np.ndarray, cap: int) -> int:
    """min over pairs in ``u`` of element connectivity with terminals ``u | f``."""
    st = split_structure(g)
    mask = np.zeros(g.n, dtype=bool)
    mask[u] = True
    mask[f] = True
    cap0 = st.capacities(mask)
    best, _ = _kernels.min_flow_to_targets(st.start, st.order, st.head, cap0, 2 * u[0] + 1, 2 * u[1:], cap)
    return int(best)


def _build(
    ctx: _Ctx,
    graph: Graph,
    labels: np.ndarray,
    u: np.ndarray,
    f: np.ndarray,
    lam: float,
    small_depth: int,
    rng: np.random.Generator,
) -> np.ndarray:
    ctx.max_small_depth = max(ctx.max_small_depth, small_depth)
    frames = []
    lg_depth = 0
    while True:
        if len(u) == 1:
            break
        if ctx.exact_lambda:
            cap = ctx.k if ctx.k is not None else INF
            lam = float(_global_min(graph, u, f, cap))
            ctx.flow_calls += len(u) - 1
        elif lg_depth > 0 and lg_depth % ctx.period == 0:
            lam *= 1 + ctx.eps
        if ctx.trace:
            ctx.lambdas.append((graph, u, f, lam))
        if ctx.k is not None and lam >= ctx.k:
            break
        w = int(math.floor((1 + ctx.eps) * lam + 1e-9))
        counter = [0]
        out = _threshold(graph, u, f, w, rng, counter)
        ctx.flow_calls += counter[0]
        best_i, best_cover = 0, -1
        u_mask = np.zeros(graph.n, dtype=bool)
        u_mask[u] = True
        for i, lvl in enumerate(out.levels):
            # sides are disjoint, so the union size is a plain sum
            covered = sum(int(np.count_nonzero(u_mask[lvl.sides[v][0]])) for v in lvl.r_sm)
            if covered > best_cover:
                best_i, best_cover = i, covered
        lg_depth += 1
        ctx.max_chain = max(ctx.max_chain, lg_depth)
        if lg_depth > ctx.depth_cap:
            raise GHTreeError(f"recursion depth cap {ctx.depth_cap} exceeded (lambda={lam}, |U|={len(u)})")
        lvl = out.levels[best_i]
        if not lvl.r_sm:
            continue
        f_mask = np.zeros(graph.n, dtype=bool)
        f_mask[f] = True
        children = rng.spawn(len(lvl.r_sm))
        smalls = []
        record = SplitRecord(graph, u, f, lam, w, out.s, best_i, []) if ctx.trace else None
        for v, crng in zip(lvl.r_sm, children):
            side, bd = lvl.sides[v]
            work_cut = labels[bd]
            if np.any(work_cut < 0):
                raise GHTreeError("a contracted vertex landed in a cut")
            if record is None and np.count_nonzero(u_mask[side]) == 1:
                # a lone terminal is a leaf, so skip building its contraction
                ctx.max_small_depth = max(ctx.max_small_depth, small_depth + 1)
                leaf = ctx.nodes
                ctx.nodes += 1
                smalls.append((side, bd, np.full(len(side), leaf, dtype=np.int64), leaf, len(bd), work_cut))
                continue
            keep = np.zeros(graph.n, dtype=bool)
            keep[side] = True
            keep[bd] = True
            g_v, map_v = contract_many(graph, [np.flatnonzero(~keep)])
            x_v = g_v.n - 1
            labels_v = np.full(g_v.n, -1, dtype=np.int64)
            labels_v[map_v[keep]] = labels[keep]
            u_v = np.sort(map_v[side[u_mask[side]]])
            f_v = np.sort(np.append(map_v[side[f_mask[side]]], x_v))
            if record is not None:
                record.smalls.append((v, side, bd, g_v, u_v, f_v, map_v))
            g_of_v = _build(ctx, g_v, labels_v, u_v, f_v, lam, small_depth + 1, crng)
            smalls.append((side, bd, g_of_v[map_v[side]], int(g_of_v[x_v]), len(bd), work_cut))
        groups = [s[0] for s in smalls]
        g_lg, map_lg = contract_many(graph, groups)
        n_plain = g_lg.n - len(groups)
        labels_lg = np.full(g_lg.n, -1, dtype=np.int64)
        absorbed = np.zeros(graph.n, dtype=bool)
        for side in groups:
            absorbed[side] = True
        labels_lg[map_lg[~absorbed]] = labels[~absorbed]
        u_lg = np.sort(map_lg[u[~absorbed[u]]])
        y_ids = np.arange(n_plain, g_lg.n, dtype=np.int64)
        f_lg = np.sort(np.concatenate([map_lg[f[~absorbed[f]]], y_ids]))
        if record is not None:
            record.g_lg, record.u_lg, record.f_lg, record.map_lg = g_lg, u_lg, f_lg, map_lg
            ctx.trace(record)
        frames.append((map_lg, smalls, y_ids))
        graph, labels, u, f = g_lg, labels_lg, u_lg, f_lg

    node = ctx.nodes
    ctx.nodes += 1
    g_cur = np.full(graph.n, node, dtype=np.int64)
    for map_lg, smalls, y_ids in reversed(frames):
        g_prev = g_cur[map_lg]
        for side, _, g_side, _, _, _ in smalls:
            g_prev[side] = g_side
        for (side, bd, _, gx, w, work_cut), y in zip(smalls, y_ids.tolist()):
            g_prev[bd] = BOTTOM
            gy = int(g_cur[y])
            if gx < 0 or gy < 0:
                raise GHTreeError("link endpoint has an undefined embedding")
            ctx.tree_edges.append((gx, gy))
            ctx.tree_weights.append(w)
            ctx.tree_cuts.append(work_cut)
        g_cur = g_prev
    return g_cur


def _prepare(g: Graph, u_set, f_set):
    u = np.array(sorted(set(int(x) for x in u_set)), dtype=np.int64)
    f = np.array(sorted(set(int(x) for x in f_set)), dtype=np.int64)
    if len(u) == 0:
        raise ValueError("terminal set must be nonempty")
    if np.intersect1d(u, f).size:
        raise ValueError("terminal and forbidden sets must be disjoint")
    both = np.concatenate([u, f])
    if both.size and (both.min() < 0 or both.max() >= g.n):
        raise ValueError("terminal id out of range")
    h, smap = subdivide_terminal_edges(g, both)
    return u, f, h, smap


def _to_original(work_cut: np.ndarray, n: int, smap: SubdivisionMap) -> CutSet:
    verts = frozenset(int(x) for x in work_cut if x < n)
    edges = frozenset(smap.inverse[int(x)] for x in work_cut if x >= n)
    return CutSet(verts, edges)


def _run(
    g: Graph,
    u_set,
    f_set,
    eps0: float,
    k: int | None,
    rng,
    c_lambda: float,
    lam_mode: str,
    trace,
    depth_cap: int | None = None,
) -> tuple[GHTree, PartialEmbedding]:
    if eps0 <= 0:
        raise ValueError("eps must be positive")
    u, f, h, smap = _prepare(g, u_set, f_set)
    rng = np.random.default_rng(rng)
    levels = max(1, math.ceil(math.log2(len(u)))) if len(u) > 1 else 1
    # (1 + eps)^levels <= 1 + eps0 bounds the compounded small-side loss
    eps = (1 + eps0) ** (1 / levels) - 1
    logn = max(1.0, math.log2(max(2, h.n)))
    period = max(1, math.ceil(c_lambda * logn**3))
    if lam_mode == "auto":
        lam_mode = "exact" if h.n <= 1000 else "schedule"
    if lam_mode not in ("exact", "schedule"):
        raise ValueError(f"unknown lambda mode {lam_mode!r}")
    cap = 64 * period if depth_cap is None else depth_cap
    ctx = _Ctx(eps, k, lam_mode == "exact", period, cap, trace)
    labels = np.arange(h.n, dtype=np.int64)
    g_top = _build(ctx, h, labels, u, f, 1.0, 0, rng)
    edges = np.array(ctx.tree_edges, dtype=np.int64).reshape(-1, 2)
    weights = np.array(ctx.tree_weights, dtype=np.int64)
    cuts = [_to_original(c, g.n, smap) for c in ctx.tree_cuts]
    tree = GHTree(
        ctx.nodes,
        edges,
        weights,
        {int(x): int(g_top[x]) for x in u},
        cuts,
        k=k,
        eps=None if k is not None else eps0,
        stats={
            "flow_calls": ctx.flow_calls,
            "max_small_depth": ctx.max_small_depth,
            "max_chain": ctx.max_chain,
            "eps_level": eps,
            "lambda_mode": lam_mode,
            "lambdas": ctx.lambdas if trace else None,
        },
    )
    emb = PartialEmbedding(g_top, h, smap, list(ctx.tree_cuts))
    return tree, emb


def approx_gh_tree(
    g: Graph,
    u_set: Iterable[int],
    f_set: Iterable[int] = (),
    eps: float = 0.5,
    rng=None,
    *,
    c_lambda: float = 4.0,
    lam_mode: str = "auto",
    trace: Callable[[SplitRecord], None] | None = None,
    depth_cap: int | None = None,
) -> tuple[GHTree, PartialEmbedding]:
    """(1+eps)-approximate element-connectivity Gomory-Hu tree.

    Connectivity is measured with terminal set ``u_set | f_set``; only
    ``u_set`` is embedded.  ``lam_mode`` picks between recomputing the
    global minimum at every step ("exact") and the slowly rising lower bound
    ("schedule"); "auto" uses the former for graphs up to 1000 vertices.
    """
    return _run(g, u_set, f_set, eps, None, rng, c_lambda, lam_mode, trace, depth_cap)


def k_gh_tree(
    g: Graph,
    u_set: Iterable[int],
    k: int,
    rng=None,
    *,
    c_eps: float = 0.5,
    c_lambda: float = 4.0,
    lam_mode: str = "auto",
    trace: Callable[[SplitRecord], None] | None = None,
    depth_cap: int | None = None,
) -> GHTree:
    """k-bounded element-connectivity Gomory-Hu tree.

    Terminals on the same node have connectivity at least ``k``; otherwise
    the path bottleneck is the exact connectivity.
    """
    if k < 1:
        raise ValueError("k must be positive")
    tree, _ = _run(g, u_set, (), c_eps / k, k, rng, c_lambda, lam_mode, trace, depth_cap)
    return tree


# ---------------------------------------------------------------------------
# verification


def verify_gh_tree(
    g: Graph,
    u_set: Iterable[int],
    tree: GHTree,
    *,
    k: int | None = None,
    eps: float | None = None,
    check_cuts: bool = True,
) -> list[str]:
    """Check flow and cut equivalency against direct max flows.

    Returns human-readable violations; an empty list means the tree is valid.
    """
    u = sorted(set(int(x) for x in u_set))
    if k is None and eps is None:
        k, eps = tree.k, tree.eps
    bad: list[str] = []
    nn = tree.num_nodes
    if len(tree.edges) != max(0, nn - 1):
        bad.append(f"tree has {nn} nodes but {len(tree.edges)} edges")
        return bad
    parent = list(range(nn))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in tree.edges.tolist():
        ra, rb = find(a), find(b)
        if ra == rb:
            bad.append(f"edge ({a},{b}) closes a cycle")
            return bad
        parent[ra] = rb
    missing = [x for x in u if x not in tree.f]
    if missing:
        bad.append(f"terminals without a node: {missing}")
        return bad
    hosted = set(tree.f.values())
    empty = [t for t in range(nn) if t not in hosted]
    if empty:
        bad.append(f"nodes hosting no terminal: {empty}")
    if k is not None:
        for e, w in enumerate(tree.weights.tolist()):
            if not 0 <= w < k:
                bad.append(f"edge {e} weight {w} outside [0, {k})")
    limit = k
    for i, a in enumerate(u):
        for b in u[i + 1 :]:
            truth = element_connectivity(g, u, a, b, None if limit is None else limit)[0]
            bn = tree.bottleneck(a, b)
            if k is not None:
                if bn is None:
                    if truth < k:
                        bad.append(f"pair ({a},{b}): same node but connectivity {truth} < {k}")
                elif bn[0] != truth:
                    bad.append(f"pair ({a},{b}): bottleneck {bn[0]} != connectivity {truth}")
            else:
                if bn is None:
                    bad.append(f"pair ({a},{b}): same node in an approximate tree")
                elif not truth <= bn[0] <= (1 + eps) * truth + 1e-9:
                    bad.append(f"pair ({a},{b}): bottleneck {bn[0]} outside [{truth}, {(1 + eps) * truth:.3f}]")
    if check_cuts:
        u_set_ = set(u)
        sides = _edge_sides(tree)
        for e, cut in enumerate(tree.cuts):
            w = int(tree.weights[e])
            if len(cut) != w:
                bad.append(f"edge {e}: cut size {len(cut)} != weight {w}")
            if cut.vertices & u_set_:
                bad.append(f"edge {e}: cut contains terminals {sorted(cut.vertices & u_set_)}")
            h = g.remove(cut.vertices, cut.edges)
            comp = h.components()
            left = [x for x in u if sides[e][tree.f[x]]]
            right = [x for x in u if not sides[e][tree.f[x]]]
            lc = {int(comp[x]) for x in left}
            clash = [x for x in right if int(comp[x]) in lc]
            if clash:
                bad.append(f"edge {e}: cut leaves terminal {clash[0]} connected across")
    return bad


def _edge_sides(tree: GHTree) -> list[np.ndarray]:
    """For each edge, a node mask of the side containing its first endpoint."""
    adj = tree.adjacency()
    out = []
    for e, (a, b) in enumerate(tree.edges.tolist()):
        mask = np.zeros(tree.num_nodes, dtype=bool)
        mask[a] = True
        stack = [a]
        while stack:
            x = stack.pop()
            for y, e2 in adj[x]:
                if e2 != e and not mask[y]:
                    mask[y] = True
                    stack.append(y)
        out.append(mask)
    return out
