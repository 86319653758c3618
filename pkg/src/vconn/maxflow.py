"""Unit-capacity max flow and the vertex-splitting reductions built on it.

Every graph vertex ``x`` becomes ``x_in = 2x`` and ``x_out = 2x + 1`` joined
by an arc of capacity 1 (cuttable) or ``INF`` (terminal).  Graph edges become
arcs ``a_out -> b_in`` and ``b_out -> a_in``.  An edge is only worth cutting
when both endpoints are terminals; every other edge arc is ``INF`` so that
minimum cuts come out as vertex sets wherever possible.

These routines double as the brute-force reference for the rest of the
package: one flow per queried pair, no cleverness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .graph import CutSet, Graph

INF = 1 << 40
UNBOUNDED = INF


class ClampedResultError(RuntimeError):
    """A clamped flow result carries no meaningful cut."""


class FlowNetwork:
    """Directed network with paired reverse arcs.

    Build with :meth:`add_arc`, or with :func:`split_network` for graphs.
    ``node_vertex``/``node_side`` map nodes back to graph vertices, and
    ``arc_vertex``/``arc_edge`` say which graph element an arc stands for.
    """

    def __init__(self, num_nodes: int, source=None, sink=None):
        self.num_nodes = num_nodes
        self._tail: list[int] = []
        self._head: list[int] = []
        self._cap: list[int] = []
        self._arc_vertex: list[int] = []
        self._arc_edge: list[int] = []
        self.sources = _as_nodes(source)
        self.sinks = _as_nodes(sink)
        self.node_vertex = np.arange(num_nodes, dtype=np.int64)
        self.node_side = np.ones(num_nodes, dtype=bool)
        self._frozen = None

    def add_arc(self, u: int, v: int, cap: int, *, vertex: int = -1, edge: int = -1) -> int:
        if cap < 0:
            raise ValueError("capacity must be non-negative")
        if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
            raise ValueError("arc endpoint out of range")
        a = len(self._head)
        self._tail += [u, v]
        self._head += [v, u]
        self._cap += [cap, 0]
        self._arc_vertex += [vertex, -1]
        self._arc_edge += [edge, -1]
        self._frozen = None
        return a

    def _freeze(self):
        if self._frozen is None:
            self._frozen = _compile(
                self.num_nodes,
                np.array(self._tail, dtype=np.int64),
                np.array(self._head, dtype=np.int64),
            ) + (np.array(self._cap, dtype=np.int64),)
            self.arc_vertex = np.array(self._arc_vertex, dtype=np.int64)
            self.arc_edge = np.array(self._arc_edge, dtype=np.int64)
        return self._frozen

    @property
    def arrays(self):
        """(start, order, head, capacity) arrays."""
        return self._freeze()

    def with_terminals(self, source, sink) -> "FlowNetwork":
        """Shallow copy of this network with other source/sink nodes."""
        other = object.__new__(FlowNetwork)
        other.__dict__.update(self.__dict__)
        other.sources = _as_nodes(source)
        other.sinks = _as_nodes(sink)
        return other


def _as_nodes(x) -> np.ndarray:
    if x is None:
        return np.zeros(0, dtype=np.int64)
    if np.isscalar(x):
        return np.array([x], dtype=np.int64)
    return np.array(sorted(set(int(v) for v in x)), dtype=np.int64)


def _compile(num_nodes: int, tail: np.ndarray, head: np.ndarray):
    order = np.argsort(tail, kind="stable").astype(np.int64)
    start = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(tail, minlength=num_nodes), out=start[1:])
    return start, order, head


@dataclass
class FlowResult:
    value: int
    reachable: np.ndarray  # bool mask over network nodes
    clamped: bool
    cut: CutSet | None


def max_flow(net: FlowNetwork, limit: int | None = None) -> FlowResult:
    """Maximum flow from ``net.sources`` to ``net.sinks``, capped at ``limit``.

    When the flow reaches ``limit`` the result is marked clamped and the cut
    is omitted.
    """
    if len(net.sources) == 0 or len(net.sinks) == 0:
        raise ValueError("network needs a source and a sink")
    if np.intersect1d(net.sources, net.sinks).size:
        raise ValueError("source and sink must differ")
    start, order, head, cap0 = net.arrays
    cap = cap0.copy()
    src = np.zeros(net.num_nodes, dtype=np.bool_)
    src[net.sources] = True
    snk = np.zeros(net.num_nodes, dtype=np.bool_)
    snk[net.sinks] = True
    lim = UNBOUNDED if limit is None else int(limit)
    if lim < 1:
        raise ValueError("limit must be positive")
    value = int(_kernels.dinic(start, order, head, cap, src, snk, lim))
    reach = _kernels.residual_reach(start, order, head, cap, src)
    clamped = limit is not None and value >= lim
    cut = None if clamped else _cut_from_reach(net, reach)
    return FlowResult(value, reach, clamped, cut)


def _cut_from_reach(net: FlowNetwork, reach: np.ndarray) -> CutSet:
    start, order, head, cap0 = net.arrays
    fwd = np.arange(0, len(head), 2)
    tail = head[fwd + 1]
    crossing = fwd[reach[tail] & ~reach[head[fwd]] & (cap0[fwd] > 0)]
    verts = net.arc_vertex[crossing]
    edges = net.arc_edge[crossing]
    return CutSet(frozenset(verts[verts >= 0].tolist()), frozenset(edges[edges >= 0].tolist()))


def min_source_side(net: FlowNetwork, result: FlowResult) -> set[int]:
    """Inclusion-minimal source side of a minimum cut, as graph vertices."""
    if result.clamped:
        raise ClampedResultError("clamped flow has no meaningful source side")
    nodes = np.flatnonzero(result.reachable & net.node_side)
    return set(net.node_vertex[nodes].tolist())


# ---------------------------------------------------------------------------
# split networks for graphs


class SplitStructure:
    """Arc layout of the split network of a graph (capacities excluded).

    Arc ``2x`` is ``x_in -> x_out``; edge ``e = (a, b)`` owns arcs
    ``2n + 4e`` (``a_out -> b_in``) and ``2n + 4e + 2`` (``b_out -> a_in``).
    """

    __slots__ = ("n", "m", "ea", "eb", "start", "order", "head", "edge_arc")

    def __init__(self, g: Graph):
        self.n, self.m = g.n, g.m
        self.ea = np.ascontiguousarray(g.edges[:, 0])
        self.eb = np.ascontiguousarray(g.edges[:, 1])
        self.start, self.order, self.head = _kernels.split_csr(g.n, self.ea, self.eb)
        self.edge_arc = 2 * g.n + 4 * np.arange(g.m, dtype=np.int64)

    def capacities(self, terminal: np.ndarray, edge_cap: int | None = None) -> np.ndarray:
        """Capacity array for the terminal mask.

        Terminals get ``INF`` vertex arcs.  Edge arcs are 1 between two
        terminals and ``INF`` otherwise, unless ``edge_cap`` overrides them.
        """
        cap = _kernels.split_caps(self.n, self.ea, self.eb, np.asarray(terminal, dtype=np.bool_), INF)
        if edge_cap is not None and self.m:
            cap[self.edge_arc] = edge_cap
            cap[self.edge_arc + 2] = edge_cap
        return cap


def split_structure(g: Graph) -> SplitStructure:
    if g._flow_struct is None:
        g._flow_struct = SplitStructure(g)
    return g._flow_struct


def split_network(
    g: Graph,
    terminals: Iterable[int],
    sources: Iterable[int],
    sinks: Iterable[int],
    *,
    edge_cap: int | None = None,
) -> FlowNetwork:
    """Split network of ``g`` with the given terminals made uncuttable.

    ``sources`` start at their out-node, ``sinks`` end at their in-node.
    """
    st = split_structure(g)
    term = np.zeros(g.n, dtype=bool)
    term[list(terminals)] = True
    net = object.__new__(FlowNetwork)
    net.num_nodes = 2 * g.n
    net.sources = np.array(sorted(2 * int(s) + 1 for s in sources), dtype=np.int64)
    net.sinks = np.array(sorted(2 * int(t) for t in sinks), dtype=np.int64)
    net.node_vertex = np.arange(2 * g.n, dtype=np.int64) // 2
    net.node_side = (np.arange(2 * g.n) % 2) == 1
    arc_vertex = np.full(len(st.head), -1, dtype=np.int64)
    arc_vertex[0 : 2 * g.n : 2] = np.arange(g.n)
    arc_edge = np.full(len(st.head), -1, dtype=np.int64)
    arc_edge[st.edge_arc] = np.arange(g.m)
    arc_edge[st.edge_arc + 2] = np.arange(g.m)
    net.arc_vertex = arc_vertex
    net.arc_edge = arc_edge
    net._frozen = (st.start, st.order, st.head, st.capacities(term, edge_cap))
    return net


def element_connectivity(
    g: Graph, terminals: Iterable[int], u: int, v: int, limit: int | None = None
) -> tuple[int, CutSet | None]:
    """min{kappa'_{G,U}(u, v), limit} and, when unclamped, a minimum mixed cut.

    The cut holds only non-terminal vertices and edges joining two terminals.
    """
    terminals = set(terminals)
    if u not in terminals or v not in terminals:
        raise ValueError("u and v must be terminals")
    if u == v:
        raise ValueError("u and v must differ")
    net = split_network(g, terminals, [u], [v])
    res = max_flow(net, limit)
    return res.value, res.cut


def min_vertex_cut(g: Graph, u: int, v: int, limit: int | None = None) -> tuple[int, CutSet | None]:
    """min{kappa(u, v), limit} with a minimum mixed cut.

    Edges joining ``u`` and ``v`` are the only edges the cut may contain.
    """
    if u == v:
        raise ValueError("u and v must differ")
    return element_connectivity(g, {u, v}, u, v, limit)


def vertex_connectivity(g: Graph, u: int, v: int, limit: int | None = None) -> int:
    return min_vertex_cut(g, u, v, limit)[0]


def edge_connectivity(g: Graph, u: int, v: int, limit: int | None = None) -> int:
    """lambda(u, v) on an unsplit network (each edge a unit arc both ways)."""
    if u == v:
        raise ValueError("u and v must differ")
    net = FlowNetwork(g.n, u, v)
    for e, (a, b) in enumerate(g.edges.tolist()):
        net.add_arc(a, b, 1, edge=e)
        net.add_arc(b, a, 1, edge=e)
    return max_flow(net, limit).value


def pairs_vertex_connectivity(g: Graph, pairs, limit: int) -> np.ndarray:
    """min{kappa(u, v), limit} for each ``(u, v)`` in ``pairs``, sharing one split structure."""
    st = split_structure(g)
    src = np.zeros(2 * g.n, dtype=np.bool_)
    snk = np.zeros(2 * g.n, dtype=np.bool_)
    term = np.zeros(g.n, dtype=bool)
    out = []
    for u, v in pairs:
        if u == v:
            raise ValueError("u and v must differ")
        term[[u, v]] = True
        cap = st.capacities(term)
        term[[u, v]] = False
        src[2 * u + 1] = True
        snk[2 * v] = True
        out.append(_kernels.dinic(st.start, st.order, st.head, cap, src, snk, limit))
        src[2 * u + 1] = False
        snk[2 * v] = False
    return np.array(out, dtype=np.int64)


def all_pairs_vertex_connectivity(g: Graph, limit: int) -> np.ndarray:
    """Matrix of min{kappa(u, v), limit}; the diagonal holds ``limit``."""
    out = np.full((g.n, g.n), limit, dtype=np.int64)
    iu, iv = np.triu_indices(g.n, 1)
    vals = pairs_vertex_connectivity(g, zip(iu.tolist(), iv.tolist()), limit)
    out[iu, iv] = vals
    out[iv, iu] = vals
    return out


def disjoint_paths(net: FlowNetwork, result: FlowResult) -> list[list[int]]:
    """Decompose the flow of ``result`` into source-to-sink node paths.

    Recomputes the flow (the result only keeps the residual reach), then
    peels off paths greedily.
    """
    start, order, head, cap0 = net.arrays
    cap = cap0.copy()
    src = np.zeros(net.num_nodes, dtype=np.bool_)
    src[net.sources] = True
    snk = np.zeros(net.num_nodes, dtype=np.bool_)
    snk[net.sinks] = True
    _kernels.dinic(start, order, head, cap, src, snk, result.value)
    flow = np.zeros(len(head), dtype=np.int64)
    fwd = np.arange(0, len(head), 2)
    flow[fwd] = cap0[fwd] - cap[fwd]
    paths = []
    for s in net.sources.tolist():
        while True:
            path = [s]
            seen = {s}
            x = s
            while not snk[x]:
                nxt = -1
                for idx in range(start[x], start[x + 1]):
                    a = order[idx]
                    if a % 2 == 0 and flow[a] > 0 and head[a] not in seen:
                        nxt = a
                        break
                if nxt < 0:
                    break
                flow[nxt] -= 1
                x = int(head[nxt])
                seen.add(x)
                path.append(x)
            if len(path) == 1 or not snk[x]:
                break
            paths.append(path)
    return paths
