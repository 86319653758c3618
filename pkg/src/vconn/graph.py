"""Undirected multigraphs with dense integer vertex ids.

Graphs are immutable: every transformation returns a new graph.  Parallel
edges are kept (cut sizes count multiplicity); self-loops never exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GraphFormatError(ValueError):
    """Raised when edge-list text cannot be parsed."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class CutSet:
    """A mixed cut: vertices plus edge ids of the host graph."""

    vertices: frozenset[int] = frozenset()
    edges: frozenset[int] = frozenset()

    def __len__(self) -> int:
        return len(self.vertices) + len(self.edges)

    @property
    def is_vertex_cut(self) -> bool:
        return not self.edges


@dataclass(frozen=True)
class SubdivisionMap:
    forward: dict[int, int] = field(default_factory=dict)  # edge id -> new vertex
    inverse: dict[int, int] = field(default_factory=dict)  # new vertex -> edge id


class Graph:
    __slots__ = ("n", "edges", "_csr", "_flow_struct", "_components")

    def __init__(self, n: int, edges=()):
        arr = np.array(edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        arr.flags.writeable = False
        self.n = int(n)
        self.edges = arr
        self._csr = None
        self._flow_struct = None
        self._components = None

    @classmethod
    def _trusted(cls, n: int, edges: np.ndarray) -> "Graph":
        """Skip validation; ``edges`` must already be a valid (m, 2) int64 array."""
        g = object.__new__(cls)
        edges.flags.writeable = False
        g.n, g.edges = int(n), edges
        g._csr = g._flow_struct = g._components = None
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and _edge_multiset(self) == _edge_multiset(other)

    def __hash__(self):
        return hash((self.n, tuple(sorted(_edge_multiset(self).items()))))

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbor, edge_id) arrays; each edge appears at both ends."""
        if self._csr is None:
            a, b = self.edges[:, 0], self.edges[:, 1]
            src = np.concatenate([a, b])
            dst = np.concatenate([b, a])
            eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
            order = np.argsort(src, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
            self._csr = (indptr, dst[order], eid[order])
        return self._csr

    def neighbors(self, v: int) -> np.ndarray:
        indptr, nbr, _ = self.csr()
        return nbr[indptr[v] : indptr[v + 1]]

    def incident(self, v: int) -> list[tuple[int, int]]:
        """Incident (neighbor, edge id) pairs of ``v``."""
        indptr, nbr, eid = self.csr()
        lo, hi = indptr[v], indptr[v + 1]
        return list(zip(nbr[lo:hi].tolist(), eid[lo:hi].tolist()))

    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def components(self) -> np.ndarray:
        """Connected-component label per vertex."""
        if self._components is None:
            if self.n == 0:
                self._components = np.zeros(0, dtype=np.int64)
            else:
                adj = coo_matrix(
                    (np.ones(self.m), (self.edges[:, 0], self.edges[:, 1])),
                    shape=(self.n, self.n),
                )
                _, labels = connected_components(adj, directed=False)
                self._components = labels.astype(np.int64)
        return self._components

    def remove(self, vertices: Iterable[int] = (), edges: Iterable[int] = ()) -> "Graph":
        """Delete vertices (keeping ids, dropping incident edges) and edge ids."""
        dead_v = np.zeros(self.n, dtype=bool)
        dead_v[list(vertices)] = True
        keep = np.ones(self.m, dtype=bool)
        keep[list(edges)] = False
        keep &= ~dead_v[self.edges[:, 0]] & ~dead_v[self.edges[:, 1]]
        return Graph(self.n, self.edges[keep])

    def connected(self, u: int, v: int) -> bool:
        comp = self.components()
        return bool(comp[u] == comp[v])


def _edge_multiset(g: Graph) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for a, b in np.sort(g.edges, axis=1).tolist():
        out[(a, b)] = out.get((a, b), 0) + 1
    return out


def parse_edge_list(text: str | bytes) -> Graph:
    """Parse the ``n m`` header plus ``u v`` lines format.

    Lines starting with ``#`` and blank lines are ignored.  Duplicate lines
    become parallel edges.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise GraphFormatError(1, "input is not ASCII") from exc
    header = None
    edges: list[tuple[int, int]] = []
    last = 1
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last = lineno
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(lineno, f"expected two integers, got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(lineno, f"expected two integers, got {line!r}") from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphFormatError(lineno, "negative header value")
            header = (a, b)
            continue
        n = header[0]
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(lineno, f"endpoint out of range [0, {n})")
        if a == b:
            raise GraphFormatError(lineno, "self-loop")
        edges.append((a, b))
    if header is None:
        raise GraphFormatError(1, "missing 'n m' header")
    if len(edges) != header[1]:
        raise GraphFormatError(last, f"header declares {header[1]} edges, found {len(edges)}")
    return Graph(header[0], edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{a} {b}" for a, b in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi G(n, p)."""
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return Graph(n, np.stack([iu[mask], ju[mask]], axis=1))


def boundary(g: Graph, a: Iterable[int]) -> set[int]:
    inside = np.zeros(g.n, dtype=bool)
    inside[list(a)] = True
    e = g.edges
    x, y = inside[e[:, 0]], inside[e[:, 1]]
    out = np.concatenate([e[x & ~y, 1], e[y & ~x, 0]])
    return set(np.unique(out).tolist())


def contract_many(g: Graph, groups: list[Iterable[int]]) -> tuple[Graph, np.ndarray]:
    """Contract each (disjoint, nonempty) group into one fresh vertex.

    Untouched vertices are renumbered densely in their old order; the group
    vertices get the next free ids, in group order.  Edges inside a group
    vanish, parallel edges created by the contraction are kept.
    """
    mapping = np.full(g.n, -1, dtype=np.int64)
    for gi, grp in enumerate(groups):
        idx = np.fromiter(grp, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("cannot contract an empty vertex set")
        if np.any(mapping[idx] != -1):
            raise ValueError("contraction groups must be disjoint")
        mapping[idx] = -2 - gi
    free = mapping == -1
    n_keep = int(free.sum())
    mapping[free] = np.arange(n_keep)
    grouped = ~free
    mapping[grouped] = n_keep + (-2 - mapping[grouped])
    new = mapping[g.edges]
    new = new[new[:, 0] != new[:, 1]]
    return Graph._trusted(n_keep + len(groups), np.ascontiguousarray(new)), mapping


def contract(g: Graph, s: Iterable[int]) -> tuple[Graph, np.ndarray]:
    s = list(s)
    if not s:
        raise ValueError("cannot contract an empty vertex set")
    return contract_many(g, [s])


def subdivide_terminal_edges(g: Graph, t: Iterable[int]) -> tuple[Graph, SubdivisionMap]:
    """Replace every edge with both ends in ``t`` by a path through a new vertex.

    Original vertex ids are unchanged; new vertices are appended in edge-id
    order.  Edges left alone keep their relative order and come first.
    """
    term = np.zeros(g.n, dtype=bool)
    term[list(t)] = True
    e = g.edges
    inner = term[e[:, 0]] & term[e[:, 1]]
    if not inner.any():
        return g, SubdivisionMap()
    ids = np.flatnonzero(inner)
    mids = g.n + np.arange(len(ids))
    a, b = e[ids, 0], e[ids, 1]
    new_edges = np.concatenate(
        [e[~inner], np.stack([a, mids], axis=1), np.stack([mids, b], axis=1)]
    )
    fwd = dict(zip(ids.tolist(), mids.tolist()))
    inv = {v: k for k, v in fwd.items()}
    return Graph(g.n + len(ids), new_edges), SubdivisionMap(fwd, inv)


def unsubdivide(h: Graph, smap: SubdivisionMap, n: int) -> Graph:
    """Undo :func:`subdivide_terminal_edges` given the original vertex count."""
    ends: dict[int, list[int]] = {x: [] for x in smap.inverse}
    kept = []
    for a, b in h.edges.tolist():
        if a in ends:
            ends[a].append(b)
        elif b in ends:
            ends[b].append(a)
        else:
            kept.append((a, b))
    for x, pair in ends.items():
        if len(pair) != 2:
            raise ValueError(f"subdivision vertex {x} has degree {len(pair)}")
        kept.append(tuple(pair))
    return Graph(n, kept)


def sparsify_edge_ids(g: Graph, k: int) -> np.ndarray:
    """Edge ids of the first ``k`` scan-first-search forests (Nagamochi-Ibaraki).

    Parallel copies beyond multiplicity ``k`` are dropped first.  Vertices are
    scanned in maximum-adjacency order; an edge to an unscanned neighbour ``y``
    lands in forest ``r(y)+1`` where ``r(y)`` counts earlier such edges.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.m == 0:
        return np.zeros(0, dtype=np.int64)
    key = np.sort(g.edges, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    sk = key[order]
    starts = np.ones(len(sk), dtype=bool)
    starts[1:] = np.any(sk[1:] != sk[:-1], axis=1)
    run_id = np.cumsum(starts) - 1
    first = np.flatnonzero(starts)
    rank = np.arange(len(sk)) - first[run_id]
    allowed = np.zeros(g.m, dtype=bool)
    allowed[order[rank < k]] = True

    indptr, nbr, eid = g.csr()
    r = np.zeros(g.n, dtype=np.int64)
    scanned = np.zeros(g.n, dtype=bool)
    keep = np.zeros(g.m, dtype=bool)
    # bucket queue over r values; stale entries are skipped lazily
    buckets: list[list[int]] = [list(range(g.n - 1, -1, -1))]
    top = 0
    remaining = g.n
    while remaining:
        while top >= 0 and not buckets[top]:
            top -= 1
        x = buckets[top].pop()
        if scanned[x] or r[x] != top:
            continue
        scanned[x] = True
        remaining -= 1
        for idx in range(indptr[x], indptr[x + 1]):
            e = eid[idx]
            y = nbr[idx]
            if scanned[y] or not allowed[e]:
                continue
            r[y] += 1
            if r[y] <= k:
                keep[e] = True
            ry = int(r[y])
            if ry == len(buckets):
                buckets.append([])
            buckets[ry].append(int(y))
            if ry > top:
                top = ry
    return np.flatnonzero(keep)


def sparsify(g: Graph, k: int) -> Graph:
    return Graph(g.n, g.edges[sparsify_edge_ids(g, k)])
