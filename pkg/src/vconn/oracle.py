"""Vertex-connectivity oracle: terminal family + one k-bounded tree per set.

``vconn(u, v)`` looks up the (at most ``h_count``) sets holding both
vertices and takes the smallest tree-path bottleneck between them, capped at
``k``.  Vertices in different components short-circuit to 0.

All trees live in flat arrays: node ``x`` of set ``i`` has global id
``node_off[i] + x``.  Trees are rooted at their node 0 and every non-root node
owns the edge to its parent, so a witness edge is just a node id.
"""

from __future__ import annotations

import logging
import struct
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .ghtree import k_gh_tree
from .graph import CutSet, Graph, sparsify_edge_ids
from .terminals import AffinePlaneFamily, HashFunction, build_family

log = logging.getLogger(__name__)

MAGIC = b"VCO1"
FLAG_CUTS = 1
FLAG_SPARSIFIED = 2
NO_WEIGHT = np.iinfo(np.int64).max


class OracleFormatError(ValueError):
    """Serialized oracle bytes are malformed, truncated or corrupted."""


class OracleStateError(RuntimeError):
    """The oracle was built without the data this query needs."""


class AtLeastK:
    """Marker returned by :func:`vcut` when the pair is at least k-connected."""

    def __init__(self, k: int):
        self.k = k

    def __repr__(self) -> str:
        return f">={self.k}"

    def __eq__(self, other) -> bool:
        return isinstance(other, AtLeastK) and other.k == self.k

    def __hash__(self):
        return hash(("AtLeastK", self.k))


@dataclass
class QueryInfo:
    value: int
    witness: int  # global node id owning the bottleneck edge, -1 if none
    bottleneck_queries: int
    max_lift_steps: int
    estimates: list[int] = field(default_factory=list)


@dataclass
class VConnOracle:
    n: int
    m: int
    k: int
    seed: int
    flags: int
    family: AffinePlaneFamily
    comp: np.ndarray
    node_off: np.ndarray  # per set, -1 without a tree
    node_count: np.ndarray
    parent: np.ndarray  # global ids, -1 at roots
    pweight: np.ndarray
    f_flat: np.ndarray  # aligned with family.members
    cut_verts: list[np.ndarray] | None = None  # per global node
    cut_edges: list[np.ndarray] | None = None
    capture_failures: int = 0
    build_stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.depth, self.up, self.mn = _lifting(self.parent, self.pweight)

    @property
    def store_cuts(self) -> bool:
        return bool(self.flags & FLAG_CUTS)

    @property
    def trees(self) -> int:
        return int(np.count_nonzero(self.node_off >= 0))

    @property
    def h_count(self) -> int:
        return self.family.h_count

    def words(self) -> int:
        """Machine words held by trees and embeddings (cuts excluded)."""
        return int(3 * len(self.parent) + len(self.f_flat))


# ---------------------------------------------------------------------------
# bottleneck index


def _lifting(parent: np.ndarray, pweight: np.ndarray):
    total = len(parent)
    depth = np.zeros(total, dtype=np.int64)
    # parents precede children inside each tree block (BFS order)
    for x in range(total):
        p = parent[x]
        if p >= 0:
            depth[x] = depth[p] + 1
    levels = max(1, int(depth.max(initial=0)).bit_length())
    up = np.empty((levels, total), dtype=np.int64)
    mn = np.empty((levels, total), dtype=np.int64)
    ids = np.arange(total, dtype=np.int64)
    up[0] = np.where(parent >= 0, parent, ids)
    mn[0] = np.where(parent >= 0, pweight, NO_WEIGHT)
    for j in range(1, levels):
        mid = up[j - 1]
        up[j] = up[j - 1][mid]
        mn[j] = np.minimum(mn[j - 1], mn[j - 1][mid])
    return depth, up, mn


@njit(cache=True)
def _path_min(up, mn, depth, a, b):
    """(min weight, witness node, lifting steps) on the tree path a-b."""
    best = NO_WEIGHT
    wit = -1
    steps = 0
    if depth[a] < depth[b]:
        a, b = b, a
    diff = depth[a] - depth[b]
    j = 0
    while diff:
        if diff & 1:
            if mn[j, a] < best:
                best = mn[j, a]
                wit = _witness(up, mn, j, a)
            a = up[j, a]
            steps += 1
        diff >>= 1
        j += 1
    if a == b:
        return best, wit, steps
    for j in range(up.shape[0] - 1, -1, -1):
        if up[j, a] != up[j, b]:
            if mn[j, a] < best:
                best = mn[j, a]
                wit = _witness(up, mn, j, a)
            if mn[j, b] < best:
                best = mn[j, b]
                wit = _witness(up, mn, j, b)
            a = up[j, a]
            b = up[j, b]
            steps += 1
    if mn[0, a] < best:
        best = mn[0, a]
        wit = a
    if mn[0, b] < best:
        best = mn[0, b]
        wit = b
    steps += 1
    return best, wit, steps


@njit(cache=True)
def _witness(up, mn, j, a):
    # descend the jump whose minimum we took; only runs when the minimum improves
    target = mn[j, a]
    while j > 0:
        j -= 1
        if mn[j, a] == target:
            continue
        a = up[j, a]
    return a


@njit(cache=True)
def _query(set_idx, offsets, members, f_flat, up, mn, depth, u, v, k, est):
    best = k
    wit = -1
    max_steps = 0
    for i in range(set_idx.shape[0]):
        s = set_idx[i]
        lo = offsets[s]
        hi = offsets[s + 1]
        pu = lo + np.searchsorted(members[lo:hi], u)
        pv = lo + np.searchsorted(members[lo:hi], v)
        a = f_flat[pu]
        b = f_flat[pv]
        if a == b:
            est[i] = k
            continue
        w, x, steps = _path_min(up, mn, depth, a, b)
        if steps > max_steps:
            max_steps = steps
        est[i] = min(w, k)
        if w < best:
            best = w
            wit = x
    return best, wit, max_steps


def bottleneck(o: VConnOracle, a: int, b: int) -> tuple[int, int, int] | None:
    """(min weight, witness node, steps) between global nodes a and b of one tree."""
    if a == b:
        return None
    w, x, steps = _path_min(o.up, o.mn, o.depth, a, b)
    return int(w), int(x), int(steps)


# ---------------------------------------------------------------------------
# build


def _root_tree(tree):
    """BFS from node 0: (order, parent, parent weight, parent edge) in new ids."""
    nn = tree.num_nodes
    adj = tree.adjacency()
    order = [0]
    par = {0: (-1, 0, -1)}
    for x in order:
        for y, e in adj[x]:
            if y not in par:
                par[y] = (x, int(tree.weights[e]), e)
                order.append(y)
    if len(order) != nn:
        raise RuntimeError("tree is not connected")
    new_id = {x: i for i, x in enumerate(order)}
    parent = np.array([-1 if par[x][0] < 0 else new_id[par[x][0]] for x in order], dtype=np.int64)
    weight = np.array([par[x][1] for x in order], dtype=np.int64)
    edge = [par[x][2] for x in order]
    return new_id, parent, weight, edge


def build_oracle(
    g: Graph,
    k: int,
    rng: int | None = 0,
    *,
    store_cuts: bool = False,
    sparsify_first: bool = True,
    c_h: int = 8,
    h_count: int | None = None,
    c_lambda: float = 4.0,
    threads: int = 1,
) -> VConnOracle:
    """Build the oracle for threshold ``k``; ``rng`` is an integer seed.

    ``threads`` workers build the per-set trees; the result does not depend
    on it, since every set draws from its own seeded generator.
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"k must lie in [1, n]; got k={k}, n={g.n}")
    seed = 0 if rng is None else int(rng)
    t0 = time.perf_counter()
    if sparsify_first:
        keep = sparsify_edge_ids(g, k)
        work = Graph(g.n, g.edges[keep])
    else:
        keep = np.arange(g.m, dtype=np.int64)
        work = g
    fam = build_family(g.n, k, np.random.default_rng([seed, 0]), c_h=c_h, h_count=h_count)
    sizes = fam.set_sizes()
    node_off = np.full(fam.num_sets, -1, dtype=np.int64)
    node_count = np.zeros(fam.num_sets, dtype=np.int64)
    f_flat = np.full(len(fam.members), -1, dtype=np.int64)
    parents, weights = [], []
    cut_v: list[np.ndarray] = []
    cut_e: list[np.ndarray] = []
    total = 0
    used = np.flatnonzero(sizes >= 2).tolist()
    # a repeated member list reuses the tree of its first occurrence
    first: dict[tuple, int] = {}
    for idx in used:
        first.setdefault(tuple(fam.members_of(idx).tolist()), idx)

    def one(item):
        key, idx = item
        tree = k_gh_tree(work, np.array(key), k, np.random.default_rng([seed, 1, idx]), c_lambda=c_lambda)
        new_id, parent, weight, edge = _root_tree(tree)
        fmap = np.array([new_id[tree.f[x]] for x in key], dtype=np.int64)
        cuts = [None if e < 0 else tree.cuts[e] for e in edge]
        return parent, weight, fmap, cuts

    items = list(first.items())
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(it) for it in items]
    cache = {key: res for (key, _), res in zip(items, results)}
    built = len(items)
    for idx in used:
        lo, hi = fam.offsets[idx], fam.offsets[idx + 1]
        parent, weight, fmap, cuts = cache[tuple(fam.members[lo:hi].tolist())]
        node_off[idx] = total
        node_count[idx] = len(parent)
        parents.append(np.where(parent >= 0, parent + total, -1))
        weights.append(weight)
        f_flat[lo:hi] = fmap + total
        if store_cuts:
            for c in cuts:
                if c is None:
                    cut_v.append(np.zeros(0, dtype=np.int64))
                    cut_e.append(np.zeros(0, dtype=np.int64))
                else:
                    cut_v.append(np.array(sorted(c.vertices), dtype=np.int64))
                    cut_e.append(np.array(sorted(keep[list(c.edges)].tolist()), dtype=np.int64))
        total += len(parent)
    flags = (FLAG_CUTS if store_cuts else 0) | (FLAG_SPARSIFIED if sparsify_first else 0)
    o = VConnOracle(
        n=g.n,
        m=g.m,
        k=k,
        seed=seed,
        flags=flags,
        family=fam,
        comp=g.components().copy(),
        node_off=node_off,
        node_count=node_count,
        parent=np.concatenate(parents) if parents else np.zeros(0, dtype=np.int64),
        pweight=np.concatenate(weights) if weights else np.zeros(0, dtype=np.int64),
        f_flat=f_flat,
        cut_verts=cut_v if store_cuts else None,
        cut_edges=cut_e if store_cuts else None,
    )
    o.build_stats = {
        "trees_built": built,
        "trees": o.trees,
        "sparse_m": work.m,
        "build_s": time.perf_counter() - t0,
    }
    return o


# ---------------------------------------------------------------------------
# queries


def _check_pair(o: VConnOracle, u: int, v: int):
    if not (0 <= u < o.n and 0 <= v < o.n):
        raise ValueError(f"vertex out of range [0, {o.n})")
    if u == v:
        raise ValueError("u and v must differ")


def query(o: VConnOracle, u: int, v: int) -> QueryInfo:
    """vconn with instrumentation: per-set estimates and lifting-step counts."""
    _check_pair(o, u, v)
    if o.comp[u] != o.comp[v]:
        return QueryInfo(0, -1, 0, 0)
    idx = o.family.pair_indices(u, v)
    if len(idx) == 0:
        o.capture_failures += 1
        log.warning("no terminal set holds both %d and %d; answering k", u, v)
        return QueryInfo(o.k, -1, 0, 0)
    est = np.empty(len(idx), dtype=np.int64)
    best, wit, steps = _query(
        idx, o.family.offsets, o.family.members, o.f_flat, o.up, o.mn, o.depth, u, v, o.k, est
    )
    value = int(min(best, o.k))
    return QueryInfo(value, int(wit) if value < o.k else -1, len(idx), int(steps), est.tolist())


def vconn(o: VConnOracle, u: int, v: int) -> int:
    """min{kappa(u, v), k}, correct with high probability over the build seed."""
    return query(o, u, v).value


def vcut(o: VConnOracle, u: int, v: int) -> CutSet | AtLeastK:
    """A minimum u-v cut of size vconn(u, v), or ``AtLeastK`` when vconn is k."""
    if not o.store_cuts:
        raise OracleStateError("oracle was built without stored cuts")
    info = query(o, u, v)
    if info.value == 0:
        return CutSet()
    if info.value >= o.k:
        return AtLeastK(o.k)
    x = info.witness
    return CutSet(frozenset(o.cut_verts[x].tolist()), frozenset(o.cut_edges[x].tolist()))


# ---------------------------------------------------------------------------
# serialization

_HEADER = struct.Struct("<4sIIIQII")
_FAMILY = struct.Struct("<QQI")


def serialize(o: VConnOracle) -> bytes:
    fam = o.family
    parts = [_HEADER.pack(MAGIC, o.n, o.m, o.k, o.seed, o.flags, fam.h_count)]
    parts.append(_FAMILY.pack(fam.p0, fam.p, fam.k))
    coeff = np.array([(h.a, h.b, h.c) for h in fam.hashes], dtype="<i8").reshape(-1, 3)
    parts.append(coeff.tobytes())
    parts.append(o.comp.astype("<i4").tobytes())
    for idx in range(fam.num_sets):
        cnt = int(o.node_count[idx])
        parts.append(struct.pack("<I", cnt))
        if cnt == 0:
            continue
        off = int(o.node_off[idx])
        par = o.parent[off : off + cnt]
        parts.append(np.where(par >= 0, par - off, -1).astype("<i4").tobytes())
        parts.append(o.pweight[off : off + cnt].astype("<i4").tobytes())
        lo, hi = fam.offsets[idx], fam.offsets[idx + 1]
        parts.append((o.f_flat[lo:hi] - off).astype("<i4").tobytes())
        if o.store_cuts:
            for x in range(off, off + cnt):
                cv, ce = o.cut_verts[x], o.cut_edges[x]
                parts.append(struct.pack("<II", len(cv), len(ce)))
                parts.append(cv.astype("<i4").tobytes())
                parts.append(ce.astype("<i4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise OracleFormatError("truncated oracle data")
        out = self.data[self.pos : self.pos + size]
        self.pos += size
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))

    def array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<i4").astype(np.int64)


def deserialize(data: bytes) -> VConnOracle:
    if len(data) < _HEADER.size + 4:
        raise OracleFormatError("truncated oracle data")
    if data[:4] != MAGIC:
        raise OracleFormatError(f"bad magic {data[:4]!r}")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise OracleFormatError("checksum mismatch")
    rd = _Reader(body)
    _, n, m, k, seed, flags, h_count = rd.unpack(_HEADER)
    p0, p, fk = rd.unpack(_FAMILY)
    coeff = np.frombuffer(rd.take(24 * h_count), dtype="<i8").reshape(-1, 3)
    try:
        hashes = [HashFunction(int(a), int(b), int(c), int(p0)) for a, b, c in coeff]
    except ValueError as exc:
        raise OracleFormatError(str(exc)) from None
    fam = AffinePlaneFamily(n, fk, int(p0), int(p), hashes)
    comp = rd.array(n)
    node_off = np.full(fam.num_sets, -1, dtype=np.int64)
    node_count = np.zeros(fam.num_sets, dtype=np.int64)
    f_flat = np.full(len(fam.members), -1, dtype=np.int64)
    parents, weights = [], []
    cut_v: list[np.ndarray] = []
    cut_e: list[np.ndarray] = []
    total = 0
    store = bool(flags & FLAG_CUTS)
    for idx in range(fam.num_sets):
        (cnt,) = struct.unpack("<I", rd.take(4))
        if cnt == 0:
            continue
        par = rd.array(cnt)
        if np.any(par >= cnt) or np.any(par < -1):
            raise OracleFormatError(f"bad parent array in set {idx}")
        parents.append(np.where(par >= 0, par + total, -1))
        weights.append(rd.array(cnt))
        lo, hi = fam.offsets[idx], fam.offsets[idx + 1]
        f_flat[lo:hi] = rd.array(hi - lo) + total
        if store:
            for _ in range(cnt):
                nv, ne = struct.unpack("<II", rd.take(8))
                cut_v.append(rd.array(nv))
                cut_e.append(rd.array(ne))
        node_off[idx] = total
        node_count[idx] = cnt
        total += cnt
    if rd.pos != len(body):
        raise OracleFormatError("trailing bytes after oracle data")
    return VConnOracle(
        n=n,
        m=m,
        k=k,
        seed=seed,
        flags=flags,
        family=fam,
        comp=comp,
        node_off=node_off,
        node_count=node_count,
        parent=np.concatenate(parents) if parents else np.zeros(0, dtype=np.int64),
        pweight=np.concatenate(weights) if weights else np.zeros(0, dtype=np.int64),
        f_flat=f_flat,
        cut_verts=cut_v if store else None,
        cut_edges=cut_e if store else None,
    )
