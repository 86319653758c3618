"""Executable version of the Omega(kn)-bit lower-bound construction.

A codeword ``T`` is an ``n x n`` 0/1 matrix whose rows all have weight
``n/2``.  It is factored as ``C = A B`` over the integers, where ``B`` is a
random ``cn x n`` matrix with row weight ``n/2`` and row ``i`` of ``A`` picks
``4n`` rows of ``B`` (``r`` at random, the rest among rows that agree
unusually well with ``T[i]``).  Thresholding ``C`` at ``2n`` recovers most of
``T``.  The tripartite graph X-Y-Z built from ``A`` and ``B`` exposes ``C``
through vertex connectivities: kappa(x_i, z_j) = min{C(i, j) + 2(n - 1), 4n}
with high probability, so a connectivity oracle can be decoded back to ``T``.

Vertex ids in the gadget graph: ``x_i = i``, ``y_k = n + k``,
``z_j = n + cn + j``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .maxflow import pairs_vertex_connectivity


class CodebookError(RuntimeError):
    """Rejection sampling ran out of retries."""


class DecompositionError(RuntimeError):
    """Too few eligible rows of B to fill A, even after fresh draws of B."""


def _balanced_rows(rows: int, n: int, rng: np.random.Generator) -> np.ndarray:
    base = np.zeros((rows, n), dtype=bool)
    base[:, : n // 2] = True
    return rng.permuted(base, axis=1)


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(a != b))


@dataclass
class Codebook:
    n: int
    words: np.ndarray  # (count, n, n) bool
    min_distance: int

    @property
    def count(self) -> int:
        return len(self.words)

    def nearest(self, t: np.ndarray) -> tuple[int, int]:
        """(index, distance) of the codeword closest to ``t``; ties go to the lower index."""
        d = np.count_nonzero(self.words != t[None], axis=(1, 2))
        i = int(np.argmin(d))
        return i, int(d[i])


def build_codebook(n: int, count: int, rng=None, *, retries: int | None = None) -> Codebook:
    """Random codewords with pairwise Hamming distance at least ``n^2 / 3``."""
    if n < 12 or n % 6:
        raise ValueError("n must be a multiple of 6 and at least 12")
    if not 1 <= count <= 1 << 16:
        raise ValueError("count must lie in [1, 65536]")
    rng = np.random.default_rng(rng)
    need = n * n / 3
    budget = 100 * count if retries is None else retries
    words: list[np.ndarray] = []
    flat = np.zeros((count, n * n), dtype=bool)
    rejected = 0
    while len(words) < count:
        t = _balanced_rows(n, n, rng)
        if words:
            d = np.count_nonzero(flat[: len(words)] != t.ravel()[None], axis=1)
            if d.min() < need:
                rejected += 1
                if rejected > budget:
                    raise CodebookError(f"gave up after {rejected} rejections with {len(words)} codewords")
                continue
        flat[len(words)] = t.ravel()
        words.append(t)
    arr = np.array(words, dtype=bool)
    if count > 1:
        f = arr.reshape(count, -1).astype(np.int32)
        ones = f.sum(axis=1)
        # |a xor b| = |a| + |b| - 2 a.b
        dist = ones[:, None] + ones[None, :] - 2 * (f @ f.T)
        np.fill_diagonal(dist, n * n)
        min_d = int(dist.min())
    else:
        min_d = n * n
    return Codebook(n, arr, min_d)


def eligibility_threshold(n: int) -> int:
    """Agreement needed for eligibility: n/2 + ceil(sqrt(n))."""
    return n // 2 + math.isqrt(n - 1) + 1 if n > 1 else 1


def eligibility_probability(n: int) -> float:
    """Exact Pr[(i, k) eligible] for independent balanced rows.

    Agreement equals twice the overlap of the two one-sets, and the overlap
    is hypergeometric.
    """
    h = n // 2
    need = -(-eligibility_threshold(n) // 2)
    total = math.comb(n, h)
    return sum(math.comb(h, x) * math.comb(n - h, h - x) for x in range(need, h + 1)) / total


def auto_c(n: int) -> int:
    """c = 4/p + 1 rounded up, so A fills from eligible rows with high probability."""
    return math.ceil(4 / eligibility_probability(n) + 1)


def default_r(n: int, c: int = 8) -> int:
    return math.ceil(c * math.log2(n))


@dataclass
class Decomposition:
    a: np.ndarray  # (n, cn) bool, row weight 4n
    b: np.ndarray  # (cn, n) bool, row weight n/2
    cmat: np.ndarray  # a @ b over the integers
    c: int
    r: int
    attempts: int = 1
    stats: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def decoded(self) -> np.ndarray:
        return self.cmat >= 2 * self.n


def _fill_a(t, b, r, thresh, rng, topup):
    n, cn = t.shape[0], b.shape[0]
    agree = 2 * (t.astype(np.int32) @ b.T.astype(np.int32))
    eligible = agree >= thresh
    a = np.zeros((n, cn), dtype=bool)
    need = 4 * n - r
    short = 0
    for i in range(n):
        picks = rng.choice(cn, size=r, replace=False)
        a[i, picks] = True
        cand = np.flatnonzero(eligible[i] & ~a[i])
        if len(cand) < need:
            short = max(short, need - len(cand))
            if not topup:
                continue
            # best-agreeing leftovers, lowest index first on ties
            rest = np.flatnonzero(~eligible[i] & ~a[i])
            rest = rest[np.argsort(-agree[i, rest], kind="stable")]
            cand = np.concatenate([cand, rest[: need - len(cand)]])
        a[i, cand[:need]] = True
    return a, short, float(eligible.mean())


FILLS = ("eligible", "topup")


def decompose(
    t: np.ndarray, c: int = 8, r: int | None = None, rng=None, *, retries: int = 5, fill: str = "eligible"
) -> Decomposition:
    """Factor ``t`` as ``C = A B`` with eligibility-driven rows of ``A``.

    With ``fill="eligible"`` a row that finds fewer than ``4n - r`` eligible
    indices forces a fresh ``B``, and running out of retries raises
    :class:`DecompositionError`.  ``fill="topup"`` instead completes such a
    row with the best-agreeing non-eligible indices, so it never fails; the
    shortfall is kept in ``stats``.  Both fills agree whenever no row falls
    short.
    """
    if fill not in FILLS:
        raise ValueError(f"fill must be one of {FILLS}")
    t = np.asarray(t, dtype=bool)
    n = t.shape[0]
    if t.shape != (n, n) or n % 2:
        raise ValueError("t must be a square matrix of even side")
    if np.any(t.sum(axis=1) != n // 2):
        raise ValueError("every row of t must have weight n/2")
    if c < 5:
        raise ValueError("c must be at least 5")
    r = default_r(n) if r is None else int(r)
    if not 0 <= r <= 4 * n:
        raise ValueError("r must lie in [0, 4n]")
    rng = np.random.default_rng(rng)
    thresh = eligibility_threshold(n)
    worst = 0
    for attempt in range(1, retries + 1):
        b = _balanced_rows(c * n, n, rng)
        a, short, rate = _fill_a(t, b, r, thresh, rng, fill == "topup")
        if short == 0 or fill == "topup":
            cmat = a.astype(np.int64) @ b.astype(np.int64)
            return Decomposition(a, b, cmat, c, r, attempt, {"eligible_rate": rate, "shortfall": short})
        worst = max(worst, short)
    raise DecompositionError(
        f"n={n}, c={c}: a row of A lacked up to {worst} eligible indices "
        f"after {retries} draws of B (need {4 * n - r} of {c * n}, eligible rate {rate:.4f})"
    )


@dataclass
class GadgetGraph:
    graph: Graph
    n: int
    cn: int

    def x(self, i: int) -> int:
        return i

    def y(self, k: int) -> int:
        return self.n + k

    def z(self, j: int) -> int:
        return self.n + self.cn + j


def build_gadget_graph(d: Decomposition) -> GadgetGraph:
    n, cn = d.a.shape
    xi, yk = np.nonzero(d.a)
    yk2, zj = np.nonzero(d.b)
    edges = np.concatenate(
        [np.stack([xi, n + yk], axis=1), np.stack([n + yk2, n + cn + zj], axis=1)]
    ).astype(np.int64)
    return GadgetGraph(Graph(2 * n + cn, edges.reshape(-1, 2)), n, cn)


def predicted_kappa(cij: int, n: int) -> int:
    return min(int(cij) + 2 * (n - 1), 4 * n)


@dataclass
class PairCheck:
    i: int
    j: int
    c_value: int
    predicted: int
    kappa: int

    @property
    def match(self) -> bool:
        return self.predicted == self.kappa


@dataclass
class FormulaReport:
    checks: list[PairCheck]

    @property
    def match_rate(self) -> float:
        return sum(c.match for c in self.checks) / len(self.checks) if self.checks else 1.0

    def lines(self) -> list[str]:
        out = [
            f"x{c.i} z{c.j}: C={c.c_value} predicted={c.predicted} kappa={c.kappa} "
            f"{'match' if c.match else 'MISMATCH'}"
            for c in self.checks
        ]
        out.append(f"match rate {self.match_rate:.3f} over {len(self.checks)} pairs")
        return out


def gadget_kappa(gg: GadgetGraph, pairs) -> np.ndarray:
    """kappa(x_i, z_j) capped at 4n + 1 for each ``(i, j)``."""
    return pairs_vertex_connectivity(gg.graph, [(gg.x(i), gg.z(j)) for i, j in pairs], 4 * gg.n + 1)


def verify_connectivity_formula(gg: GadgetGraph, d: Decomposition, pairs) -> FormulaReport:
    """Compare brute kappa(x_i, z_j) with min{C(i, j) + 2(n - 1), 4n}.

    The bounds C(i, j) <= kappa <= min(deg x_i, deg z_j, C(i, j) + 2(n - 1))
    hold for every graph of this shape, so a violation raises.  The last one
    comes from the separator (X - x_i) + (Z - z_j) + common neighbours.
    """
    pairs = [(int(i), int(j)) for i, j in pairs]
    kap = gadget_kappa(gg, pairs)
    deg = gg.graph.degree()
    checks = []
    for (i, j), kv in zip(pairs, kap.tolist()):
        cij = int(d.cmat[i, j])
        hi = min(deg[gg.x(i)], deg[gg.z(j)], cij + 2 * (gg.n - 1))
        if not cij <= kv <= hi:
            raise RuntimeError(f"kappa(x{i}, z{j}) = {kv} outside [{cij}, {hi}]")
        checks.append(PairCheck(i, j, cij, predicted_kappa(cij, gg.n), kv))
    return FormulaReport(checks)


@dataclass
class DecodeReport:
    index: int
    recovered: int
    distance: int  # Hamming(T~, T)
    mode: str
    n: int
    c: int
    r: int
    seconds: float
    match_rate: float | None = None
    fill: str = "eligible"

    @property
    def success(self) -> bool:
        return self.recovered == self.index

    def summary(self) -> dict:
        return {
            "n": self.n,
            "c": self.c,
            "r": self.r,
            "index": self.index,
            "recovered": self.recovered,
            "success": self.success,
            "distance": self.distance,
            "radius": self.n * self.n / 6,
            "mode": self.mode,
            "fill": self.fill,
            "match_rate": self.match_rate,
            "seconds": round(self.seconds, 3),
        }


KAPPA_MAX_N = 32


def decode_roundtrip(
    cb: Codebook,
    index: int,
    rng=None,
    *,
    c: int | str = 8,
    r: int | None = None,
    mode: str = "auto",
    fill: str = "eligible",
) -> DecodeReport:
    """Encode codeword ``index`` as a gadget graph and decode it back.

    ``mode`` is "kappa" (all-pairs X-Z connectivity thresholded at 4n - 2),
    "cthresh" (C thresholded at 2n) or "auto" (kappa when n <= 32).
    """
    if not 0 <= index < cb.count:
        raise ValueError("codeword index out of range")
    n = cb.n
    if mode == "auto":
        mode = "kappa" if n <= KAPPA_MAX_N else "cthresh"
    if mode not in ("kappa", "cthresh"):
        raise ValueError(f"unknown decode mode {mode!r}")
    c_val = auto_c(n) if c == "auto" else int(c)
    t0 = time.perf_counter()
    t = cb.words[index]
    d = decompose(t, c_val, r, rng, fill=fill)
    rate = None
    if mode == "kappa":
        gg = build_gadget_graph(d)
        pairs = [(i, j) for i in range(n) for j in range(n)]
        rep = verify_connectivity_formula(gg, d, pairs)
        kap = np.array([ch.kappa for ch in rep.checks]).reshape(n, n)
        t_hat = kap >= 4 * n - 2
        rate = rep.match_rate
    else:
        t_hat = d.decoded()
    rec, _ = cb.nearest(t_hat)
    return DecodeReport(
        index, rec, hamming(t_hat, t), mode, n, c_val, d.r, time.perf_counter() - t0, rate, fill
    )
