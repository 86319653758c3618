"""Terminal-set families from lines of a small affine grid.

Each hash ``h(x) = (a x^2 + b x + c) mod p0`` sends a vertex to a value
``y < p0``, read as the grid point (row ``y // p``, column ``y % p``).  The
line ``(s, j)`` holds the points whose column is ``(j + s * row) mod p``; its
terminal set is the preimage of those points.  Two vertices in rows that
differ modulo ``p`` share exactly one line per hash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(x: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit integers."""
    if x < 2:
        return False
    for q in _MR_BASES:
        if x % q == 0:
            return x == q
    d, r = x - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        y = pow(a, d, x)
        if y in (1, x - 1):
            continue
        for _ in range(r - 1):
            y = y * y % x
            if y == x - 1:
                break
        else:
            return False
    return True


def next_prime(x: int) -> int:
    """Smallest prime strictly greater than ``x``."""
    y = max(int(x) + 1, 2)
    while not is_prime(y):
        y += 1
    return y


@dataclass(frozen=True)
class HashFunction:
    a: int
    b: int
    c: int
    p0: int

    def __post_init__(self):
        if self.a % self.p0 == 0 and self.b % self.p0 == 0:
            raise ValueError("degenerate hash: a = b = 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.int64)
        return (self.a * (x * x % self.p0) + self.b * x + self.c) % self.p0


@dataclass(frozen=True)
class SetId:
    hash: int
    s: int
    j: int


class AffinePlaneFamily:
    """All line sets for ``len(hashes)`` hashes, materialized as CSR lists.

    Set ``(h, s, j)`` has flat index ``h * p^2 + s * p + j``.
    """

    def __init__(self, n: int, k: int, p0: int, p: int, hashes: list[HashFunction]):
        self.n, self.k, self.p0, self.p = n, k, p0, p
        self.r = -(-p0 // p)
        self.hashes = list(hashes)
        self.h_count = len(hashes)
        self.inv = np.zeros(p, dtype=np.int64)
        for t in range(1, p):
            self.inv[t] = pow(t, p - 2, p)
        xs = np.arange(n, dtype=np.int64)
        ys = np.array([h(xs) for h in hashes], dtype=np.int64).reshape(self.h_count, n)
        self.row = ys // p
        self.col = ys % p
        # set index of (hash, slope, vertex)
        slopes = np.arange(p, dtype=np.int64)
        j = (self.col[:, None, :] - slopes[None, :, None] * self.row[:, None, :]) % p
        flat = (np.arange(self.h_count)[:, None, None] * p * p + slopes[None, :, None] * p + j).ravel()
        verts = np.broadcast_to(xs, j.shape).ravel()
        order = np.argsort(flat, kind="stable")
        self.members = verts[order].astype(np.int64)
        self.offsets = np.zeros(self.num_sets + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=self.num_sets), out=self.offsets[1:])

    @property
    def num_sets(self) -> int:
        return self.h_count * self.p * self.p

    def set_index(self, sid: SetId) -> int:
        if not (0 <= sid.hash < self.h_count and 0 <= sid.s < self.p and 0 <= sid.j < self.p):
            raise ValueError(f"set id {sid} out of range")
        return (sid.hash * self.p + sid.s) * self.p + sid.j

    def set_id(self, index: int) -> SetId:
        if not 0 <= index < self.num_sets:
            raise ValueError(f"set index {index} out of range")
        h, rest = divmod(index, self.p * self.p)
        return SetId(h, *divmod(rest, self.p))

    def members_of(self, index: int) -> np.ndarray:
        return self.members[self.offsets[index] : self.offsets[index + 1]]

    def set_sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def pair_indices(self, u: int, v: int) -> np.ndarray:
        """Flat indices of the sets holding both ``u`` and ``v`` (one per usable hash)."""
        p = self.p
        t1, t2 = self.row[:, u], self.row[:, v]
        c1, c2 = self.col[:, u], self.col[:, v]
        dt = (t2 - t1) % p
        ok = np.flatnonzero(dt != 0)
        s = (c2[ok] - c1[ok]) * self.inv[dt[ok]] % p
        j = (c1[ok] - s * t1[ok]) % p
        return (ok * p + s) * p + j

    def params(self) -> dict:
        return {"n": self.n, "k": self.k, "p0": self.p0, "p": self.p, "r": self.r, "h_count": self.h_count}


def family_shape(n: int, k: int, c_h: int = 8) -> tuple[int, int, int]:
    """(p0, p, h_count) for an ``n``-vertex family at threshold ``k``."""
    p = next_prime(2 * k)
    p0 = next_prime(n)
    if p0 <= p:
        # a single row would make every pair collide on every hash
        p0 = next_prime(max(n, p))
    h_count = c_h * max(1, math.ceil(math.log2(max(n, 2))))
    return p0, p, h_count


def build_family(n: int, k: int, rng=None, *, c_h: int = 8, h_count: int | None = None) -> AffinePlaneFamily:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(rng)
    p0, p, hc = family_shape(n, k, c_h)
    if h_count is not None:
        hc = h_count
    hashes = []
    while len(hashes) < hc:
        a, b, c = (int(x) for x in rng.integers(0, p0, size=3))
        if a == 0 and b == 0:
            continue
        hashes.append(HashFunction(a, b, c, p0))
    return AffinePlaneFamily(n, k, p0, p, hashes)


def sets_for_pair(fam: AffinePlaneFamily, u: int, v: int) -> list[SetId]:
    if u == v:
        raise ValueError("u and v must differ")
    if not (0 <= u < fam.n and 0 <= v < fam.n):
        raise ValueError("vertex out of range")
    return [fam.set_id(int(i)) for i in fam.pair_indices(u, v)]


def set_members(fam: AffinePlaneFamily, sid: SetId) -> list[int]:
    return sorted(fam.members_of(fam.set_index(sid)).tolist())


def planted_capture_rate(n: int, k: int, trials: int, rng=None, *, c_h: int = 8) -> float:
    """Fraction of (pair, hash) draws whose shared line avoids a planted cut.

    A random set ``C`` of ``k`` vertices plays the cut; each trial samples a
    pair outside ``C`` and checks, hash by hash, whether the pair's line
    exists and its set misses ``C``.
    """
    rng = np.random.default_rng(rng)
    fam = build_family(n, k, rng, c_h=c_h)
    cut = rng.choice(n, size=k, replace=False)
    in_cut = np.zeros(n, dtype=bool)
    in_cut[cut] = True
    # sets touching the cut, per flat index
    touched = np.zeros(fam.num_sets, dtype=bool)
    owner = np.repeat(np.arange(fam.num_sets), fam.set_sizes())
    touched[owner[in_cut[fam.members]]] = True
    outside = np.flatnonzero(~in_cut)
    hits = 0
    for _ in range(trials):
        u, v = rng.choice(outside, size=2, replace=False)
        idx = fam.pair_indices(int(u), int(v))
        hits += int(np.count_nonzero(~touched[idx]))
    return hits / (trials * fam.h_count)
