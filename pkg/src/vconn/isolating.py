"""Minimum isolating vertex cuts with forbidden terminals.

For an independent terminal set ``I`` (plus forbidden ``F``) find, for each
``v`` in ``I``, the smallest-boundary set ``S_v`` with ``S_v & I == {v}``
whose boundary avoids ``I | F``; ties go to the smallest ``S_v``.

The code-and-intersect scheme: give each terminal a binary code (its rank
in sorted order), run one unbounded flow per bit between the two code
classes, keep the vertices never cut, and group them by the sides they fell
on.  Each terminal's group contains its optimal ``S_v``; one local flow per
terminal, confined to its group, extracts it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .graph import Graph
from .maxflow import INF, split_structure


@dataclass(frozen=True)
class IsolatingCut:
    side: frozenset[int]
    boundary: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.boundary)


@dataclass
class IsolatingCutsResult:
    """Per-terminal cuts; terminals mapped to ``None`` exceed the limit."""

    cuts: dict[int, IsolatingCut | None]
    limit: int
    flow_calls: int = 0
    network_size: int = 0

    def __getitem__(self, v: int) -> IsolatingCut | None:
        return self.cuts[v]

    def clamped(self, v: int) -> bool:
        return self.cuts[v] is None


def isolating_cuts(
    g: Graph, i_set: Iterable[int], f_set: Iterable[int], limit: int
) -> IsolatingCutsResult:
    """Isolating cuts of size at most ``limit`` for every terminal of ``i_set``."""
    terms = sorted(set(int(v) for v in i_set))
    forb = set(int(v) for v in f_set)
    if len(terms) < 2:
        raise ValueError("need at least two terminals")
    if forb.intersection(terms):
        raise ValueError("terminal and forbidden sets must be disjoint")
    if limit < 0:
        raise ValueError("limit must be non-negative")
    mask = np.zeros(g.n, dtype=bool)
    mask[terms] = True
    mask[list(forb)] = True
    if g.m and np.any(mask[g.edges[:, 0]] & mask[g.edges[:, 1]]):
        raise ValueError("terminal and forbidden vertices must form an independent set")

    st = split_structure(g)
    t_arr = np.array(terms, dtype=np.int64)
    sizes, owner, bd_ptr, bd, calls = _kernels.isolating(
        st.start, st.order, st.head, st.capacities(mask), t_arr, limit, INF
    )
    cuts: dict[int, IsolatingCut | None] = {}
    for r, v in enumerate(terms):
        if sizes[r] < 0:
            cuts[v] = None
        else:
            side = np.flatnonzero(owner == r)
            cuts[v] = IsolatingCut(frozenset(side.tolist()), frozenset(bd[bd_ptr[r] : bd_ptr[r + 1]].tolist()))
    return IsolatingCutsResult(cuts, limit, int(calls), len(st.head))


def isolating_cut_direct(g: Graph, v: int, others: Iterable[int], f_set: Iterable[int], limit: int):
    """Single max flow from ``v`` to a super-sink over ``others``.

    Reference value for one terminal; returns ``None`` above ``limit``.
    """
    others = set(others)
    mask = np.zeros(g.n, dtype=bool)
    mask[[v, *others, *f_set]] = True
    st = split_structure(g)
    cap = st.capacities(mask)
    src = np.zeros(2 * g.n, dtype=np.bool_)
    snk = np.zeros(2 * g.n, dtype=np.bool_)
    src[2 * v + 1] = True
    snk[[2 * o for o in others]] = True
    value = _kernels.dinic(st.start, st.order, st.head, cap, src, snk, limit + 1)
    return None if value > limit else int(value)
