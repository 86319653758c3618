"""Compiled inner loops for the flow engine.

Networks are CSR arrays: arcs come in pairs ``(a, a ^ 1)`` (forward,
reverse); ``order[start[v]:start[v + 1]]`` lists arcs leaving ``v``.
Capacities are mutated in place and become residual capacities.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dinic(start, order, head, cap, is_source, is_sink, limit):
    """Blocking-flow max flow from all sources to any sink, stopping at ``limit``."""
    num_nodes = start.shape[0] - 1
    level = np.empty(num_nodes, np.int64)
    it = np.empty(num_nodes, np.int64)
    queue = np.empty(num_nodes, np.int64)
    path = np.empty(num_nodes + 1, np.int64)
    sources = np.flatnonzero(is_source)
    flow = 0
    while flow < limit:
        level[:] = -1
        qh = 0
        qt = 0
        for s in sources:
            level[s] = 0
            queue[qt] = s
            qt += 1
        found = False
        while qh < qt:
            x = queue[qh]
            qh += 1
            if is_sink[x]:
                found = True
                continue
            for idx in range(start[x], start[x + 1]):
                a = order[idx]
                w = head[a]
                if cap[a] > 0 and level[w] < 0:
                    level[w] = level[x] + 1
                    queue[qt] = w
                    qt += 1
        if not found:
            break
        for v in range(num_nodes):
            it[v] = start[v]
        for s in sources:
            if flow >= limit:
                break
            plen = 0
            v = s
            while True:
                if is_sink[v]:
                    b = limit - flow
                    for i in range(plen):
                        if cap[path[i]] < b:
                            b = cap[path[i]]
                    for i in range(plen):
                        cap[path[i]] -= b
                        cap[path[i] ^ 1] += b
                    flow += b
                    if flow >= limit:
                        break
                    plen = 0
                    v = s
                    continue
                advanced = False
                while it[v] < start[v + 1]:
                    a = order[it[v]]
                    w = head[a]
                    if cap[a] > 0 and level[w] == level[v] + 1:
                        path[plen] = a
                        plen += 1
                        v = w
                        advanced = True
                        break
                    it[v] += 1
                if not advanced:
                    level[v] = -1
                    if plen == 0:
                        break
                    plen -= 1
                    v = head[path[plen] ^ 1]
                    it[v] += 1
    return flow


@njit(cache=True)
def residual_reach(start, order, head, cap, is_source):
    num_nodes = start.shape[0] - 1
    seen = np.zeros(num_nodes, np.bool_)
    queue = np.empty(num_nodes, np.int64)
    qt = 0
    for v in range(num_nodes):
        if is_source[v]:
            seen[v] = True
            queue[qt] = v
            qt += 1
    qh = 0
    while qh < qt:
        x = queue[qh]
        qh += 1
        for idx in range(start[x], start[x + 1]):
            a = order[idx]
            w = head[a]
            if cap[a] > 0 and not seen[w]:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen


@njit(cache=True)
def min_flow_to_targets(start, order, head, cap0, source, targets, limit):
    """min over targets of max-flow(source -> target), capped at ``limit``.

    Each target is tried against the best value so far, so later flows stop
    as soon as they cannot improve the minimum.
    """
    num_nodes = start.shape[0] - 1
    is_source = np.zeros(num_nodes, np.bool_)
    is_source[source] = True
    is_sink = np.zeros(num_nodes, np.bool_)
    best = limit
    calls = 0
    for t in targets:
        if best == 0:
            break
        cap = cap0.copy()
        is_sink[t] = True
        f = dinic(start, order, head, cap, is_source, is_sink, best)
        is_sink[t] = False
        calls += 1
        if f < best:
            best = f
    return best, calls


@njit(cache=True)
def split_csr(n, ea, eb):
    """CSR (start, order, head) of the split network; see maxflow.SplitStructure."""
    m = ea.shape[0]
    num_arcs = 2 * n + 4 * m
    tail = np.empty(num_arcs, np.int64)
    head = np.empty(num_arcs, np.int64)
    for x in range(n):
        tail[2 * x] = 2 * x
        head[2 * x] = 2 * x + 1
    base = 2 * n
    for e in range(m):
        a = ea[e]
        b = eb[e]
        tail[base + 4 * e] = 2 * a + 1
        head[base + 4 * e] = 2 * b
        tail[base + 4 * e + 2] = 2 * b + 1
        head[base + 4 * e + 2] = 2 * a
    for f in range(0, num_arcs, 2):
        tail[f + 1] = head[f]
        head[f + 1] = tail[f]
    start = np.zeros(2 * n + 1, np.int64)
    for a in range(num_arcs):
        start[tail[a] + 1] += 1
    for v in range(2 * n):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    order = np.empty(num_arcs, np.int64)
    for a in range(num_arcs):
        t = tail[a]
        order[fill[t]] = a
        fill[t] += 1
    return start, order, head


@njit(cache=True)
def split_caps(n, ea, eb, terminal, inf):
    """Unit vertex arcs for non-terminals; edge arcs cost 1 only between two terminals."""
    m = ea.shape[0]
    cap = np.zeros(2 * n + 4 * m, np.int64)
    for x in range(n):
        cap[2 * x] = inf if terminal[x] else 1
    base = 2 * n
    for e in range(m):
        c = 1 if (terminal[ea[e]] and terminal[eb[e]]) else inf
        cap[base + 4 * e] = c
        cap[base + 4 * e + 2] = c
    return cap


@njit(cache=True)
def isolating(start, order, head, cap0, terms, limit, inf):
    """Isolating cuts for the sorted terminal array ``terms``.

    Returns (size per terminal or -1 when above ``limit``, owner of each
    vertex's side or -1, boundary pointer per terminal, boundary vertices,
    flow calls).
    """
    num_nodes = start.shape[0] - 1
    n = num_nodes // 2
    t_count = terms.shape[0]
    n_bits = 1
    while (1 << n_bits) < t_count:
        n_bits += 1
    code = np.zeros(n, np.int64)
    src = np.zeros(num_nodes, np.bool_)
    snk = np.zeros(num_nodes, np.bool_)
    calls = 0
    for bit in range(n_bits):
        src[:] = False
        snk[:] = False
        for r in range(t_count):
            if (r >> bit) & 1 == 0:
                src[2 * terms[r] + 1] = True
            else:
                snk[2 * terms[r]] = True
        cap = cap0.copy()
        dinic(start, order, head, cap, src, snk, inf)
        calls += 1
        reach = residual_reach(start, order, head, cap, src)
        for x in range(n):
            ri = reach[2 * x]
            ro = reach[2 * x + 1]
            if ri and not ro:
                code[x] = -1
            elif code[x] >= 0 and not (ri or ro):
                code[x] |= 1 << bit
    sizes = np.full(t_count, -1, np.int64)
    owner = np.full(n, -1, np.int64)
    bd_ptr = np.zeros(t_count + 1, np.int64)
    bd = np.empty(n * t_count if limit > n else (limit + 1) * t_count, np.int64)
    used = 0
    for r in range(t_count):
        v = terms[r]
        src[:] = False
        src[2 * v + 1] = True
        for x in range(n):
            snk[2 * x] = False
            snk[2 * x + 1] = code[x] != r
        cap = cap0.copy()
        val = dinic(start, order, head, cap, src, snk, limit + 1)
        calls += 1
        if val <= limit:
            sizes[r] = val
            reach = residual_reach(start, order, head, cap, src)
            for x in range(n):
                if reach[2 * x + 1]:
                    owner[x] = r
                elif reach[2 * x]:
                    bd[used] = x
                    used += 1
        bd_ptr[r + 1] = used
    return sizes, owner, bd_ptr, bd[:used], calls
