"""Pure-Python graph kernels. Semantics match ``_kernels.pyx`` exactly.

Graphs are CSR arrays (``indptr``, ``indices``, ``weights``). ``state`` holds
one byte per vertex: 0 relays traffic, 1 may only be an endpoint, 2 is gone.
"""
from __future__ import annotations

import heapq
from collections import deque

import numpy as np

RELAY, ENDPOINT, EXCLUDED = 0, 1, 2


def _lex_less(pred, a: int, b: int) -> bool:
    # paths to a and b have equal hop counts; compare them from the source end
    pa, pb = [], []
    while a != -1:
        pa.append(a)
        a = pred[a]
    while b != -1:
        pb.append(b)
        b = pred[b]
    pa.reverse()
    pb.reverse()
    return pa < pb


def shortest_path(indptr, indices, weights, state, src: int, dst: int, allow_direct: bool = True):
    """Minimum-cost path from ``src`` to ``dst``.

    Ties on cost go to fewer hops, then to the lexicographically smaller
    node sequence. Returns ``(hops, cost)`` or ``(None, inf)``.
    """
    n = len(indptr) - 1
    inf = float("inf")
    dist = [inf] * n
    hops = [0] * n
    pred = [-1] * n
    done = [False] * n
    dist[src] = 0.0
    heap = [(0.0, 0, src)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if done[u] or d != dist[u] or h != hops[u]:
            continue
        done[u] = True
        if u == dst:
            break
        if u != src and state[u] != RELAY:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            v = int(indices[e])
            if done[v]:
                continue
            if v != dst and state[v] != RELAY:
                continue
            if state[v] == EXCLUDED:
                continue
            if u == src and v == dst and not allow_direct:
                continue
            nd = d + weights[e]
            nh = h + 1
            if nd < dist[v] or (nd == dist[v] and (nh < hops[v] or (nh == hops[v] and _lex_less(pred, u, pred[v])))):
                dist[v] = nd
                hops[v] = nh
                pred[v] = u
                heapq.heappush(heap, (nd, nh, v))
    if not done[dst]:
        return None, inf
    path = []
    v = dst
    while v != -1:
        path.append(v)
        v = pred[v]
    path.reverse()
    return path, dist[dst]


def bfs_hops(indptr, indices, state, src: int):
    """Hop counts from ``src``; -1 where unreachable. Endpoint-only vertices
    are reached but never expanded."""
    n = len(indptr) - 1
    out = np.full(n, -1, dtype=np.int64)
    out[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u != src and state[u] != RELAY:
            continue
        du = out[u] + 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if out[v] == -1 and state[v] != EXCLUDED:
                out[v] = du
                queue.append(v)
    return out
