# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled graph kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

ctypedef cnp.int64_t i64

cdef enum:
    RELAY = 0
    ENDPOINT = 1
    EXCLUDED = 2


cdef struct Entry:
    double dist
    i64 hops
    i64 node


cdef inline bint entry_less(Entry a, Entry b) nogil:
    if a.dist != b.dist:
        return a.dist < b.dist
    if a.hops != b.hops:
        return a.hops < b.hops
    return a.node < b.node


cdef void heap_push(Entry* heap, i64* size, Entry item) nogil:
    cdef i64 i = size[0]
    cdef i64 parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if entry_less(item, heap[parent]):
            heap[i] = heap[parent]
            i = parent
        else:
            break
    heap[i] = item


cdef Entry heap_pop(Entry* heap, i64* size) nogil:
    cdef Entry top = heap[0]
    cdef Entry last
    cdef i64 i = 0, child, n
    size[0] -= 1
    n = size[0]
    if n > 0:
        last = heap[n]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and entry_less(heap[child + 1], heap[child]):
                child += 1
            if entry_less(heap[child], last):
                heap[i] = heap[child]
                i = child
            else:
                break
        heap[i] = last
    return top


cdef bint lex_less(i64* pred, i64 a, i64 b, i64 length, i64* buf_a, i64* buf_b) nogil:
    cdef i64 i = length - 1
    while a != -1 and i >= 0:
        buf_a[i] = a
        a = pred[a]
        i -= 1
    i = length - 1
    while b != -1 and i >= 0:
        buf_b[i] = b
        b = pred[b]
        i -= 1
    for i in range(length):
        if buf_a[i] != buf_b[i]:
            return buf_a[i] < buf_b[i]
    return False


def shortest_path(const i64[:] indptr, const i64[:] indices, const double[:] weights,
                  const unsigned char[:] state, i64 src, i64 dst, bint allow_direct=True):
    cdef i64 n = indptr.shape[0] - 1
    cdef i64 m = indices.shape[0]
    cdef double* dist = <double*> malloc(n * sizeof(double))
    cdef i64* hops = <i64*> malloc(n * sizeof(i64))
    cdef i64* pred = <i64*> malloc(n * sizeof(i64))
    cdef unsigned char* done = <unsigned char*> malloc(n)
    cdef Entry* heap = <Entry*> malloc((m + 1) * sizeof(Entry))
    cdef i64* buf_a = <i64*> malloc((n + 1) * sizeof(i64))
    cdef i64* buf_b = <i64*> malloc((n + 1) * sizeof(i64))
    cdef i64 size = 0, u, v, e, nh, k
    cdef double nd
    cdef Entry cur, item
    cdef bint better
    try:
        for k in range(n):
            dist[k] = INFINITY
            hops[k] = 0
            pred[k] = -1
            done[k] = 0
        dist[src] = 0.0
        item.dist = 0.0
        item.hops = 0
        item.node = src
        heap_push(heap, &size, item)
        with nogil:
            while size > 0:
                cur = heap_pop(heap, &size)
                u = cur.node
                if done[u] or cur.dist != dist[u] or cur.hops != hops[u]:
                    continue
                done[u] = 1
                if u == dst:
                    break
                if u != src and state[u] != RELAY:
                    continue
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    if done[v]:
                        continue
                    if v != dst and state[v] != RELAY:
                        continue
                    if state[v] == EXCLUDED:
                        continue
                    if u == src and v == dst and not allow_direct:
                        continue
                    nd = cur.dist + weights[e]
                    nh = cur.hops + 1
                    better = nd < dist[v]
                    if not better and nd == dist[v]:
                        if nh < hops[v]:
                            better = True
                        elif nh == hops[v]:
                            better = lex_less(pred, u, pred[v], nh, buf_a, buf_b)
                    if better:
                        dist[v] = nd
                        hops[v] = nh
                        pred[v] = u
                        item.dist = nd
                        item.hops = nh
                        item.node = v
                        heap_push(heap, &size, item)
        if not done[dst]:
            return None, float("inf")
        path = []
        v = dst
        while v != -1:
            path.append(v)
            v = pred[v]
        path.reverse()
        return path, dist[dst]
    finally:
        free(dist)
        free(hops)
        free(pred)
        free(done)
        free(heap)
        free(buf_a)
        free(buf_b)


def bfs_hops(const i64[:] indptr, const i64[:] indices, const unsigned char[:] state, i64 src):
    cdef i64 n = indptr.shape[0] - 1
    out_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[:] out = out_arr
    cdef i64* queue = <i64*> malloc((n + 1) * sizeof(i64))
    cdef i64 head = 0, tail = 0, u, v, e, du
    try:
        with nogil:
            out[src] = 0
            queue[tail] = src
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                if u != src and state[u] != RELAY:
                    continue
                du = out[u] + 1
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    if out[v] == -1 and state[v] != EXCLUDED:
                        out[v] = du
                        queue[tail] = v
                        tail += 1
        return out_arr
    finally:
        free(queue)
