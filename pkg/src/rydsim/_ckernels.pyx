# cython: language_level=3
"""Compiled hot loops. Must stay behaviourally identical to ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def interaction_diagonal(double[:, :] V):
    """Diagonal of sum_{i<j} V_ij n_i n_j over all 2**n basis states (atom 0 = MSB)."""
    cdef Py_ssize_t n = V.shape[0]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(dim, dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t s, i, j
    cdef double e
    cdef int bi
    for s in range(dim):
        e = 0.0
        for i in range(n):
            bi = (s >> (n - 1 - i)) & 1
            if bi:
                for j in range(i + 1, n):
                    if (s >> (n - 1 - j)) & 1:
                        e += V[i, j]
        o[s] = e
    return out


cdef inline int _popcount(i64 x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def mis_scan(i64[:] adj):
    """Exhaustive maximum-independent-set scan.

    ``adj[i]`` is the neighbour bitmask of vertex i (bit k <-> vertex k).
    Returns ``(best_size, masks)`` with every maximum independent set.
    """
    cdef Py_ssize_t n = adj.shape[0]
    cdef i64 dim = (<i64>1) << n
    cdef i64 s, rest, low
    cdef int i, size, best = 0
    cdef Py_ssize_t count = 0
    cdef bint ok
    # first pass: best size and multiplicity
    for s in range(dim):
        ok = True
        rest = s
        while rest:
            low = rest & (-rest)
            i = _popcount(low - 1)
            if adj[i] & s:
                ok = False
                break
            rest ^= low
        if not ok:
            continue
        size = _popcount(s)
        if size > best:
            best = size
            count = 1
        elif size == best:
            count += 1
    cdef cnp.ndarray[i64, ndim=1] masks = np.empty(count, dtype=np.int64)
    cdef Py_ssize_t k = 0
    for s in range(dim):
        if _popcount(s) != best:
            continue
        ok = True
        rest = s
        while rest:
            low = rest & (-rest)
            i = _popcount(low - 1)
            if adj[i] & s:
                ok = False
                break
            rest ^= low
        if ok:
            masks[k] = s
            k += 1
    return best, masks


def route_greedy(i64[:, :] pairs, i64[:, :] dist, i64[:, :] nxt, Py_ssize_t n_phys):
    """Greedy SWAP insertion along precomputed shortest paths.

    Returns ``(events, l2p)``; each event row is ``(kind, a, b)`` on physical
    qubits with kind 0 = original gate, 1 = inserted SWAP.
    """
    cdef Py_ssize_t m = pairs.shape[0]
    cdef cnp.ndarray[i64, ndim=1] l2p_arr = np.arange(n_phys, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] p2l_arr = np.arange(n_phys, dtype=np.int64)
    cdef i64[:] l2p = l2p_arr
    cdef i64[:] p2l = p2l_arr
    cdef Py_ssize_t g, a, b
    cdef i64 pa, pb, step, la, lb, diameter = 1
    for a in range(n_phys):
        for b in range(n_phys):
            if dist[a, b] < 0:
                raise ValueError("disconnected")
            if dist[a, b] > diameter:
                diameter = dist[a, b]
    cdef cnp.ndarray[i64, ndim=2] ev_arr = np.empty((m * diameter, 3), dtype=np.int64)
    cdef i64[:, :] ev = ev_arr
    cdef Py_ssize_t k = 0
    for g in range(m):
        pa = l2p[pairs[g, 0]]
        pb = l2p[pairs[g, 1]]
        while dist[pa, pb] > 1:
            step = nxt[pa, pb]
            la = p2l[pa]
            lb = p2l[step]
            p2l[pa] = lb
            p2l[step] = la
            l2p[la] = step
            l2p[lb] = pa
            ev[k, 0] = 1
            ev[k, 1] = pa
            ev[k, 2] = step
            k += 1
            pa = step
        ev[k, 0] = 0
        ev[k, 1] = pa
        ev[k, 2] = pb
        k += 1
    return ev_arr[:k], l2p_arr
