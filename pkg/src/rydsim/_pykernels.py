"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module.
"""
import numpy as np


def interaction_diagonal(V):
    V = np.asarray(V, dtype=np.float64)
    n = V.shape[0]
    states = np.arange(1 << n, dtype=np.int64)
    bits = ((states[:, None] >> (n - 1 - np.arange(n))) & 1).astype(np.float64)
    upper = np.triu(V, k=1)
    return np.einsum("si,ij,sj->s", bits, upper, bits)


def mis_scan(adj):
    adj = np.asarray(adj, dtype=np.int64)
    n = adj.shape[0]
    subsets = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(subsets.shape, dtype=bool)
    for i in range(n):
        has_i = ((subsets >> i) & 1).astype(bool)
        ok &= ~has_i | ((subsets & adj[i]) == 0)
    sizes = np.zeros(subsets.shape, dtype=np.int64)
    for i in range(n):
        sizes += (subsets >> i) & 1
    sizes[~ok] = -1
    best = int(sizes.max())
    return best, subsets[sizes == best]


def route_greedy(pairs, dist, nxt, n_phys):
    pairs = np.asarray(pairs, dtype=np.int64)
    dist = np.asarray(dist)
    if (dist < 0).any():
        raise ValueError("disconnected")
    l2p = list(range(n_phys))
    p2l = list(range(n_phys))
    events = []
    for qa, qb in pairs.tolist():
        pa, pb = l2p[qa], l2p[qb]
        while dist[pa, pb] > 1:
            step = int(nxt[pa, pb])
            la, lb = p2l[pa], p2l[step]
            p2l[pa], p2l[step] = lb, la
            l2p[la], l2p[lb] = step, pa
            events.append((1, pa, step))
            pa = step
        events.append((0, pa, pb))
    return np.array(events, dtype=np.int64).reshape(-1, 3), np.array(l2p, dtype=np.int64)
