import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydsim import kernels
from rydsim.routing import make_layout, random_circuit

BACKENDS = kernels.available_backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def diag_oracle(v):
    n = len(v)
    out = np.zeros(2**n)
    for s in range(2**n):
        bits = [(s >> k) & 1 for k in range(n)]
        out[s] = sum(v[i, j] * bits[i] * bits[j] for i in range(n) for j in range(i + 1, n))
    return out


symmetric = st.integers(1, 7).flatmap(
    lambda n: st.lists(st.floats(-5, 5), min_size=n * n, max_size=n * n).map(
        lambda vals: (lambda m: m + m.T - 2 * np.diag(np.diag(m)))(np.triu(np.array(vals).reshape(n, n), 1))
    )
)
masks = st.integers(1, 10).flatmap(
    lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])).map(
        lambda edges: _masks(n, edges)
    )
)


def _masks(n, edges):
    m = np.zeros(n, dtype=np.int64)
    for a, b in edges:
        m[a] |= 1 << b
        m[b] |= 1 << a
    return m


def test_active_backend_matches_flag():
    assert kernels.BACKEND in BACKENDS
    assert kernels.get_backend() is kernels.get_backend(kernels.BACKEND)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_pure_python_env_override():
    env = dict(os.environ, RYDSIM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from rydsim import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("name", BACKENDS)
@given(symmetric)
def test_interaction_diagonal(name, v):
    # atom 0 is the most significant bit; the oracle uses LSB order, so reverse
    got = kernels.get_backend(name).interaction_diagonal(np.ascontiguousarray(v[::-1, ::-1]))
    assert np.allclose(got, diag_oracle(v))


@pytest.mark.parametrize("name", BACKENDS)
@given(masks)
def test_mis_scan_against_enumeration(name, adj):
    n = adj.size
    independent = [s for s in range(1 << n) if all(not ((s >> k) & 1 and s & adj[k]) for k in range(n))]
    best = max(bin(s).count("1") for s in independent)
    size, found = kernels.get_backend(name).mis_scan(adj)
    assert size == best
    assert sorted(int(x) for x in found) == [s for s in independent if bin(s).count("1") == best]


@needs_cython
@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(["nn2d", "disk2d", "disk3d"]), st.integers(1, 120))
def test_route_backends_agree(seed, kind, m):
    g = make_layout(kind, 12, 1.5)
    dist, nxt = g.shortest_paths()
    pairs = np.array([x.qubits for x in random_circuit(g.n_qubits, m, seed)], dtype=np.int64)
    ev_c, l2p_c = kernels.get_backend("cython").route_greedy(pairs, dist, nxt, g.n_qubits)
    ev_p, l2p_p = kernels.get_backend("python").route_greedy(pairs, dist, nxt, g.n_qubits)
    assert np.array_equal(np.asarray(ev_c), np.asarray(ev_p))
    assert np.array_equal(np.asarray(l2p_c), np.asarray(l2p_p))


@needs_cython
@given(symmetric)
def test_diagonal_backends_agree(v):
    a = kernels.get_backend("cython").interaction_diagonal(v)
    b = kernels.get_backend("python").interaction_diagonal(v)
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_route_disconnected(name):
    dist = np.array([[0, -1], [-1, 0]], dtype=np.int64)
    nxt = np.full((2, 2), -1, dtype=np.int64)
    with pytest.raises(ValueError):
        kernels.get_backend(name).route_greedy(np.array([[0, 1]], dtype=np.int64), dist, nxt, 2)
