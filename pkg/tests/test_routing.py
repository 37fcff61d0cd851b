import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from rydsim.errors import InvalidArgument, InvalidGraph
from rydsim.gates import Circuit, circuit_unitary
from rydsim.routing import (
    ConnectivityGraph,
    benchmark,
    check_equivalence,
    lattice_shape,
    make_layout,
    overhead,
    permutation_matrix,
    random_circuit,
    route,
)


def lattice_pairs(shape, radius):
    pts = list(itertools.product(*[range(s) for s in shape]))
    return sum(1 for a, b in itertools.combinations(pts, 2) if math.dist(a, b) < radius)


class TestLayouts:
    def test_nn_2x2(self):
        g = make_layout("nn2d", 4)
        assert len(g.edges) == 4

    def test_disk_radius_2_3(self):
        g = make_layout("disk2d", 9, 2.3)
        pos = g.positions

        def idx(x, y):
            return int(np.flatnonzero((pos[:, 0] == x) & (pos[:, 1] == y))[0])

        assert g.has_edge(idx(0, 0), idx(2, 0))
        assert g.has_edge(idx(0, 0), idx(2, 1))
        assert not g.has_edge(idx(0, 0), idx(2, 2))
        assert len(g.edges) == lattice_pairs((3, 3), 2.3)

    def test_small_disk_is_nn(self):
        assert make_layout("disk2d", 16, 1.1).edges == make_layout("nn2d", 16).edges

    def test_3d_edge_count(self):
        g = make_layout("disk3d", 8, 1.1)
        assert len(g.edges) == 12

    @pytest.mark.parametrize("n", [2, 5, 7, 12, 16, 20, 48])
    def test_padding(self, n):
        for kind in ("nn2d", "disk3d"):
            shape = lattice_shape(kind, n)
            assert math.prod(shape) >= n
            assert max(shape) <= 2 * min(shape)
            assert make_layout(kind, n).n_qubits == math.prod(shape)

    def test_exact_tilings(self):
        assert sorted(lattice_shape("nn2d", 16)) == [4, 4]
        assert sorted(lattice_shape("disk3d", 8)) == [2, 2, 2]

    def test_unknown_layout(self):
        with pytest.raises(InvalidArgument):
            make_layout("hex", 9)


class TestRandomCircuit:
    def test_zero_gates(self):
        with pytest.raises(InvalidArgument):
            random_circuit(4, 0, seed=0)

    def test_deterministic(self):
        a = random_circuit(8, 50, seed=3).to_list()
        assert a == random_circuit(8, 50, seed=3).to_list()
        assert a != random_circuit(8, 50, seed=4).to_list()

    def test_pairs_uniform(self):
        n, m = 48, 500
        pairs = Counter()
        for s in range(20):
            pairs.update(g.qubits for g in random_circuit(n, m, seed=s))
        all_pairs = list(itertools.permutations(range(n), 2))
        observed = np.array([pairs.get(p, 0) for p in all_pairs])
        assert observed.sum() == 20 * m
        assert chisquare(observed).pvalue > 0.05

    def test_distinct_qubits(self):
        assert all(g.qubits[0] != g.qubits[1] for g in random_circuit(3, 200, seed=1))


def nn_grid_2x2():
    return ConnectivityGraph([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], {(0, 1), (0, 2), (1, 3), (2, 3)})


class TestRoute:
    def test_conforming_no_swaps(self):
        c = Circuit(n_qubits=4).append("CZ", [0, 1]).append("CNOT", [2, 3])
        r = route(c, nn_grid_2x2())
        assert r.swaps == 0
        assert overhead(r) == 1.0

    def test_opposite_corners(self):
        c = Circuit(n_qubits=4).append("CZ", [0, 3])
        r = route(c, nn_grid_2x2())
        assert r.swaps >= 1
        assert overhead(r) == 4.0
        assert check_equivalence(r) < 1e-9

    def test_all_gates_on_edges(self):
        g = make_layout("nn2d", 9)
        r = route(random_circuit(9, 80, seed=2), g)
        assert all(g.has_edge(*x.qubits) for x in r.output if len(x.qubits) == 2)

    @settings(max_examples=25)
    @given(st.integers(0, 10**6), st.integers(1, 12), st.sampled_from(["nn2d", "disk2d"]))
    def test_equivalence_under_placement(self, seed, m, kind):
        rng = np.random.default_rng(seed)
        c = random_circuit(6, m, seed)
        # sprinkle single-qubit gates so relocation is exercised
        for _ in range(3):
            c.gates.insert(int(rng.integers(0, len(c.gates) + 1)), Circuit().append("T", [int(rng.integers(0, 6))]).gates[0])
        r = route(c, make_layout(kind, 6, 1.5))
        assert check_equivalence(r) < 1e-9

    def test_disconnected(self):
        g = ConnectivityGraph(np.zeros((4, 3)) + np.arange(4)[:, None], {(0, 1), (2, 3)})
        with pytest.raises(InvalidGraph):
            route(Circuit(n_qubits=4).append("CZ", [0, 2]), g)

    def test_three_qubit_gate_rejected(self):
        with pytest.raises(InvalidArgument):
            route(Circuit().append("CCZ", [0, 1, 2]), nn_grid_2x2())

    def test_too_wide(self):
        with pytest.raises(InvalidArgument):
            route(random_circuit(5, 3, 0), nn_grid_2x2())

    def test_permutation_matrix(self):
        # move wire 0 -> 1 and 1 -> 0: a SWAP
        swap = circuit_unitary(Circuit().append("SWAP", [0, 1]))
        assert np.allclose(permutation_matrix([1, 0], 2), swap)


class TestOverhead:
    def test_disk_beats_nn(self):
        rows = benchmark(["nn2d", "disk2d", "disk3d"], 16, [50], 32, seed=5)
        by = {r.layout: r.mean_overhead for r in rows}
        assert by["disk2d"] < by["nn2d"]
        assert by["disk3d"] <= by["disk2d"]

    @pytest.mark.parametrize("kind", ["disk2d", "disk3d"])
    def test_monotone_in_radius(self, kind):
        means = []
        for radius in (1.1, 1.5, 2.05, 2.3, 2.9, 3.2, 4.5):
            g = make_layout(kind, 16, radius)
            means.append(np.mean([overhead(route(random_circuit(16, 40, s), g)) for s in range(32)]))
        assert all(b <= a for a, b in zip(means, means[1:]))
        assert means[-1] == 1.0

    def test_benchmark_rows(self):
        rows = benchmark(["nn2d", "disk2d"], 9, [10, 20], 4, seed=1)
        assert [(r.layout, r.n_gates) for r in rows] == [("nn2d", 10), ("disk2d", 10), ("nn2d", 20), ("disk2d", 20)]
        assert all(r.mean_overhead >= 1 and r.std >= 0 for r in rows)

    def test_benchmark_thread_independent(self):
        a = benchmark(["nn2d", "disk2d", "disk3d"], 9, [15], 6, seed=2, threads=1)
        b = benchmark(["nn2d", "disk2d", "disk3d"], 9, [15], 6, seed=2, threads=3)
        assert a == b
