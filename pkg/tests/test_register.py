import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydsim.errors import InvalidArgument, InvalidRegister
from rydsim.register import (
    Register,
    blockade_radius,
    build_lattice,
    interaction_matrix,
    unit_disk_graph,
)


def pairs_within(points, radius):
    pts = np.asarray(points, dtype=float)
    return {
        (i, j)
        for i, j in itertools.combinations(range(len(pts)), 2)
        if math.dist(pts[i], pts[j]) < radius
    }


coords = st.lists(
    st.tuples(*[st.integers(-20, 20)] * 2), min_size=1, max_size=12, unique=True
)


class TestRegister:
    def test_positions_padded_to_3d(self):
        reg = Register([[1.0], [2.0]])
        assert reg.positions.shape == (2, 3)
        assert np.allclose(reg.positions[:, 1:], 0)

    def test_duplicate_positions_rejected(self):
        with pytest.raises(InvalidRegister):
            Register([[0, 0], [0, 0]])

    def test_empty_rejected(self):
        with pytest.raises(InvalidRegister):
            Register(np.zeros((0, 3)))

    def test_positions_read_only(self):
        reg = Register([[0, 0], [1, 0]])
        with pytest.raises(ValueError):
            reg.positions[0, 0] = 5

    def test_json_round_trip(self, tmp_path):
        reg = build_lattice("triangular", [3, 2], 4.0)
        path = tmp_path / "reg.json"
        reg.save(path)
        back = Register.load(path)
        assert np.allclose(back.positions, reg.positions)

    @pytest.mark.parametrize("text", ['[[0, "a"]]', "[[0, NaN]]", "[[0,0,0,0]]", "{}", "[]"])
    def test_bad_json(self, text):
        with pytest.raises(InvalidRegister):
            Register.from_json(text)

    @given(coords)
    def test_distances_positive_symmetric(self, pts):
        reg = Register(pts)
        d = reg.distances
        assert np.allclose(d, d.T)
        off = d[~np.eye(len(pts), dtype=bool)]
        assert (off > 0).all()


class TestLattice:
    def test_chain(self):
        reg = build_lattice("chain", [3], 4.0)
        assert np.allclose(reg.positions, [[0, 0, 0], [4, 0, 0], [8, 0, 0]])

    def test_square(self):
        reg = build_lattice("square", [2, 2], 5.0)
        d = reg.distances[np.triu_indices(4, 1)]
        assert len(reg) == 4
        assert d.min() == pytest.approx(5.0)
        assert d.max() == pytest.approx(5 * math.sqrt(2))

    def test_cubic_edges(self):
        reg = build_lattice("cubic", [2, 2, 2], 1.0)
        g = unit_disk_graph(reg, 1.1)
        assert len(reg) == 8
        assert len(g.edges) == len(pairs_within(reg.positions, 1.1)) == 12

    def test_triangular_nearest_neighbours_equal(self):
        reg = build_lattice("triangular", [4, 4], 2.0)
        d = reg.distances[np.triu_indices(len(reg), 1)]
        assert d.min() == pytest.approx(2.0)
        # interior site of a triangular lattice has six nearest neighbours
        assert max(int(np.isclose(row, 2.0).sum()) for row in reg.distances) == 6

    def test_row_major_order(self):
        reg = build_lattice("square", [3, 2], 1.0)
        assert np.allclose(reg.positions[:4, :2], [[0, 0], [1, 0], [2, 0], [0, 1]])

    @pytest.mark.parametrize("kind,extents", [("square", [3]), ("cubic", [2, 2]), ("hex", [2])])
    def test_bad_arguments(self, kind, extents):
        with pytest.raises(InvalidArgument):
            build_lattice(kind, extents, 1.0)

    def test_nonpositive_spacing(self):
        with pytest.raises(InvalidArgument):
            build_lattice("chain", [3], 0.0)

    @given(st.sampled_from(["chain", "square", "triangular", "cubic"]), st.lists(st.integers(1, 4), min_size=3, max_size=3))
    def test_site_count_is_product(self, kind, ext):
        dims = {"chain": 1, "square": 2, "triangular": 2, "cubic": 3}[kind]
        reg = build_lattice(kind, ext[:dims], 1.5)
        assert len(reg) == math.prod(ext[:dims])


class TestBlockadeRadius:
    @pytest.mark.parametrize("omega,c6,expected", [(1.0, 1.0, 1.0), (1.0, 64.0, 2.0)])
    def test_trivial(self, omega, c6, expected):
        assert blockade_radius(omega, c6) == pytest.approx(expected)

    def test_against_root_finder(self):
        from scipy.optimize import brentq

        r = brentq(lambda x: 400.0 / x**6 - 6.25, 0.1, 10)
        assert blockade_radius(6.25, 400.0) == pytest.approx(r, rel=1e-12)
        assert r == pytest.approx(2.0)

    @pytest.mark.parametrize("omega,c6", [(0, 1), (-1, 1), (1, 0)])
    def test_invalid(self, omega, c6):
        with pytest.raises(InvalidArgument):
            blockade_radius(omega, c6)


class TestUnitDiskGraph:
    def test_one_edge(self):
        assert unit_disk_graph(Register([[0, 0], [4, 0]]), 5).edges == {(0, 1)}

    def test_boundary_is_strict(self):
        assert not unit_disk_graph(Register([[0, 0], [5, 0]]), 5).edges

    def test_square_lattice_radius_2_3(self):
        reg = build_lattice("square", [3, 3], 1.0)
        g = unit_disk_graph(reg, 2.3)
        assert g.edges == pairs_within(reg.positions, 2.3)
        assert (0, 2) in g.edges  # straight two
        assert (0, 5) in g.edges  # knight move
        assert (0, 8) not in g.edges  # (2, 2) diagonal

    def test_invalid_radius(self):
        with pytest.raises(InvalidArgument):
            unit_disk_graph(Register([[0, 0]]), 0)

    @given(coords, st.floats(0.5, 10), st.floats(0.5, 10))
    def test_edges_monotone_in_radius(self, pts, r1, r2):
        reg = Register(pts)
        lo, hi = sorted((r1, r2))
        assert unit_disk_graph(reg, lo).edges <= unit_disk_graph(reg, hi).edges

    @given(coords, st.floats(0.5, 15))
    def test_matches_enumeration(self, pts, radius):
        g = unit_disk_graph(Register(pts), radius)
        assert g.edges == pairs_within(pts, radius)
        assert all(i < j for i, j in g.edges)

    def test_independence(self):
        g = unit_disk_graph(build_lattice("chain", [4], 1.0), 1.5)
        assert g.is_independent([0, 2])
        assert not g.is_independent([1, 2])
        assert g.is_independent([])


class TestInteractionMatrix:
    def test_power_six(self):
        m = interaction_matrix(Register([[0, 0], [2, 0]]), 1.0, 6)
        assert m[0, 1] == pytest.approx(1 / 64)

    def test_power_three(self):
        m = interaction_matrix(Register([[0, 0], [2, 0]]), 1.0, 3)
        assert m[0, 1] == pytest.approx(1 / 8)

    def test_chain(self):
        m = interaction_matrix(build_lattice("chain", [3], 1.0), 1.0, 6)
        assert sorted(m[np.triu_indices(3, 1)]) == pytest.approx([1 / 64, 1, 1])

    def test_bad_power(self):
        with pytest.raises(InvalidArgument):
            interaction_matrix(Register([[0, 0], [1, 0]]), 1.0, 4)

    @given(coords, st.sampled_from([3, 6]), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
    def test_symmetric_zero_diagonal(self, pts, power, coeff):
        m = interaction_matrix(Register(pts), coeff, power)
        assert np.array_equal(m, m.T)
        assert not np.diag(m).any()
