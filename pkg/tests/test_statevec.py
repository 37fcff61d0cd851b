import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from conftest import X, Z, kron_all, random_state_vector, random_unitary, site_op
from scipy.stats import chisquare

from rydsim.errors import CapacityError, InvalidArgument, InvalidOperator, RydbergLeakageError
from rydsim.statevec import (
    MAX_ATOMS,
    MAX_RYDBERG_ATOMS,
    PauliString,
    QuantumState,
    ReadoutModel,
    apply_operator,
    expectation,
    new_state,
    project_to_qubits,
    sample,
    state_fidelity,
    write_counts_csv,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PLUS = QuantumState.from_amplitudes([1, 1], normalize=True)
BELL = QuantumState.from_amplitudes([1, 0, 0, 1], normalize=True)


def embed(matrix, atoms, n):
    """Dense oracle: operator on ``atoms`` (given order) of an ``n``-qubit register."""
    k = len(atoms)
    full = np.zeros((2**n, 2**n), dtype=complex)
    for s in range(2**n):
        bits = [(s >> (n - 1 - q)) & 1 for q in range(n)]
        col = int("".join(str(bits[a]) for a in atoms), 2)
        for row in range(2**k):
            amp = matrix[row, col]
            if amp == 0:
                continue
            out = list(bits)
            for pos, a in enumerate(atoms):
                out[a] = (row >> (k - 1 - pos)) & 1
            full[int("".join(map(str, out)), 2), s] += amp
    return full


class TestNewState:
    @pytest.mark.parametrize("dims,length", [([2], 2), ([2, 2], 4), ([3, 2], 6)])
    def test_ground_state(self, dims, length):
        psi = new_state(dims)
        assert psi.amplitudes.size == length
        assert psi.amplitudes[0] == 1 and np.count_nonzero(psi.amplitudes) == 1

    def test_caps(self):
        with pytest.raises(CapacityError):
            new_state([2] * (MAX_ATOMS + 1))
        with pytest.raises(CapacityError):
            new_state([3] * (MAX_RYDBERG_ATOMS + 1))

    @pytest.mark.parametrize("dims", [[], [4], [1, 2]])
    def test_invalid_dims(self, dims):
        with pytest.raises(InvalidArgument):
            new_state(dims)

    def test_unnormalized_rejected(self):
        with pytest.raises(InvalidArgument):
            QuantumState([1, 1], (2,))

    def test_basis_ordering(self):
        assert np.argmax(QuantumState.basis("10").amplitudes) == 2
        assert np.argmax(QuantumState.basis([1, 2], (2, 3)).amplitudes) == 5


class TestApplyOperator:
    def test_identity_unchanged(self, rng):
        psi = QuantumState(random_state_vector(8, rng), (2, 2, 2))
        out = apply_operator(psi, np.eye(2), [1])
        assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_not_on_zero(self):
        out = apply_operator(new_state([2]), [[0, 1], [1, 0]], [0])
        assert np.allclose(out.amplitudes, [0, 1])

    def test_hadamard_twice(self, rng):
        psi = QuantumState(random_state_vector(16, rng), (2,) * 4)
        out = apply_operator(apply_operator(psi, H, [2]), H, [2])
        assert np.abs(out.amplitudes - psi.amplitudes).max() < 1e-9

    def test_atom_zero_is_msb(self):
        out = apply_operator(new_state([2, 2]), X, [0])
        assert np.allclose(out.amplitudes, [0, 0, 1, 0])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidOperator):
            apply_operator(new_state([2, 2]), np.eye(4), [0])

    def test_non_unitary(self):
        with pytest.raises(InvalidOperator):
            apply_operator(new_state([2]), [[1, 1], [0, 1]], [0])

    def test_bad_indices(self):
        with pytest.raises(InvalidArgument):
            apply_operator(new_state([2, 2]), np.eye(4), [0, 0])
        with pytest.raises(InvalidArgument):
            apply_operator(new_state([2]), np.eye(2), [3])

    def test_matches_dense_embedding(self, rng):
        n = 4
        psi = QuantumState(random_state_vector(2**n, rng), (2,) * n)
        u = random_unitary(4, rng)
        for atoms in ([0, 1], [3, 1], [2, 0]):
            out = apply_operator(psi, u, atoms)
            assert np.allclose(out.amplitudes, embed(u, atoms, n) @ psi.amplitudes, atol=1e-12)

    def test_qutrit_slot(self, rng):
        psi = QuantumState(random_state_vector(6, rng), (3, 2))
        u = random_unitary(3, rng)
        out = apply_operator(psi, u, [0])
        assert np.allclose(out.amplitudes, np.kron(u, np.eye(2)) @ psi.amplitudes)

    def test_norm_after_many_unitaries(self):
        rng = np.random.default_rng(7)
        n = 4
        psi = QuantumState(random_state_vector(2**n, rng), (2,) * n)
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            atoms = list(rng.choice(n, size=k, replace=False))
            psi = apply_operator(psi, random_unitary(2**k, rng), atoms)
        assert abs(1 - np.sum(np.abs(psi.amplitudes) ** 2)) < 1e-9

    @given(st.integers(0, 2**32 - 1), st.permutations(range(4)))
    def test_disjoint_operators_commute(self, seed, perm):
        rng = np.random.default_rng(seed)
        psi = QuantumState(random_state_vector(16, rng), (2,) * 4)
        a, b = list(perm[:2]), list(perm[2:3])
        ua, ub = random_unitary(4, rng), random_unitary(2, rng)
        ab = apply_operator(apply_operator(psi, ua, a), ub, b)
        ba = apply_operator(apply_operator(psi, ub, b), ua, a)
        assert np.abs(ab.amplitudes - ba.amplitudes).max() < 1e-9


class TestExpectation:
    def test_z_on_zero(self):
        assert expectation(new_state([2]), PauliString("Z")) == pytest.approx(1.0)

    def test_x_on_plus(self):
        assert expectation(PLUS, PauliString("X")) == pytest.approx(1.0)

    def test_zz_on_bell(self):
        assert expectation(BELL, PauliString("ZZ")) == pytest.approx(1.0)
        assert expectation(BELL, np.kron(Z, Z)) == pytest.approx(1.0)

    def test_dense_and_diagonal_forms_agree(self, rng):
        psi = QuantumState(random_state_vector(8, rng), (2, 2, 2))
        d = rng.normal(size=8)
        assert expectation(psi, d) == pytest.approx(expectation(psi, np.diag(d)))

    @given(st.text("IXYZ", min_size=3, max_size=3), st.integers(0, 2**32 - 1))
    def test_pauli_string_matches_kron(self, factors, seed):
        rng = np.random.default_rng(seed)
        psi = QuantumState(random_state_vector(8, rng), (2, 2, 2))
        mats = {"I": np.eye(2), "X": X, "Y": np.array([[0, -1j], [1j, 0]]), "Z": Z}
        dense = kron_all([mats[c] for c in factors])
        expected = np.vdot(psi.amplitudes, dense @ psi.amplitudes).real
        assert expectation(psi, PauliString(factors, 0.7)) == pytest.approx(0.7 * expected, abs=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidOperator):
            expectation(new_state([2]), [[0, 1], [0, 0]])

    def test_wrong_length(self):
        with pytest.raises(InvalidArgument):
            expectation(new_state([2]), PauliString("ZZ"))


class TestSampling:
    def test_perfect_zero(self):
        assert sample(new_state([2]), 100, ReadoutModel.perfect(), seed=0) == {"0": 100}

    def test_plus_frequency(self):
        counts = sample(PLUS, 10_000, ReadoutModel.perfect(), seed=1)
        assert abs(counts["1"] / 10_000 - 0.5) < 0.02

    def test_readout_error_rate(self):
        counts = sample(new_state([2]), 100_000, ReadoutModel(0.014, 0.0), seed=2)
        assert abs(counts["1"] / 100_000 - 0.014) < 0.002

    def test_dark_flip_direction(self):
        one = QuantumState.basis("1")
        counts = sample(one, 100_000, ReadoutModel(0.0, 0.05), seed=3)
        assert abs(counts["0"] / 100_000 - 0.05) < 0.003

    def test_deterministic(self):
        psi = QuantumState.from_amplitudes(np.arange(1, 9), normalize=True)
        assert sample(psi, 500, None, seed=5) == sample(psi, 500, None, seed=5)

    def test_born_rule_chi_square(self, rng):
        psi = QuantumState(random_state_vector(8, rng), (2, 2, 2))
        shots = 20_000
        counts = sample(psi, shots, ReadoutModel.perfect(), seed=11)
        observed = [counts.get(format(k, "03b"), 0) for k in range(8)]
        expected = psi.probabilities() * shots
        assert chisquare(observed, expected).pvalue > 1e-3

    def test_leakage_raises(self):
        psi = QuantumState.basis([2], (3,))
        with pytest.raises(RydbergLeakageError):
            sample(psi, 10, seed=0)

    def test_projection_drops_empty_rydberg_level(self):
        psi = QuantumState.basis([1, 0], (3, 3))
        assert project_to_qubits(psi).dims == (2, 2)
        assert sample(psi, 10, seed=0) == {"10": 10}

    def test_invalid_shots(self):
        with pytest.raises(InvalidArgument):
            sample(new_state([2]), 0)

    def test_invalid_probability(self):
        with pytest.raises(InvalidArgument):
            ReadoutModel(1.5, 0.0)

    def test_csv(self, tmp_path):
        path = tmp_path / "c.csv"
        write_counts_csv({"01": 3, "00": 2}, path, ["seed=1"])
        assert path.read_text() == "# seed=1\nbitstring,count\n00,2\n01,3\n"


class TestFidelity:
    def test_identical(self):
        assert state_fidelity(BELL, BELL) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert state_fidelity(QuantumState.basis("0"), QuantumState.basis("1")) == 0.0

    def test_half(self):
        assert state_fidelity(new_state([2]), PLUS) == pytest.approx(0.5)

    def test_phase_invariant(self, rng):
        v = random_state_vector(4, rng)
        a, b = QuantumState(v, (2, 2)), QuantumState(np.exp(0.3j) * v, (2, 2))
        assert state_fidelity(a, b) == pytest.approx(1.0)


def test_site_op_helper_consistency():
    # the test helper itself: site 0 is the leftmost factor
    assert np.allclose(site_op(X, 0, 2) @ [1, 0, 0, 0], [0, 0, 1, 0])
