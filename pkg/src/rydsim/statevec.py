"""Dense state vectors over mixed local dimensions.

Atom 0 is the most significant digit of the basis index. Local dimension 2
means a qubit {|0>, |1>}; local dimension 3 adds the Rydberg level |r> as the
third basis state.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import (
    CapacityError,
    InvalidArgument,
    InvalidOperator,
    RydbergLeakageError,
)

MAX_ATOMS = 14
MAX_RYDBERG_ATOMS = 9
NORM_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class QuantumState:
    """Normalized amplitude vector plus per-atom local dimensions."""

    __slots__ = ("amplitudes", "dims")

    def __init__(self, amplitudes, dims, *, check=True):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in dims)
        if any(d not in (2, 3) for d in dims):
            raise InvalidArgument("local dimensions must be 2 or 3")
        if amps.size != int(np.prod(dims)):
            raise InvalidArgument(
                f"amplitude vector has length {amps.size}, expected {int(np.prod(dims))}"
            )
        if check and abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise InvalidArgument("state is not normalized")
        self.amplitudes = amps
        self.dims = dims

    @classmethod
    def from_amplitudes(cls, amplitudes, dims=None, normalize=False) -> QuantumState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if dims is None:
            n = int(round(np.log2(amps.size)))
            if 2**n != amps.size:
                raise InvalidArgument("cannot infer qubit count from vector length")
            dims = (2,) * n
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise InvalidArgument("zero vector cannot be normalized")
            amps = amps / norm
        return cls(amps, dims)

    @classmethod
    def basis(cls, digits, dims=None) -> QuantumState:
        """Computational basis state; ``digits`` may be a bitstring like ``"010"``."""
        digits = [int(c) for c in digits]
        dims = tuple(dims) if dims is not None else (2,) * len(digits)
        idx = int(np.ravel_multi_index(digits, dims))
        amps = np.zeros(int(np.prod(dims)), dtype=complex)
        amps[idx] = 1.0
        return cls(amps, dims)

    @property
    def n_atoms(self) -> int:
        return len(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> QuantumState:
        return QuantumState(self.amplitudes.copy(), self.dims, check=False)

    def __repr__(self):
        return f"QuantumState(dims={self.dims})"


@dataclass(frozen=True)
class PauliString:
    """Tensor product of Pauli factors, e.g. ``PauliString("ZXI", 0.5)``.

    Factor k acts on atom k.
    """

    factors: str
    coefficient: complex = 1.0

    def __post_init__(self):
        f = self.factors.upper()
        if not f or any(c not in PAULI for c in f):
            raise InvalidArgument(f"invalid Pauli string {self.factors!r}")
        object.__setattr__(self, "factors", f)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    def to_matrix(self) -> np.ndarray:
        return self.coefficient * reduce(np.kron, (PAULI[c] for c in self.factors))


@dataclass(frozen=True)
class ReadoutModel:
    """Classical bit flips applied after an ideal projective measurement.

    ``p_dark_given_bright``: an atom in |0> (bright) is read as 1.
    ``p_bright_given_dark``: an atom in |1> (dark) is read as 0.
    """

    p_dark_given_bright: float = 0.014
    p_bright_given_dark: float = 0.014

    def __post_init__(self):
        for name in ("p_dark_given_bright", "p_bright_given_dark"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1]")

    @classmethod
    def perfect(cls) -> ReadoutModel:
        return cls(0.0, 0.0)


def new_state(dims, max_atoms: int = MAX_ATOMS) -> QuantumState:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise InvalidArgument("at least one atom is required")
    cap = MAX_RYDBERG_ATOMS if 3 in dims else max_atoms
    if len(dims) > min(cap, max_atoms):
        raise CapacityError(f"{len(dims)} atoms exceeds the cap of {min(cap, max_atoms)}")
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[0] = 1.0
    return QuantumState(amps, dims)


def _check_atoms(state, atoms):
    atoms = [int(a) for a in atoms]
    if len(set(atoms)) != len(atoms):
        raise InvalidArgument("atom indices must be distinct")
    for a in atoms:
        if not 0 <= a < state.n_atoms:
            raise InvalidArgument(f"atom index {a} out of range")
    return atoms


def _apply_local(amps, dims, matrix, atoms):
    """Contract ``matrix`` into the tensor slots ``atoms``; no validation."""
    k = len(atoms)
    psi = amps.reshape(dims)
    sub = tuple(dims[a] for a in atoms)
    op = matrix.reshape(sub + sub)
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), atoms))
    out = np.moveaxis(out, list(range(k)), atoms)
    return out.reshape(-1)


def is_unitary(matrix, tol=NORM_TOL) -> bool:
    m = np.asarray(matrix)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(
        m.conj().T @ m, np.eye(m.shape[0]), atol=tol, rtol=0
    )


def apply_operator(state: QuantumState, matrix, atoms) -> QuantumState:
    """Apply a unitary to the listed atoms (first listed = most significant)."""
    atoms = _check_atoms(state, atoms)
    matrix = np.asarray(matrix, dtype=complex)
    dsub = int(np.prod([state.dims[a] for a in atoms]))
    if matrix.shape != (dsub, dsub):
        raise InvalidOperator(f"operator shape {matrix.shape} does not match targeted dimension {dsub}")
    if not is_unitary(matrix):
        raise InvalidOperator("operator is not unitary")
    return QuantumState(_apply_local(state.amplitudes, state.dims, matrix, atoms), state.dims, check=False)


def _check_qubits(state):
    if any(d != 2 for d in state.dims):
        raise InvalidArgument("operation requires all local dimensions to be 2")


def expectation(state: QuantumState, op) -> float:
    if isinstance(op, PauliString):
        _check_qubits(state)
        if op.n_qubits != state.n_atoms:
            raise InvalidArgument("Pauli string length does not match qubit count")
        if abs(op.coefficient.imag) > NORM_TOL:
            raise InvalidOperator("Pauli string with complex coefficient is not Hermitian")
        phi = state.amplitudes
        for k, c in enumerate(op.factors):
            if c != "I":
                phi = _apply_local(phi, state.dims, PAULI[c], [k])
        return float(op.coefficient.real * np.vdot(state.amplitudes, phi).real)
    m = np.asarray(op, dtype=complex)
    dim = state.amplitudes.size
    if m.ndim == 1:
        if m.size != dim or np.abs(m.imag).max(initial=0.0) > NORM_TOL:
            raise InvalidOperator("diagonal operator must be real with matching length")
        return float(np.dot(state.probabilities(), m.real))
    if m.shape != (dim, dim):
        raise InvalidArgument(f"operator shape {m.shape} does not match state dimension {dim}")
    if not np.allclose(m, m.conj().T, atol=NORM_TOL, rtol=0):
        raise InvalidOperator("operator is not Hermitian")
    return float(np.vdot(state.amplitudes, m @ state.amplitudes).real)


def project_to_qubits(state: QuantumState, tol: float = 1e-6) -> QuantumState:
    """Drop the |r> level of every 3-level atom, checking residual population."""
    if all(d == 2 for d in state.dims):
        return state
    psi = state.amplitudes.reshape(state.dims)
    keep = tuple(slice(0, 2) for _ in state.dims)
    sub = psi[keep]
    leak = 1.0 - float(np.vdot(sub, sub).real)
    if leak > tol:
        raise RydbergLeakageError(f"residual Rydberg population {leak:.3e} exceeds {tol:g}")
    sub = sub.reshape(-1)
    return QuantumState(sub / np.linalg.norm(sub), (2,) * state.n_atoms, check=False)


def bitstrings(indices, n) -> list[str]:
    return [format(int(i), f"0{n}b") for i in indices]


def sample_indices(state: QuantumState, shots: int, model: ReadoutModel | None, seed) -> np.ndarray:
    """Readout-corrupted measurement outcomes as basis indices (atom 0 = MSB)."""
    if shots < 1:
        raise InvalidArgument("shots must be >= 1")
    state = project_to_qubits(state)
    model = model if model is not None else ReadoutModel.perfect()
    rng = np.random.default_rng(seed)
    p = state.probabilities()
    p = p / p.sum()
    idx = rng.choice(p.size, size=shots, p=p)
    n = state.n_atoms
    if model.p_dark_given_bright == 0.0 and model.p_bright_given_dark == 0.0:
        return idx
    shifts = n - 1 - np.arange(n)
    bits = (idx[:, None] >> shifts) & 1
    u = rng.random(bits.shape)
    flip = np.where(bits == 0, u < model.p_dark_given_bright, u < model.p_bright_given_dark)
    bits = bits ^ flip
    return (bits << shifts).sum(axis=1)


def sample(state: QuantumState, shots: int, model: ReadoutModel | None = None, seed=None) -> Counter:
    """Measure ``shots`` times; returns a Counter of atom-0-first bitstrings."""
    idx = sample_indices(state, shots, model, seed)
    values, counts = np.unique(idx, return_counts=True)
    n = state.n_atoms
    return Counter(dict(zip(bitstrings(values, n), counts.tolist())))


def state_fidelity(a: QuantumState, b: QuantumState) -> float:
    if a.dims != b.dims:
        raise InvalidArgument("states have different dimensions")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def write_counts_csv(counts: Counter, path, header_lines=()) -> None:
    lines = [f"# {h}" for h in header_lines]
    lines.append("bitstring,count")
    lines.extend(f"{b},{c}" for b, c in sorted(counts.items()))
    Path(path).write_text("\n".join(lines) + "\n")
