"""Digital gates synthesized from laser pulses and Rydberg blockade.

Single-qubit pulses rotate the Bloch vector about
``(Ω cosφ, Ω sinφ, δ)`` by the generalized area ``τ sqrt(Ω² + δ²)``:
``U = exp(-i τ/2 (Ω cosφ X + Ω sinφ Y + δ Z))``. With this sign choice a π pulse
at ``δ = Ω``, ``φ = 0`` gives ``-i H``.

Blockade gates are simulated on three-level atoms {|0>, |1>, |r>} where each
pulse couples one qubit level to |r> with the same rotation convention on that
two-level pair, and simultaneous Rydberg excitation costs ``V_ij`` (finite
blockade) or is excluded outright (perfect blockade).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .register import Register, interaction_matrix
from .statevec import PAULI, QuantumState, _check_atoms, apply_operator

LEAKAGE_THRESHOLD = 1e-3

_T = np.diag([1.0, np.exp(1j * np.pi / 4)])
_S = np.diag([1.0, 1j])
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _rx(theta):
    return np.cos(theta / 2) * PAULI["I"] - 1j * np.sin(theta / 2) * PAULI["X"]


def _ry(theta):
    return np.cos(theta / 2) * PAULI["I"] - 1j * np.sin(theta / 2) * PAULI["Y"]


def _rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _controlled(u, n_controls):
    d = u.shape[0] * 2**n_controls
    m = np.eye(d, dtype=complex)
    m[-u.shape[0]:, -u.shape[0]:] = u
    return m


_SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]

# name -> (arity, matrix factory taking params dict)
GATE_LIBRARY = {
    "I": (1, lambda p: PAULI["I"]),
    "X": (1, lambda p: PAULI["X"]),
    "Y": (1, lambda p: PAULI["Y"]),
    "Z": (1, lambda p: PAULI["Z"]),
    "H": (1, lambda p: _H),
    "S": (1, lambda p: _S),
    "T": (1, lambda p: _T),
    "TDG": (1, lambda p: _T.conj().T),
    "RX": (1, lambda p: _rx(float(p["theta"]))),
    "RY": (1, lambda p: _ry(float(p["theta"]))),
    "RZ": (1, lambda p: _rz(float(p["theta"]))),
    "CZ": (2, lambda p: _controlled(PAULI["Z"], 1)),
    "CNOT": (2, lambda p: _controlled(PAULI["X"], 1)),
    "SWAP": (2, lambda p: _SWAP),
    "CCZ": (3, lambda p: _controlled(PAULI["Z"], 2)),
    "TOFFOLI": (3, lambda p: _controlled(PAULI["X"], 2)),
}
TWO_QUBIT_GATES = {"CZ", "CNOT", "SWAP"}


@dataclass(frozen=True)
class PulseParams:
    omega: float
    delta: float = 0.0
    phase: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.tau < 0:
            raise InvalidArgument("tau must be non-negative")
        if self.omega < 0:
            raise InvalidArgument("omega must be non-negative")

    @property
    def area(self) -> float:
        return self.omega * self.tau


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    params: dict = field(default_factory=dict)
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise InvalidArgument(f"{name} gate qubits must be distinct")
        if name == "RAW":
            if self.matrix is None:
                raise InvalidArgument("RAW gate needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2 ** len(self.qubits),) * 2:
                raise InvalidArgument("RAW matrix size does not match qubit count")
            object.__setattr__(self, "matrix", m)
        elif name not in GATE_LIBRARY:
            raise InvalidArgument(f"unknown gate {name!r}")
        elif GATE_LIBRARY[name][0] != len(self.qubits):
            raise InvalidArgument(f"{name} acts on {GATE_LIBRARY[name][0]} qubits")

    def to_matrix(self) -> np.ndarray:
        if self.name == "RAW":
            return self.matrix
        return np.asarray(GATE_LIBRARY[self.name][1](self.params), dtype=complex)


@dataclass
class Circuit:
    gates: list = field(default_factory=list)
    n_qubits: int | None = None

    def append(self, name, qubits, params=None, matrix=None) -> Circuit:
        self.gates.append(Gate(name, tuple(qubits), dict(params or {}), matrix))
        return self

    @property
    def width(self) -> int:
        if self.n_qubits is not None:
            return self.n_qubits
        return 1 + max((max(g.qubits) for g in self.gates), default=-1)

    def count(self, name=None) -> int:
        if name is None:
            return len(self.gates)
        return sum(g.name == name.upper() for g in self.gates)

    def two_qubit_count(self) -> int:
        return sum(len(g.qubits) == 2 for g in self.gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def to_list(self) -> list:
        out = []
        for g in self.gates:
            entry = {"gate": g.name, "qubits": list(g.qubits), "params": dict(g.params)}
            if g.name == "RAW":
                entry["params"] = {"real": g.matrix.real.tolist(), "imag": g.matrix.imag.tolist()}
            out.append(entry)
        return out

    @classmethod
    def from_list(cls, items, n_qubits=None) -> Circuit:
        if not isinstance(items, list):
            raise InvalidArgument("circuit file must hold a JSON list of gates")
        c = cls(n_qubits=n_qubits)
        for k, item in enumerate(items):
            if not isinstance(item, dict) or "gate" not in item or "qubits" not in item:
                raise InvalidArgument(f"gate #{k} needs 'gate' and 'qubits' fields")
            params = dict(item.get("params") or {})
            matrix = None
            if str(item["gate"]).upper() == "RAW":
                try:
                    matrix = np.asarray(params.pop("real"), dtype=float) + 1j * np.asarray(
                        params.pop("imag", 0.0), dtype=float
                    )
                except KeyError:
                    raise InvalidArgument(f"RAW gate #{k} needs params.real (and optional imag)") from None
            c.append(item["gate"], item["qubits"], params, matrix)
        return c

    @classmethod
    def load(cls, path, n_qubits=None) -> Circuit:
        return cls.from_list(json.loads(Path(path).read_text()), n_qubits)


@dataclass(frozen=True)
class ThreeLevelAtomModel:
    """Level structure used for blockade gates.

    ``coupling`` names the level pair each pulse drives ("0r", "1r" or "01").
    ``interactions`` is the pairwise shift matrix ``V_ij`` of doubly-excited
    Rydberg pairs; ``None`` means perfect blockade.
    """

    coupling: str = "0r"
    interactions: np.ndarray | None = None

    def __post_init__(self):
        if self.coupling not in ("0r", "1r", "01"):
            raise InvalidArgument("coupling must be one of '0r', '1r', '01'")

    @property
    def perfect(self) -> bool:
        return self.interactions is None

    @classmethod
    def perfect_blockade(cls, coupling="0r") -> ThreeLevelAtomModel:
        return cls(coupling, None)

    @classmethod
    def finite(cls, c6: float, positions, coupling="0r") -> ThreeLevelAtomModel:
        reg = positions if isinstance(positions, Register) else Register(np.asarray(positions, dtype=float))
        return cls(coupling, interaction_matrix(reg, c6, 6))

    @classmethod
    def uniform(cls, shift: float, n_atoms: int, coupling="0r") -> ThreeLevelAtomModel:
        v = np.full((n_atoms, n_atoms), float(shift))
        np.fill_diagonal(v, 0.0)
        return cls(coupling, v)


@dataclass
class BlockadeGateResult:
    """Qubit-subspace block of the simulated propagator plus leakage report."""

    unitary: np.ndarray
    max_leakage: float
    leakage_flagged: bool
    full_propagator: np.ndarray = field(repr=False)


def rotation_from_pulse(p: PulseParams) -> np.ndarray:
    gen = p.omega * np.cos(p.phase) * PAULI["X"] + p.omega * np.sin(p.phase) * PAULI["Y"] + p.delta * PAULI["Z"]
    # exp(-i a n.σ) = cos a I - i sin a n.σ for unit n
    norm = np.sqrt(p.omega**2 + p.delta**2)
    a = 0.5 * p.tau * norm
    if norm == 0 or a == 0:
        return np.eye(2, dtype=complex)
    return np.cos(a) * PAULI["I"] - 1j * np.sin(a) * gen / norm


_LEVEL_INDEX = {"0": 0, "1": 1, "r": 2}


def _pulse_hamiltonian(p: PulseParams, coupling: str) -> np.ndarray:
    lo, hi = (_LEVEL_INDEX[c] for c in coupling)
    h2 = 0.5 * (
        p.omega * np.cos(p.phase) * PAULI["X"] + p.omega * np.sin(p.phase) * PAULI["Y"] + p.delta * PAULI["Z"]
    )
    h = np.zeros((3, 3), dtype=complex)
    h[np.ix_([lo, hi], [lo, hi])] = h2
    return h


def _digits(n_atoms) -> np.ndarray:
    return np.array(list(itertools.product(range(3), repeat=n_atoms)), dtype=np.int64).reshape(-1, n_atoms)


def _embed(single: np.ndarray, atom: int, n_atoms: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for k in range(n_atoms):
        out = np.kron(out, single if k == atom else np.eye(3))
    return out


def simulate_blockade_sequence(pulses, targets, model: ThreeLevelAtomModel, n_atoms: int) -> np.ndarray:
    """Propagator on the 3**n space for square pulses applied in order.

    ``targets[k]`` is the atom driven by ``pulses[k]``. Under perfect blockade
    states with two or more Rydberg atoms are removed from the dynamics.
    """
    if len(pulses) != len(targets):
        raise InvalidArgument("one target atom per pulse is required")
    dim = 3**n_atoms
    ryd = _digits(n_atoms) == 2
    if model.perfect:
        allowed = ryd.sum(axis=1) <= 1
        shift = np.zeros(dim)
    else:
        v = np.asarray(model.interactions, dtype=float)
        if v.shape != (n_atoms, n_atoms):
            raise InvalidArgument("interaction matrix size does not match the atom count")
        r = ryd.astype(float)
        shift = 0.5 * np.einsum("si,ij,sj->s", r, v, r)
        allowed = np.ones(dim, dtype=bool)
    keep = np.ix_(allowed, allowed)
    u = np.eye(dim, dtype=complex)
    for p, atom in zip(pulses, targets):
        if not 0 <= atom < n_atoms:
            raise InvalidArgument(f"pulse target {atom} out of range")
        if p.tau == 0:
            continue
        h = _embed(_pulse_hamiltonian(p, model.coupling), atom, n_atoms)
        h[np.diag_indices(dim)] += shift
        w, vecs = np.linalg.eigh(h[keep])
        step = np.eye(dim, dtype=complex)
        step[keep] = (vecs * np.exp(-1j * p.tau * w)) @ vecs.conj().T
        u = step @ u
    return u


def _qubit_block(u: np.ndarray, n_atoms: int):
    qubit_idx = np.flatnonzero((_digits(n_atoms) <= 1).all(axis=1))
    block = u[np.ix_(qubit_idx, qubit_idx)]
    leakage = 1.0 - (np.abs(block) ** 2).sum(axis=0)
    return block, float(max(leakage.max(), 0.0))


def _blockade_gate(pulses, targets, model, n_atoms, threshold):
    if model.coupling == "01":
        raise InvalidArgument("blockade gates need pulses coupling a qubit level to |r>")
    full = simulate_blockade_sequence(pulses, targets, model, n_atoms)
    block, leak = _qubit_block(full, n_atoms)
    return BlockadeGateResult(block, leak, leak > threshold, full)


def default_cz_pulses(omega: float = 1.0) -> list[PulseParams]:
    """Resonant π (control), 2π (target), π (control) at a common Rabi frequency."""
    pi = np.pi / omega
    return [PulseParams(omega, 0.0, 0.0, pi), PulseParams(omega, 0.0, 0.0, 2 * pi), PulseParams(omega, 0.0, 0.0, pi)]


def default_ccz_pulses(omega: float = 1.0) -> list[PulseParams]:
    """π(c1), π(c2), 2π(t), π(c2), π(c1)."""
    pi = np.pi / omega
    p, p2 = PulseParams(omega, 0.0, 0.0, pi), PulseParams(omega, 0.0, 0.0, 2 * pi)
    return [p, p, p2, p, p]


def cz_via_blockade(pulses=None, model=None, threshold: float = LEAKAGE_THRESHOLD) -> BlockadeGateResult:
    """Two-atom blockade gate; atom 0 is the control, atom 1 the target."""
    pulses = list(pulses) if pulses is not None else default_cz_pulses()
    if len(pulses) != 3:
        raise InvalidArgument("CZ synthesis takes exactly 3 pulses")
    model = model if model is not None else ThreeLevelAtomModel.perfect_blockade()
    return _blockade_gate(pulses, [0, 1, 0], model, 2, threshold)


def ccz_via_blockade(pulses=None, model=None, threshold: float = LEAKAGE_THRESHOLD) -> BlockadeGateResult:
    """Three-atom blockade gate; atoms 0 and 1 are controls, atom 2 the target."""
    pulses = list(pulses) if pulses is not None else default_ccz_pulses()
    if len(pulses) != 5:
        raise InvalidArgument("CCZ synthesis takes exactly 5 pulses")
    model = model if model is not None else ThreeLevelAtomModel.perfect_blockade()
    return _blockade_gate(pulses, [0, 1, 2, 1, 0], model, 3, threshold)


def cnot_from_cz() -> Circuit:
    return Circuit(n_qubits=2).append("H", [1]).append("CZ", [0, 1]).append("H", [1])


def toffoli_from_ccz() -> Circuit:
    return Circuit(n_qubits=3).append("H", [2]).append("CCZ", [0, 1, 2]).append("H", [2])


def toffoli_from_cnots() -> Circuit:
    """Six-CNOT Toffoli with two H and seven T/T† gates (controls 0, 1; target 2)."""
    c = Circuit(n_qubits=3)
    seq = [
        ("H", [2]), ("CNOT", [1, 2]), ("TDG", [2]), ("CNOT", [0, 2]), ("T", [2]),
        ("CNOT", [1, 2]), ("TDG", [2]), ("CNOT", [0, 2]), ("T", [1]), ("T", [2]),
        ("H", [2]), ("CNOT", [0, 1]), ("T", [0]), ("TDG", [1]), ("CNOT", [0, 1]),
    ]
    for name, qubits in seq:
        c.append(name, qubits)
    return c


def run_circuit(circuit: Circuit, state: QuantumState) -> QuantumState:
    for g in circuit:
        _check_atoms(state, g.qubits)
        state = apply_operator(state, g.to_matrix(), g.qubits)
    return state


def circuit_unitary(circuit: Circuit, n_qubits: int | None = None) -> np.ndarray:
    n = n_qubits if n_qubits is not None else circuit.width
    dim = 2**n
    dims = (2,) * n
    cols = np.eye(dim, dtype=complex)
    # apply gate-by-gate to every basis column at once via a batch axis
    batch = cols.T.reshape((dim,) + dims)
    for g in circuit:
        if max(g.qubits) >= n:
            raise InvalidArgument(f"gate {g.name} on {g.qubits} exceeds {n} qubits")
        k = len(g.qubits)
        op = g.to_matrix().reshape((2,) * (2 * k))
        axes = [q + 1 for q in g.qubits]
        out = np.tensordot(op, batch, axes=(list(range(k, 2 * k)), axes))
        batch = np.moveaxis(out, list(range(k)), axes)
    return batch.reshape(dim, dim).T


def gate_fidelity(u_actual, u_ideal) -> float:
    """Global-phase-invariant overlap ``|tr(U_ideal† U)|² / d²``."""
    a = np.asarray(u_actual, dtype=complex)
    b = np.asarray(u_ideal, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument("gate fidelity needs two square matrices of equal size")
    d = a.shape[0]
    return float(min(1.0, abs(np.trace(b.conj().T @ a)) ** 2 / d**2))


def phase_distance(u, v) -> float:
    """min over θ of max |u - e^{iθ} v| (entrywise), with θ from the trace overlap."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    tr = np.trace(v.conj().T @ u)
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    return float(np.abs(u - phase * v).max())


def ideal(name: str) -> np.ndarray:
    return np.asarray(GATE_LIBRARY[name.upper()][1]({}), dtype=complex)
