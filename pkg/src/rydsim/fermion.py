"""Jordan-Wigner mapping of fermionic operators onto Pauli strings.

A site is occupied when its qubit is |1>. The string of Z factors sits on the
lower-index sites:

    f_j† -> Z_0 ... Z_{j-1} (X_j - iY_j)/2
    f_j  -> Z_0 ... Z_{j-1} (X_j + iY_j)/2
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .statevec import PAULI, PauliString

MAX_SITES = 10
PRUNE_TOL = 1e-14

# (a, b) -> (phase, a*b) for single-qubit Pauli products
_PRODUCT = {}
for _a, _b in itertools.product("IXYZ", repeat=2):
    _m = PAULI[_a] @ PAULI[_b]
    for _c in "IXYZ":
        _overlap = np.trace(PAULI[_c].conj().T @ _m) / 2
        if abs(_overlap) > 0.5:
            _PRODUCT[_a, _b] = (complex(np.round(_overlap, 12)), _c)


class PauliSum:
    """Linear combination of equal-length Pauli strings, zero terms pruned."""

    def __init__(self, terms=None, n_qubits=None):
        self.terms: dict[str, complex] = {}
        self.n_qubits = n_qubits
        if terms:
            for key, coeff in (terms.items() if isinstance(terms, dict) else terms):
                self._add(key, coeff)
        self._prune()

    @classmethod
    def from_strings(cls, strings) -> PauliSum:
        return cls([(p.factors, p.coefficient) for p in strings])

    @classmethod
    def identity(cls, n_qubits, coeff=1.0) -> PauliSum:
        return cls({"I" * n_qubits: coeff}, n_qubits)

    def _add(self, key, coeff):
        key = key.upper()
        if self.n_qubits is None:
            self.n_qubits = len(key)
        elif len(key) != self.n_qubits:
            raise InvalidArgument("Pauli strings must have equal length")
        self.terms[key] = self.terms.get(key, 0.0) + complex(coeff)

    def _prune(self, tol=PRUNE_TOL):
        self.terms = {k: v for k, v in self.terms.items() if abs(v) > tol}
        return self

    def strings(self) -> list[PauliString]:
        return [PauliString(k, v) for k, v in sorted(self.terms.items())]

    def __add__(self, other) -> PauliSum:
        out = PauliSum(dict(self.terms), self.n_qubits)
        for k, v in other.terms.items():
            out._add(k, v)
        return out._prune()

    def __sub__(self, other) -> PauliSum:
        return self + other * -1.0

    def __mul__(self, other) -> PauliSum:
        if isinstance(other, PauliSum):
            out = PauliSum(n_qubits=self.n_qubits)
            for (ka, va), (kb, vb) in itertools.product(self.terms.items(), other.terms.items()):
                phase = 1.0 + 0j
                letters = []
                for a, b in zip(ka, kb):
                    p, c = _PRODUCT[a, b]
                    phase *= p
                    letters.append(c)
                out._add("".join(letters), phase * va * vb)
            return out._prune()
        return PauliSum({k: v * other for k, v in self.terms.items()}, self.n_qubits)

    __rmul__ = __mul__

    def adjoint(self) -> PauliSum:
        return PauliSum({k: np.conj(v) for k, v in self.terms.items()}, self.n_qubits)

    def is_hermitian(self, tol=1e-12) -> bool:
        return all(abs(v.imag) <= tol for v in self.terms.values())

    def to_matrix(self) -> np.ndarray:
        dim = 2 ** (self.n_qubits or 0)
        out = np.zeros((dim, dim), dtype=complex)
        for k, v in self.terms.items():
            out += PauliString(k, v).to_matrix()
        return out

    def to_text(self) -> str:
        """One ``coeff_real coeff_imag PAULISTRING`` line per term."""
        return "".join(f"{v.real:.17g} {v.imag:.17g} {k}\n" for k, v in sorted(self.terms.items()))

    @classmethod
    def from_text(cls, text: str) -> PauliSum:
        terms = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InvalidArgument(f"line {lineno}: expected 'real imag PAULISTRING'")
            terms.append((parts[2], complex(float(parts[0]), float(parts[1]))))
        return cls(terms)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        diff = self - other
        return not diff.terms

    def __repr__(self):
        return f"PauliSum({len(self.terms)} terms on {self.n_qubits} qubits)"


@dataclass(frozen=True)
class FermionTerm:
    """Product of ladder operators, left to right; ``(site, True)`` is f†."""

    ops: tuple
    coefficient: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple((int(s), bool(d)) for s, d in self.ops))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    def adjoint(self) -> FermionTerm:
        return FermionTerm(tuple((s, not d) for s, d in reversed(self.ops)), np.conj(self.coefficient))


def jordan_wigner(j: int, n_sites: int) -> tuple[PauliSum, PauliSum]:
    """Return the images of ``(f_j†, f_j)``."""
    if not 1 <= n_sites <= MAX_SITES:
        raise InvalidArgument(f"n_sites must lie in [1, {MAX_SITES}]")
    if not 0 <= j < n_sites:
        raise InvalidArgument(f"site {j} out of range for {n_sites} sites")
    prefix = "Z" * j
    suffix = "I" * (n_sites - j - 1)
    x = prefix + "X" + suffix
    y = prefix + "Y" + suffix
    create = PauliSum({x: 0.5, y: -0.5j}, n_sites)
    annihilate = PauliSum({x: 0.5, y: 0.5j}, n_sites)
    return create, annihilate


def map_term(term: FermionTerm, n_sites: int) -> PauliSum:
    out = PauliSum.identity(n_sites, term.coefficient)
    for site, dagger in term.ops:
        if not 0 <= site < n_sites:
            raise InvalidArgument(f"site {site} out of range")
        create, annihilate = jordan_wigner(site, n_sites)
        out = out * (create if dagger else annihilate)
    return out


def map_hamiltonian(terms, n_sites: int) -> PauliSum:
    """Map a Hermitian sum of fermionic terms to a Pauli sum."""
    total = PauliSum(n_qubits=n_sites)
    for t in terms:
        total = total + map_term(t, n_sites)
    if not total.is_hermitian():
        raise InvalidArgument("fermionic terms do not form a Hermitian operator")
    return total


def hopping_terms(hoppings, n_sites: int | None = None) -> list[FermionTerm]:
    """``t f_i† f_j + h.c.`` for each ``(i, j, t)``."""
    out = []
    for i, j, t in hoppings:
        term = FermionTerm(((i, True), (j, False)), t)
        out.extend([term, term.adjoint()])
    return out


def ladder_matrices(n_sites: int, stringed: bool = True):
    """Dense (creation, annihilation) matrices for every site.

    With ``stringed=False`` the bare spin raising/lowering operators are
    returned instead (no Z string).
    """
    creations, annihilations = [], []
    for j in range(n_sites):
        if stringed:
            c, a = jordan_wigner(j, n_sites)
        else:
            key_x = "I" * j + "X" + "I" * (n_sites - j - 1)
            key_y = "I" * j + "Y" + "I" * (n_sites - j - 1)
            c = PauliSum({key_x: 0.5, key_y: -0.5j}, n_sites)
            a = PauliSum({key_x: 0.5, key_y: 0.5j}, n_sites)
        creations.append(c.to_matrix())
        annihilations.append(a.to_matrix())
    return creations, annihilations


@dataclass
class AnticommutationReport:
    n_sites: int
    stringed: bool
    max_deviation: float
    worst_pair: tuple = field(default=None)

    @property
    def ok(self) -> bool:
        return self.max_deviation < 1e-12


def check_anticommutation(n_sites: int, stringed: bool = True) -> AnticommutationReport:
    """Max |entry| deviation of {f_i, f_j†} = δ_ij I and {f_i, f_j} = 0."""
    if not 1 <= n_sites <= 6:
        raise InvalidArgument("anticommutation check supports 1..6 sites")
    creations, annihilations = ladder_matrices(n_sites, stringed)
    eye = np.eye(2**n_sites)
    worst, pair = 0.0, None
    for i, j in itertools.product(range(n_sites), repeat=2):
        a_i, a_j, c_j = annihilations[i], annihilations[j], creations[j]
        dev1 = np.abs(a_i @ c_j + c_j @ a_i - (eye if i == j else 0)).max()
        dev2 = np.abs(a_i @ a_j + a_j @ a_i).max()
        dev = max(dev1, dev2)
        if dev > worst:
            worst, pair = float(dev), (i, j)
    return AnticommutationReport(n_sites, stringed, worst, pair)


def free_fermion_spectrum(hopping_matrix) -> np.ndarray:
    """Many-body energies of a quadratic Hamiltonian: all subset sums of modes."""
    eps = np.linalg.eigvalsh(np.asarray(hopping_matrix))
    n = eps.size
    energies = [sum(eps[k] for k in range(n) if (s >> k) & 1) for s in range(2**n)]
    return np.sort(np.array(energies))
