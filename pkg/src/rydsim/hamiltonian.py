"""Time-dependent Ising and XY Hamiltonians and their Schrödinger evolution.

Conventions (hbar = 1, energies in rad/µs):

* qubit |1> is the Rydberg / spin-up state, so the occupancy is
  ``n = |1><1|`` and the spin operator is ``sz = 2n - 1 = diag(-1, +1)``;
* atom 0 is the most significant digit of the basis index;
* pair sums run over i < j, each pair counted once.

Ising: ``H = (Ω/2) Σ σx_j - δ Σ n_j + Σ_{i<j} C6/r_ij^6 n_i n_j``
XY:    ``H = (Ω/2) Σ σx_j - (δ/2) Σ sz_j + 2 Σ_{i<j} C3/r_ij^3 (σx_i σx_j + σy_i σy_j)``
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import CapacityError, DomainError, IntegrationError, InvalidArgument
from .register import Register, interaction_matrix
from .statevec import QuantumState

MAX_DENSE_ATOMS = 12
_TIME_EPS = 1e-12
_GAUSS = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)
_MAGNUS_C = np.sqrt(3) / 12

WAVEFORM_KINDS = ("constant", "piecewise-constant", "piecewise-linear")


class Waveform:
    """Piecewise time series for one control channel.

    ``breakpoints`` are strictly increasing times; ``values`` has one entry per
    breakpoint. Piecewise-constant holds the left value on ``[t_k, t_k+1)``;
    piecewise-linear interpolates. A constant waveform has two breakpoints
    (start, end) and a single repeated value.
    """

    def __init__(self, kind, breakpoints, values):
        if kind not in WAVEFORM_KINDS:
            raise InvalidArgument(f"unknown waveform kind {kind!r}")
        t = np.asarray(breakpoints, dtype=np.float64).reshape(-1)
        v = np.asarray(values, dtype=np.float64).reshape(-1)
        if t.size < 1 or v.size != t.size:
            raise InvalidArgument("breakpoints and values must have the same non-zero length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InvalidArgument("waveform samples must be finite")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("breakpoints must be strictly increasing")
        if kind == "constant" and np.ptp(v) != 0:
            raise InvalidArgument("constant waveform must have a single value")
        self.kind = kind
        self.breakpoints = t
        self.values = v
        t.setflags(write=False)
        v.setflags(write=False)

    @classmethod
    def constant(cls, value, t_start=0.0, t_end=np.inf):
        if np.isinf(t_end):
            return _UnboundedConstant(value, t_start)
        return cls("constant", [t_start, t_end], [value, value])

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        return cls("piecewise-constant", breakpoints, values)

    @classmethod
    def piecewise_linear(cls, breakpoints, values):
        return cls("piecewise-linear", breakpoints, values)

    @property
    def t_start(self) -> float:
        return float(self.breakpoints[0])

    @property
    def t_end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t: float) -> float:
        if t < self.t_start - _TIME_EPS or t > self.t_end + _TIME_EPS:
            raise DomainError(f"t={t} outside waveform domain [{self.t_start}, {self.t_end}]")
        t = min(max(t, self.t_start), self.t_end)
        if self.kind == "constant":
            return float(self.values[0])
        if self.kind == "piecewise-linear":
            return float(np.interp(t, self.breakpoints, self.values))
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return float(self.values[k])

    def is_constant_between(self, a: float, b: float) -> bool:
        """True when the waveform is constant on the open interval (a, b)."""
        if self.kind == "constant":
            return True
        inside = (self.breakpoints > a + _TIME_EPS) & (self.breakpoints < b - _TIME_EPS)
        if inside.any():
            return False
        if self.kind == "piecewise-constant":
            return True
        return self(a) == self(b)

    def __repr__(self):
        return f"Waveform({self.kind!r}, t=[{self.t_start}, {self.t_end}], n={self.breakpoints.size})"


class _UnboundedConstant(Waveform):
    def __init__(self, value, t_start):
        self.kind = "constant"
        self.breakpoints = np.array([t_start, np.inf])
        self.values = np.array([float(value), float(value)])


@dataclass(frozen=True, eq=False)
class IsingSpec:
    register: Register
    omega: Waveform
    delta: Waveform
    c6: float

    def __post_init__(self):
        if not self.c6 > 0:
            raise InvalidArgument("c6 must be positive")

    @cached_property
    def pair_couplings(self) -> np.ndarray:
        return interaction_matrix(self.register, self.c6, 6)


@dataclass(frozen=True, eq=False)
class XYSpec:
    register: Register
    omega: Waveform
    delta: Waveform
    c3: float

    def __post_init__(self):
        if self.c3 == 0 or not np.isfinite(self.c3):
            raise InvalidArgument("c3 must be finite and non-zero")

    @cached_property
    def pair_couplings(self) -> np.ndarray:
        return interaction_matrix(self.register, self.c3, 3)


def domain(spec) -> tuple[float, float]:
    lo = max(spec.omega.t_start, spec.delta.t_start)
    hi = min(spec.omega.t_end, spec.delta.t_end)
    return lo, hi


def _n_atoms(spec) -> int:
    n = len(spec.register)
    if n > MAX_DENSE_ATOMS:
        raise CapacityError(f"dense Hamiltonian limited to {MAX_DENSE_ATOMS} atoms, got {n}")
    return n


def _flip_pairs(n, j):
    """Index pairs (s, s ^ bit_j) for all s: the nonzero entries of σx_j."""
    s = np.arange(1 << n)
    return s, s ^ (1 << (n - 1 - j))


def _occupations(n) -> np.ndarray:
    """(2**n, n) array of bit values, atom 0 in column 0."""
    s = np.arange(1 << n)[:, None]
    return (s >> (n - 1 - np.arange(n))) & 1


class _Terms:
    """Static pieces of a model Hamiltonian; H(t) = Ω(t)/2 X + δ(t) D + C."""

    def __init__(self, spec):
        n = _n_atoms(spec)
        dim = 1 << n
        x = np.zeros((dim, dim))
        for j in range(n):
            rows, cols = _flip_pairs(n, j)
            x[rows, cols] += 1.0
        self.x_sum = x
        occ = _occupations(n)
        couplings = spec.pair_couplings
        if isinstance(spec, IsingSpec):
            self.detuning_diag = -occ.sum(axis=1).astype(float)
            self.static = np.diag(kernels.interaction_diagonal(np.ascontiguousarray(couplings)))
        else:
            self.detuning_diag = -0.5 * (2 * occ - 1).sum(axis=1).astype(float)
            ex = np.zeros((dim, dim))
            s = np.arange(dim)
            for i in range(n):
                for j in range(i + 1, n):
                    bi = (s >> (n - 1 - i)) & 1
                    bj = (s >> (n - 1 - j)) & 1
                    differ = bi != bj
                    flipped = s ^ ((1 << (n - 1 - i)) | (1 << (n - 1 - j)))
                    # σxσx + σyσy = 2(σ+σ- + σ-σ+): element 2 on |01> <-> |10>
                    ex[s[differ], flipped[differ]] += 2.0 * 2.0 * couplings[i, j]
            self.static = ex
        self.static_is_diagonal = isinstance(spec, IsingSpec)

    def matrix(self, omega, delta) -> np.ndarray:
        h = 0.5 * omega * self.x_sum + self.static
        h[np.diag_indices_from(h)] += delta * self.detuning_diag
        return h


def _terms(spec) -> _Terms:
    cached = spec.__dict__.get("_terms")
    if cached is None:
        cached = _Terms(spec)
        spec.__dict__["_terms"] = cached
    return cached


def _check_time(spec, t):
    lo, hi = domain(spec)
    if t < lo - _TIME_EPS or t > hi + _TIME_EPS:
        raise DomainError(f"t={t} outside Hamiltonian domain [{lo}, {hi}]")


def ising_matrix(spec: IsingSpec, t: float) -> np.ndarray:
    if not isinstance(spec, IsingSpec):
        raise InvalidArgument("ising_matrix needs an IsingSpec")
    _check_time(spec, t)
    return _terms(spec).matrix(spec.omega(t), spec.delta(t)).astype(complex)


def xy_matrix(spec: XYSpec, t: float) -> np.ndarray:
    if not isinstance(spec, XYSpec):
        raise InvalidArgument("xy_matrix needs an XYSpec")
    _check_time(spec, t)
    return _terms(spec).matrix(spec.omega(t), spec.delta(t)).astype(complex)


def hamiltonian_matrix(spec, t: float) -> np.ndarray:
    return ising_matrix(spec, t) if isinstance(spec, IsingSpec) else xy_matrix(spec, t)


def propagate(h: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    """Return exp(-i h dt) psi for Hermitian ``h`` via its spectral decomposition."""
    if not np.any(h - np.diag(np.diagonal(h))):
        return np.exp(-1j * dt * np.diagonal(h)) * psi
    w, v = np.linalg.eigh(h)
    return v @ (np.exp(-1j * dt * w) * (v.conj().T @ psi))


def _segments(spec, t0, t1):
    cuts = {t0, t1}
    for wf in (spec.omega, spec.delta):
        cuts.update(float(b) for b in wf.breakpoints if t0 < b < t1)
    cuts = sorted(cuts)
    return list(zip(cuts[:-1], cuts[1:]))


def evolve(
    state: QuantumState,
    spec,
    t0: float,
    t1: float,
    dt_max: float = 0.01,
    tol: float = 1e-8,
    dt_min: float | None = None,
) -> QuantumState:
    """Integrate i d|psi>/dt = H(t)|psi> from ``t0`` to ``t1``.

    Segments on which every channel is constant are propagated exactly in one
    step. Elsewhere each sub-step uses the fourth-order Magnus generator built
    from H at the two Gauss points; the step is accepted when one full step and
    two half steps differ by at most ``tol * h / (t1 - t0)`` and the half-step
    result is kept.
    """
    if not isinstance(spec, (IsingSpec, XYSpec)):
        raise InvalidArgument("spec must be an IsingSpec or XYSpec")
    if not t1 > t0:
        raise InvalidArgument("t1 must be greater than t0")
    if any(d != 2 for d in state.dims):
        raise InvalidArgument("evolve requires qubit (dimension-2) atoms")
    if state.n_atoms != len(spec.register):
        raise InvalidArgument("state and register sizes differ")
    if not dt_max > 0 or not tol > 0:
        raise InvalidArgument("dt_max and tol must be positive")
    _check_time(spec, t0)
    _check_time(spec, t1)
    terms = _terms(spec)
    total = t1 - t0
    dt_min = dt_min if dt_min is not None else max(total * 1e-10, 1e-12)

    def h_at(t):
        return terms.matrix(spec.omega(t), spec.delta(t))

    def step(psi, t, h):
        h1 = h_at(t + _GAUSS[0] * h)
        h2 = h_at(t + _GAUSS[1] * h)
        heff = 0.5 * (h1 + h2) + (1j * _MAGNUS_C * h) * (h1 @ h2 - h2 @ h1)
        return propagate(heff, psi, h)

    psi = state.amplitudes.copy()
    for a, b in _segments(spec, t0, t1):
        if spec.omega.is_constant_between(a, b) and spec.delta.is_constant_between(a, b):
            psi = propagate(h_at(0.5 * (a + b)), psi, b - a)
            continue
        t = a
        h = min(dt_max, b - a)
        while t < b - _TIME_EPS:
            h = min(h, b - t)
            full = step(psi, t, h)
            half = step(step(psi, t, 0.5 * h), t + 0.5 * h, 0.5 * h)
            err = np.linalg.norm(full - half)
            allowed = tol * h / total
            if err <= allowed:
                psi = half
                t += h
                grow = 2.0 if err == 0 else min(2.0, 0.9 * (allowed / err) ** 0.25)
                h = min(dt_max, h * max(grow, 1.0))
            else:
                if h <= dt_min:
                    raise IntegrationError(f"step-halving failed to converge at t={t} (h={h:g})")
                h = max(dt_min, 0.5 * h)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise IntegrationError(f"norm drifted to {norm}")
    return QuantumState(psi, state.dims, check=False)
