"""Hybrid variational loop for Maximum Independent Set on unit-disk graphs.

Each atom is a vertex; qubit |1> (Rydberg) marks a selected vertex. A depth-p
sequence alternates a resonant drive layer (amplitude Ω_k, δ = 0) with a
detuning layer (Ω = 0, amplitude δ_k), every layer lasting ``layer_time`` µs.
The parameter vector is ``[Ω_1, δ_1, ..., Ω_p, δ_p]``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import CapacityError, InvalidArgument
from .hamiltonian import IsingSpec, Waveform, evolve
from .register import Register, UnitDiskGraph, unit_disk_graph
from .statevec import QuantumState, ReadoutModel, expectation, new_state, sample

MAX_BRUTE_FORCE = 20
DEFAULT_PENALTY = 2.0


@dataclass(frozen=True, eq=False)
class MISInstance:
    register: Register
    graph: UnitDiskGraph

    @classmethod
    def from_register(cls, register: Register, radius: float) -> MISInstance:
        return cls(register, unit_disk_graph(register, radius))

    @property
    def n_vertices(self) -> int:
        return self.graph.vertex_count


@dataclass(frozen=True)
class MISSolution:
    vertices: tuple
    independent: bool

    @property
    def size(self) -> int:
        return len(self.vertices)

    def bitstring(self, n) -> str:
        chosen = set(self.vertices)
        return "".join("1" if k in chosen else "0" for k in range(n))


@dataclass
class BruteForceResult:
    size: int
    sets: list


def random_instance(n_vertices: int, seed, radius: float = 1.0, density: float = 1.6, min_sep: float = 0.5):
    """Points drawn uniformly in a square, rejecting pairs closer than ``min_sep * radius``.

    ``density`` is the expected number of atoms per disk area ``radius**2``.
    """
    rng = np.random.default_rng(seed)
    side = radius * np.sqrt(n_vertices / density)
    pts = []
    while len(pts) < n_vertices:
        p = rng.random(2) * side
        if all(np.hypot(*(p - q)) >= min_sep * radius for q in pts):
            pts.append(p)
    return MISInstance.from_register(Register(np.array(pts)), radius)


def _bits(bitstring, n) -> np.ndarray:
    if isinstance(bitstring, str):
        bits = np.array([int(c) for c in bitstring], dtype=np.int64)
    else:
        bits = np.asarray(bitstring, dtype=np.int64).reshape(-1)
    if bits.size != n:
        raise InvalidArgument(f"bitstring length {bits.size} != vertex count {n}")
    return bits


def mis_cost(graph: UnitDiskGraph, bitstring, penalty: float = DEFAULT_PENALTY) -> float:
    """``-(selected vertices) + penalty * (edges with both ends selected)``."""
    if not penalty > 0:
        raise InvalidArgument("penalty must be positive")
    bits = _bits(bitstring, graph.vertex_count)
    violations = sum(int(bits[i] and bits[j]) for i, j in graph.edges)
    return float(-bits.sum() + penalty * violations)


def cost_diagonal(graph: UnitDiskGraph, penalty: float = DEFAULT_PENALTY) -> np.ndarray:
    """mis_cost of every basis state (atom 0 = most significant bit)."""
    n = graph.vertex_count
    adj = graph.adjacency().astype(np.float64)
    violations = kernels.interaction_diagonal(adj)
    s = np.arange(1 << n)
    weight = np.zeros(s.size)
    for k in range(n):
        weight += (s >> k) & 1
    return -weight + penalty * violations


def brute_force_mis(graph: UnitDiskGraph) -> BruteForceResult:
    if graph.vertex_count > MAX_BRUTE_FORCE:
        raise CapacityError(f"brute force limited to {MAX_BRUTE_FORCE} vertices")
    if graph.vertex_count == 0:
        return BruteForceResult(0, [()])
    best, masks = kernels.mis_scan(graph.neighbor_masks())
    n = graph.vertex_count
    sets = sorted(tuple(k for k in range(n) if (int(m) >> k) & 1) for m in masks)
    return BruteForceResult(int(best), sets)


def qaoa_sequence(instance: MISInstance, params, c6: float, layer_time: float = 1.0) -> IsingSpec:
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.size < 2 or params.size % 2:
        raise InvalidArgument("params must hold 2p values with p >= 1")
    if not layer_time > 0:
        raise InvalidArgument("layer durations must be positive")
    omegas, deltas = params[0::2], params[1::2]
    if (omegas < 0).any():
        raise InvalidArgument("drive amplitudes must be non-negative")
    n_layers = params.size
    times = layer_time * np.arange(n_layers + 1)
    om = np.zeros(n_layers + 1)
    de = np.zeros(n_layers + 1)
    om[0:n_layers:2] = omegas
    de[1:n_layers:2] = deltas
    return IsingSpec(
        instance.register,
        Waveform.piecewise_constant(times, om),
        Waveform.piecewise_constant(times, de),
        c6,
    )


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    """MIS instance plus the sequence builder and sampling settings.

    ``c6`` defaults to ``omega_max * radius**6`` so the blockade radius at the
    strongest allowed drive coincides with the unit-disk radius.
    ``shots=None`` evaluates the exact expectation instead of sampling.
    """

    instance: MISInstance
    layers: int = 2
    c6: float | None = None
    layer_time: float = 1.0
    shots: int | None = 500
    penalty: float = DEFAULT_PENALTY
    omega_max: float = 2 * np.pi
    delta_max: float = 2 * np.pi
    readout: ReadoutModel = field(default_factory=ReadoutModel.perfect)

    def __post_init__(self):
        if self.layers < 1:
            raise InvalidArgument("layers must be >= 1")
        if self.shots is not None and self.shots < 1:
            raise InvalidArgument("shots must be >= 1")
        if self.c6 is None:
            object.__setattr__(self, "c6", self.omega_max * self.instance.graph.radius**6)

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [(0.0, self.omega_max), (-self.delta_max, self.delta_max)] * self.layers

    def check_params(self, params) -> np.ndarray:
        x = np.asarray(params, dtype=np.float64).reshape(-1)
        if x.size != 2 * self.layers:
            raise InvalidArgument(f"expected {2 * self.layers} parameters, got {x.size}")
        for v, (lo, hi) in zip(x, self.bounds):
            if not lo - 1e-12 <= v <= hi + 1e-12:
                raise InvalidArgument(f"parameter {v} outside bounds [{lo}, {hi}]")
        return x

    def with_c6(self, c6: float) -> VariationalProblem:
        return replace(self, c6=c6)


def final_state(problem: VariationalProblem, params) -> QuantumState:
    x = problem.check_params(params)
    spec = qaoa_sequence(problem.instance, x, problem.c6, problem.layer_time)
    psi = new_state([2] * problem.instance.n_vertices)
    return evolve(psi, spec, 0.0, problem.layer_time * x.size)


def sample_sequence(problem: VariationalProblem, params, seed, shots=None) -> Counter:
    shots = shots if shots is not None else (problem.shots or 500)
    return sample(final_state(problem, params), shots, problem.readout, seed)


def exact_objective(problem: VariationalProblem, params) -> float:
    diag = cost_diagonal(problem.instance.graph, problem.penalty)
    return expectation(final_state(problem, params), diag)


def _mean_cost(graph, counts: Counter, penalty) -> float:
    total = sum(counts.values())
    return sum(mis_cost(graph, b, penalty) * c for b, c in counts.items()) / total


def estimate_objective(problem: VariationalProblem, params, seed=None) -> float:
    """Mean mis_cost over sampled bitstrings (exact expectation if ``shots`` is None)."""
    if problem.shots is None:
        return exact_objective(problem, params)
    return _mean_cost(problem.instance.graph, sample_sequence(problem, params, seed), problem.penalty)


def best_independent(graph: UnitDiskGraph, counts) -> MISSolution | None:
    best = None
    for b in counts:
        verts = tuple(k for k, c in enumerate(b) if c == "1")
        if graph.is_independent(verts) and (best is None or len(verts) > best.size):
            best = MISSolution(verts, True)
    return best


def independence_frequency(graph: UnitDiskGraph, counts: Counter) -> float:
    total = sum(counts.values())
    good = sum(c for b, c in counts.items() if graph.is_independent(k for k, ch in enumerate(b) if ch == "1"))
    return good / total


@dataclass(frozen=True)
class NelderMeadConfig:
    maxfev: int = 200
    xatol: float = 1e-4
    fatol: float = 1e-4
    adaptive: bool = False


@dataclass
class OptimizeResult:
    best_params: np.ndarray
    best_cost: float
    converged: bool
    trace: list = field(default_factory=list, repr=False)
    evaluations: int = 0
    best_sample: MISSolution | None = None


def nelder_mead(fun, bounds, restarts: int = 1, seed=None, config: NelderMeadConfig | None = None, x0=None):
    """Bounded Nelder-Mead with uniformly random restarts.

    ``fun(x, k)`` receives the evaluation counter ``k`` so noisy objectives can
    derive per-call seeds. ``trace`` holds ``(k, cost, best_so_far)``.
    """
    if restarts < 1:
        raise InvalidArgument("restarts must be >= 1")
    config = config or NelderMeadConfig()
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    trace = []
    best = {"x": None, "f": np.inf}
    counter = [0]

    def wrapped(x):
        x = np.clip(x, lo, hi)
        k = counter[0]
        counter[0] += 1
        f = float(fun(x, k))
        if f < best["f"]:
            best["f"], best["x"] = f, x.copy()
        trace.append((k, f, best["f"]))
        return f

    converged = False
    for r in range(restarts):
        start = np.asarray(x0, dtype=float) if (x0 is not None and r == 0) else lo + rng.random(lo.size) * (hi - lo)
        res = minimize(
            wrapped,
            start,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"maxfev": config.maxfev, "xatol": config.xatol, "fatol": config.fatol, "adaptive": config.adaptive},
        )
        converged = converged or bool(res.success)
    return OptimizeResult(best["x"], best["f"], converged, trace, counter[0])


def optimize(problem: VariationalProblem, config: NelderMeadConfig | None = None, restarts: int = 10, seed=None):
    """Minimize the sampled MIS cost; also keeps the largest independent set ever sampled."""
    root = np.random.SeedSequence(seed)
    eval_entropy = root.spawn(1)[0].entropy
    graph = problem.instance.graph
    best_sample = [None]

    def fun(x, k):
        if problem.shots is None:
            return exact_objective(problem, x)
        counts = sample_sequence(problem, x, np.random.SeedSequence([eval_entropy, k]))
        cand = best_independent(graph, counts)
        if cand is not None and (best_sample[0] is None or cand.size > best_sample[0].size):
            best_sample[0] = cand
        return _mean_cost(graph, counts, problem.penalty)

    result = nelder_mead(fun, problem.bounds, restarts, root.spawn(1)[0], config)
    result.best_sample = best_sample[0]
    return result


def strong_blockade_c6(problem: VariationalProblem, factor: float = 1e3) -> float:
    """C6 at which every graph edge carries at least ``factor * omega_max``."""
    reg, graph = problem.instance.register, problem.instance.graph
    if not graph.edges:
        return problem.c6
    longest = max(reg.distances[i, j] for i, j in graph.edges)
    return factor * problem.omega_max * longest**6
