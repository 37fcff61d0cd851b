"""Connectivity-constrained routing of random two-qubit circuits.

Layouts are square (2D) or cubic (3D) lattices with unit spacing. The router
keeps a logical-to-physical placement (identity at the start) and, for every
gate whose qubits are not adjacent, walks the first qubit along the canonical
shortest path (BFS, lowest index first) until it neighbours the second one,
emitting one SWAP per hop.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidArgument, InvalidGraph
from .gates import Circuit, circuit_unitary

LAYOUT_KINDS = ("nn2d", "disk2d", "disk3d")
SWAP_COST = 3


@dataclass(frozen=True, eq=False)
class ConnectivityGraph:
    positions: np.ndarray
    edges: frozenset
    kind: str = "custom"
    radius: float | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        edges = frozenset((min(a, b), max(a, b)) for a, b in self.edges if a != b)
        object.__setattr__(self, "edges", edges)

    @property
    def n_qubits(self) -> int:
        return len(self.positions)

    def has_edge(self, a, b) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in range(self.n_qubits)]
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return [sorted(x) for x in nb]

    def shortest_paths(self):
        """All-pairs hop distances and canonical next hops.

        ``nxt[u, v]`` is the lowest-index neighbour of ``u`` one hop closer to
        ``v``. Unreachable pairs have distance -1.
        """
        cached = self.__dict__.get("_paths")
        if cached is not None:
            return cached
        n = self.n_qubits
        nb = self.neighbors()
        dist = np.full((n, n), -1, dtype=np.int64)
        for src in range(n):
            dist[src, src] = 0
            frontier = [src]
            while frontier:
                nxt_frontier = []
                for u in frontier:
                    for w in nb[u]:
                        if dist[src, w] < 0:
                            dist[src, w] = dist[src, u] + 1
                            nxt_frontier.append(w)
                frontier = nxt_frontier
        nxt = np.full((n, n), -1, dtype=np.int64)
        for u in range(n):
            for v in range(n):
                if u == v or dist[u, v] < 0:
                    continue
                for w in nb[u]:
                    if dist[w, v] == dist[u, v] - 1:
                        nxt[u, v] = w
                        break
        self.__dict__["_paths"] = (dist, nxt)
        return dist, nxt

    def is_connected(self) -> bool:
        dist, _ = self.shortest_paths()
        return bool((dist >= 0).all())


@dataclass
class RoutedCircuit:
    original: Circuit
    output: Circuit
    graph: ConnectivityGraph
    final_placement: np.ndarray
    swaps: int = 0
    trace: list = field(default_factory=list, repr=False)


def _tile_2d(n):
    best = None
    for rows in range(1, math.isqrt(n) + 2):
        cols = max(rows, math.ceil(n / rows))
        if cols > 2 * rows:
            continue
        key = (rows * cols, cols - rows)
        if best is None or key < best[0]:
            best = (key, (cols, rows))
    return best[1]


def _tile_3d(n):
    best = None
    side = math.ceil(n ** (1 / 3)) + 2
    for x, y, z in itertools.product(range(1, side + 1), repeat=3):
        if not x >= y >= z or x * y * z < n or x > 2 * z:
            continue
        key = (x * y * z, x - z)
        if best is None or key < best[0]:
            best = (key, (x, y, z))
    return best[1]


def lattice_shape(kind: str, n_qubits: int) -> tuple:
    """Box dimensions used for ``n_qubits``, padded to the smallest near-cubic box."""
    return _tile_3d(n_qubits) if kind == "disk3d" else _tile_2d(n_qubits)


def make_layout(kind: str, n_qubits: int, radius: float = 2.3) -> ConnectivityGraph:
    """Square-lattice nearest-neighbour or blockade-disk connectivity.

    When ``n_qubits`` does not tile a box exactly the lattice is padded to the
    smallest box whose side lengths differ by at most a factor of two.
    """
    if kind not in LAYOUT_KINDS:
        raise InvalidArgument(f"unknown layout {kind!r}; expected one of {LAYOUT_KINDS}")
    if n_qubits < 2:
        raise InvalidArgument("n_qubits must be >= 2")
    if kind != "nn2d" and not radius > 0:
        raise InvalidArgument("radius must be positive")
    shape = lattice_shape(kind, n_qubits)
    ranges = [range(s) for s in reversed(shape)]
    pts = np.array([tuple(reversed(p)) for p in itertools.product(*ranges)], dtype=float)
    if pts.shape[1] == 2:
        pts = np.hstack([pts, np.zeros((len(pts), 1))])
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    cutoff = 1.0 + 1e-9 if kind == "nn2d" else radius
    iu, ju = np.triu_indices(len(pts), k=1)
    if kind == "nn2d":
        mask = d[iu, ju] <= cutoff
    else:
        mask = d[iu, ju] < cutoff
    edges = frozenset(zip(iu[mask].tolist(), ju[mask].tolist()))
    return ConnectivityGraph(pts, edges, kind, None if kind == "nn2d" else float(radius))


def random_circuit(n_qubits: int, n_2q_gates: int, seed) -> Circuit:
    """CNOTs on uniformly random distinct ordered qubit pairs."""
    if n_2q_gates < 1:
        raise InvalidArgument("n_2q_gates must be >= 1")
    if n_qubits < 2:
        raise InvalidArgument("n_qubits must be >= 2")
    rng = np.random.default_rng(seed)
    a = rng.integers(0, n_qubits, size=n_2q_gates)
    b = rng.integers(0, n_qubits - 1, size=n_2q_gates)
    b = b + (b >= a)
    c = Circuit(n_qubits=n_qubits)
    for x, y in zip(a.tolist(), b.tolist()):
        c.append("CNOT", [x, y])
    return c


def route(circuit: Circuit, graph: ConnectivityGraph, seed=None) -> RoutedCircuit:
    """Insert SWAPs so every multi-qubit gate acts on a graph edge.

    ``seed`` is accepted for interface symmetry; the greedy router is
    deterministic. Single-qubit gates are relocated with the placement.
    """
    if circuit.width > graph.n_qubits:
        raise InvalidArgument(f"circuit needs {circuit.width} qubits, graph has {graph.n_qubits}")
    if not graph.is_connected():
        raise InvalidGraph("connectivity graph is disconnected")
    for gate in circuit:
        if len(gate.qubits) > 2:
            raise InvalidArgument(f"{gate.name} acts on more than two qubits; decompose before routing")
    dist, nxt = graph.shortest_paths()
    n = graph.n_qubits
    two_q = [g for g in circuit if len(g.qubits) == 2]
    pairs = np.array([g.qubits for g in two_q], dtype=np.int64).reshape(-1, 2)
    events, _ = kernels.route_greedy(pairs, dist, nxt, n)

    out = Circuit(n_qubits=n)
    l2p = list(range(n))
    p2l = list(range(n))
    trace = []
    ev = iter(events.tolist())
    swaps = 0
    for gate in circuit:
        if len(gate.qubits) == 1:
            out.append(gate.name, [l2p[gate.qubits[0]]], gate.params, gate.matrix)
            continue
        while True:
            kind, a, b = next(ev)
            if kind == 1:
                out.append("SWAP", [a, b])
                la, lb = p2l[a], p2l[b]
                p2l[a], p2l[b] = lb, la
                l2p[la], l2p[lb] = b, a
                swaps += 1
                continue
            out.append(gate.name, [a, b], gate.params, gate.matrix)
            trace.append(tuple(l2p))
            break
    return RoutedCircuit(circuit, out, graph, np.array(l2p), swaps, trace)


def overhead(r: RoutedCircuit) -> float:
    """Two-qubit gate count after routing (SWAP = 3 CNOTs) over the count before."""
    before = r.original.two_qubit_count()
    if before == 0:
        return 1.0
    after = sum(SWAP_COST if g.name == "SWAP" else 1 for g in r.output if len(g.qubits) == 2)
    return after / before


def permutation_matrix(l2p, n_phys: int) -> np.ndarray:
    """Unitary moving the content of wire k to wire ``l2p[k]``."""
    dim = 2**n_phys
    perm = np.zeros((dim, dim))
    for s in range(dim):
        bits = [(s >> (n_phys - 1 - q)) & 1 for q in range(n_phys)]
        out = [0] * n_phys
        for k in range(n_phys):
            out[l2p[k]] = bits[k]
        t = sum(b << (n_phys - 1 - q) for q, b in enumerate(out))
        perm[t, s] = 1.0
    return perm


def check_equivalence(r: RoutedCircuit, atol: float = 1e-9) -> float:
    """Max entry deviation between the routed unitary and ``P_final · U_original``."""
    n = r.graph.n_qubits
    if n > 10:
        raise InvalidArgument("equivalence check limited to 10 physical qubits")
    u_out = circuit_unitary(r.output, n)
    u_in = circuit_unitary(r.original, n)
    expected = permutation_matrix(r.final_placement.tolist(), n) @ u_in
    return float(np.abs(u_out - expected).max())


@dataclass
class BenchRow:
    layout: str
    n_gates: int
    mean_overhead: float
    std: float


def benchmark(layouts, n_qubits: int, gate_counts, n_circuits: int, seed, radius: float = 2.3, threads: int = 1):
    """Mean/std overhead per (layout, gate count); identical circuits across layouts."""
    graphs = {k: make_layout(k, n_qubits, radius) for k in layouts}
    root = np.random.SeedSequence(seed)
    sizes = list(gate_counts)
    children = root.spawn(len(sizes))
    rows = []
    for n_gates, child in zip(sizes, children):
        seeds = child.spawn(n_circuits)
        circuits = [random_circuit(n_qubits, n_gates, s) for s in seeds]

        def one(kind, circuits=circuits):
            return [overhead(route(c, graphs[kind])) for c in circuits]

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(one, layouts))
        else:
            results = [one(k) for k in layouts]
        for kind, vals in zip(layouts, results):
            rows.append(BenchRow(kind, n_gates, float(np.mean(vals)), float(np.std(vals))))
    return rows
