"""Atom-array geometry and the unit-disk graphs it induces.

Units: lengths in µm, angular frequencies in rad/µs, hbar = 1.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, InvalidRegister

LATTICE_KINDS = ("chain", "square", "triangular", "cubic")


@dataclass(frozen=True, eq=False)
class Register:
    """Immutable set of atom positions, stored as an ``(n, 3)`` array in µm.

    1D and 2D coordinates are padded with zeros.
    """

    positions: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[0] < 1 or not 1 <= pos.shape[1] <= 3:
            raise InvalidRegister(f"positions must be an (n, 1..3) array, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise InvalidRegister("positions must be finite")
        if pos.shape[1] < 3:
            pos = np.hstack([pos, np.zeros((pos.shape[0], 3 - pos.shape[1]))])
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(pos):
                raise InvalidRegister("labels must match the number of positions")
            object.__setattr__(self, "labels", labels)
        d = self.distances
        if len(pos) > 1 and d[np.triu_indices(len(pos), k=1)].min() <= 0.0:
            raise InvalidRegister("duplicate atom positions")

    def __len__(self):
        return self.positions.shape[0]

    @property
    def n_atoms(self) -> int:
        return len(self)

    @cached_property
    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        d = np.sqrt((diff**2).sum(axis=-1))
        d.setflags(write=False)
        return d

    def to_json(self) -> str:
        return json.dumps(self.positions.tolist())

    @classmethod
    def from_json(cls, text: str) -> Register:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidRegister(f"register file is not valid JSON: {exc}") from exc
        if isinstance(data, dict):
            data = data.get("positions")
        if not isinstance(data, list) or not data:
            raise InvalidRegister("register JSON must be a non-empty array of [x, y, z] triples")
        for row in data:
            if not isinstance(row, list) or not 1 <= len(row) <= 3:
                raise InvalidRegister(f"bad coordinate entry {row!r}")
            if any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in row):
                raise InvalidRegister(f"non-numeric coordinate in {row!r}")
        width = max(len(r) for r in data)
        padded = [list(r) + [0.0] * (width - len(r)) for r in data]
        return cls(np.array(padded, dtype=np.float64))

    @classmethod
    def load(cls, path) -> Register:
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


@dataclass(frozen=True)
class UnitDiskGraph:
    vertex_count: int
    edges: frozenset = field(default_factory=frozenset)
    radius: float = math.inf

    def __post_init__(self):
        edges = frozenset((min(i, j), max(i, j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise InvalidArgument("self-loops are not allowed")
            if not (0 <= i < self.vertex_count and 0 <= j < self.vertex_count):
                raise InvalidArgument(f"edge ({i}, {j}) out of range")
        object.__setattr__(self, "edges", edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def neighbor_masks(self) -> np.ndarray:
        """Bitmask of neighbours per vertex (bit k set <=> edge to vertex k)."""
        masks = np.zeros(self.vertex_count, dtype=np.int64)
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def is_independent(self, vertices) -> bool:
        chosen = set(vertices)
        return not any(i in chosen and j in chosen for i, j in self.edges)


def build_lattice(kind: str, extents, spacing: float) -> Register:
    """Regular lattice with sites ordered row-major (x fastest, then y, then z).

    ``extents`` gives the site count along each axis: one value for a chain,
    two for square/triangular, three for cubic. Odd rows of a triangular
    lattice are shifted by half a spacing.
    """
    if kind not in LATTICE_KINDS:
        raise InvalidArgument(f"unknown lattice kind {kind!r}; expected one of {LATTICE_KINDS}")
    extents = [int(e) for e in np.atleast_1d(extents)]
    want = {"chain": 1, "square": 2, "triangular": 2, "cubic": 3}[kind]
    if len(extents) != want:
        raise InvalidArgument(f"{kind} lattice needs {want} extents, got {len(extents)}")
    if any(e < 1 for e in extents):
        raise InvalidArgument("extents must be >= 1")
    if not spacing > 0:
        raise InvalidArgument("spacing must be positive")

    extents = extents + [1] * (3 - len(extents))
    nx, ny, nz = extents
    pts = []
    for z, y, x in itertools.product(range(nz), range(ny), range(nx)):
        if kind == "triangular":
            pts.append(((x + 0.5 * (y % 2)) * spacing, y * spacing * math.sqrt(3) / 2, 0.0))
        else:
            pts.append((x * spacing, y * spacing, z * spacing))
    return Register(np.array(pts, dtype=np.float64))


def blockade_radius(omega: float, c6: float) -> float:
    """Distance where the van der Waals shift c6/r**6 equals the drive omega."""
    if not omega > 0 or not c6 > 0:
        raise InvalidArgument("omega and c6 must be positive")
    return (c6 / omega) ** (1.0 / 6.0)


def unit_disk_graph(reg: Register, radius: float) -> UnitDiskGraph:
    if not radius > 0:
        raise InvalidArgument("radius must be positive")
    iu, ju = np.triu_indices(len(reg), k=1)
    close = reg.distances[iu, ju] < radius
    edges = frozenset(zip(iu[close].tolist(), ju[close].tolist()))
    return UnitDiskGraph(len(reg), edges, float(radius))


def interaction_matrix(reg: Register, coeff: float, power: int) -> np.ndarray:
    """Pairwise couplings ``coeff / r_ij**power`` with a zero diagonal."""
    if power not in (3, 6):
        raise InvalidArgument("power must be 3 or 6")
    if not np.isfinite(coeff):
        raise InvalidArgument("coefficient must be finite")
    d = np.array(reg.distances, copy=True)
    np.fill_diagonal(d, np.inf)
    if (d <= 0).any():
        raise InvalidRegister("duplicate atom positions")
    return coeff / d**power
