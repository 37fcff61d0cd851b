"""Stochastic tweezer loading and defect-free sub-register assembly."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AssemblyFailed, InsufficientAtoms, InvalidArgument, InvalidPlan
from .register import Register

# upper bound of one pick-transfer-release move, reported as metadata only
MOVE_DURATION_MS = 1.0


@dataclass(frozen=True, eq=False)
class OccupancyImage:
    occupied: np.ndarray

    def __post_init__(self):
        occ = np.array(self.occupied, dtype=bool).reshape(-1)
        occ.setflags(write=False)
        object.__setattr__(self, "occupied", occ)

    def __len__(self):
        return self.occupied.size

    @property
    def count(self) -> int:
        return int(self.occupied.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.occupied)

    def covers(self, target) -> bool:
        t = np.fromiter(target, dtype=np.int64)
        return bool(self.occupied[t].all()) if t.size else True

    def __eq__(self, other):
        return isinstance(other, OccupancyImage) and np.array_equal(self.occupied, other.occupied)

    __hash__ = None


@dataclass(frozen=True)
class MovePlan:
    moves: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple((int(a), int(b)) for a, b in self.moves))

    def __len__(self):
        return len(self.moves)

    def distance(self, reg: Register) -> float:
        return float(sum(reg.distances[a, b] for a, b in self.moves))


def simulate_loading(reg: Register, p_fill: float, seed) -> OccupancyImage:
    if not 0.0 <= p_fill <= 1.0:
        raise InvalidArgument("p_fill must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    return OccupancyImage(rng.random(len(reg)) < p_fill)


def _target_array(target, n_sites) -> np.ndarray:
    t = np.array(sorted({int(i) for i in target}), dtype=np.int64)
    if t.size and (t.min() < 0 or t.max() >= n_sites):
        raise InvalidArgument("target site index out of range")
    return t


def plan_rearrangement(occ: OccupancyImage, target, reg: Register) -> MovePlan:
    """Minimum total-distance moves filling every vacant target site.

    Atoms already sitting on target sites stay put; surplus atoms are matched
    to vacancies by an optimal linear-sum assignment on Euclidean distance.
    Since sources lie outside the target and destinations are empty, the moves
    have no ordering dependencies; they are emitted by destination index.
    """
    if len(occ) != len(reg):
        raise InvalidArgument("occupancy image does not match the register")
    t = _target_array(target, len(reg))
    in_target = np.zeros(len(reg), dtype=bool)
    in_target[t] = True
    vacant = np.flatnonzero(in_target & ~occ.occupied)
    surplus = np.flatnonzero(~in_target & occ.occupied)
    if vacant.size > surplus.size:
        raise InsufficientAtoms(
            f"{occ.count} atoms loaded, target needs {t.size} ({vacant.size} vacancies, {surplus.size} spare)"
        )
    if vacant.size == 0:
        return MovePlan(())
    cost = reg.distances[np.ix_(surplus, vacant)]
    rows, cols = linear_sum_assignment(cost)
    moves = sorted(zip(surplus[rows].tolist(), vacant[cols].tolist()), key=lambda m: m[1])
    return MovePlan(tuple(moves))


def validate_plan(occ: OccupancyImage, plan: MovePlan) -> None:
    state = occ.occupied.copy()
    n = state.size
    for k, (src, dst) in enumerate(plan.moves):
        if not (0 <= src < n and 0 <= dst < n):
            raise InvalidPlan(f"move #{k} ({src}->{dst}) references a site out of range")
        if src == dst:
            raise InvalidPlan(f"move #{k} has identical source and destination")
        if not state[src]:
            raise InvalidPlan(f"move #{k}: source site {src} is empty")
        if state[dst]:
            raise InvalidPlan(f"move #{k}: destination site {dst} is occupied")
        state[src], state[dst] = False, True


def apply_moves(occ: OccupancyImage, plan: MovePlan, p_success: float, seed) -> OccupancyImage:
    """Execute moves in order; a failed move loses the atom."""
    if not 0.0 <= p_success <= 1.0:
        raise InvalidArgument("p_success must lie in [0, 1]")
    validate_plan(occ, plan)
    state = occ.occupied.copy()
    if not plan.moves:
        return OccupancyImage(state)
    rng = np.random.default_rng(seed)
    ok = rng.random(len(plan.moves)) < p_success
    moves = np.array(plan.moves, dtype=np.int64)
    state[moves[:, 0]] = False
    state[moves[ok, 1]] = True
    return OccupancyImage(state)


@dataclass
class AssemblyResult:
    final: OccupancyImage
    attempts: int
    moves_used: int
    reloads: int = 1

    @property
    def move_time_ms(self) -> float:
        return self.moves_used * MOVE_DURATION_MS


def assembly_cycle(reg: Register, target, p_fill: float, p_success: float, max_retries: int = 10, seed=None):
    """Image, plan, move, and re-image until the target is defect-free.

    Each attempt plans from the latest image; the register is reloaded from
    scratch only when too few atoms remain to fill the target. Raises
    :class:`AssemblyFailed` (with the last occupancy attached) when
    ``max_retries`` attempts do not succeed.
    """
    t = _target_array(target, len(reg))
    if max_retries < 1:
        raise InvalidArgument("max_retries must be >= 1")
    rng = np.random.default_rng(seed)
    occ = simulate_loading(reg, p_fill, rng)
    reloads = 1
    moves_used = 0
    if t.size == 0:
        return AssemblyResult(occ, 1, 0, reloads)
    for attempt in range(1, max_retries + 1):
        try:
            plan = plan_rearrangement(occ, t, reg)
        except InsufficientAtoms:
            occ = simulate_loading(reg, p_fill, rng)
            reloads += 1
            try:
                plan = plan_rearrangement(occ, t, reg)
            except InsufficientAtoms:
                continue
        occ = apply_moves(occ, plan, p_success, rng)
        moves_used += len(plan)
        if occ.covers(t):
            return AssemblyResult(occ, attempt, moves_used, reloads)
    raise AssemblyFailed(
        f"target not filled after {max_retries} attempts", occupancy=occ, attempts=max_retries, moves_used=moves_used
    )
