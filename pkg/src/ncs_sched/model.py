"""Data model for a networked control system and its structural checks.

Plants are indexed from 1 everywhere in the public interface. A plant ``i``
runs in one of two modes at each step: closed loop ``A + B K`` (scheduled and
its control packet delivered) or open loop ``A`` (otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, InitVar
from typing import Sequence

import numpy as np

from .errors import MissingGainError, PartitionError, StructureError

PROB_SUM_TOL = 1e-9
SCHUR_MARGIN = 1e-9

CONDITIONS = ("C1", "C2", "C3", "C4")


def _as_matrix(value, name) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StructureError(f"{name}: not a numeric matrix ({exc})") from None
    if arr.ndim != 2 or arr.size == 0:
        raise StructureError(f"{name}: expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructureError(f"{name}: contains non-finite entries")
    arr.setflags(write=False)
    return arr


def spectral_radius(A) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=float)))))


def is_schur(A, margin: float = SCHUR_MARGIN) -> bool:
    return spectral_radius(A) < 1.0 - margin


@dataclass(frozen=True, eq=False)
class Plant:
    """One linear plant ``x(t+1) = A x(t) + B u(t)`` with optional gain ``K``."""

    index: int
    A: np.ndarray
    B: np.ndarray
    K: np.ndarray | None = None

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, (int, np.integer)) or self.index < 1:
            raise StructureError(f"plant index must be a positive integer, got {self.index!r}")
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise StructureError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise StructureError(f"B row count {B.shape[0]} does not match state dimension {A.shape[0]}")
        object.__setattr__(self, "index", int(self.index))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.K is not None:
            K = _as_matrix(self.K, "K")
            if K.shape != (B.shape[1], A.shape[0]):
                raise StructureError(
                    f"K must have shape {(B.shape[1], A.shape[0])}, got {K.shape}")
            object.__setattr__(self, "K", K)

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]

    @property
    def has_gain(self) -> bool:
        return self.K is not None

    def with_gain(self, K) -> Plant:
        return Plant(self.index, self.A, self.B, K)

    def without_gain(self) -> Plant:
        return Plant(self.index, self.A, self.B, None)


@dataclass(frozen=True, eq=False)
class ModePair:
    """Closed-loop (``A_s``) and open-loop (``A_u``) dynamics of one plant."""

    A_s: np.ndarray
    A_u: np.ndarray

    def __post_init__(self):
        A_s = _as_matrix(self.A_s, "A_s")
        A_u = _as_matrix(self.A_u, "A_u")
        if A_s.shape != A_u.shape or A_s.shape[0] != A_s.shape[1]:
            raise StructureError(
                f"mode matrices must be square and equal-sized, got {A_s.shape} and {A_u.shape}")
        object.__setattr__(self, "A_s", A_s)
        object.__setattr__(self, "A_u", A_u)

    @property
    def dim(self) -> int:
        return self.A_s.shape[0]


@dataclass(frozen=True)
class NetworkConfig:
    capacity: int
    loss_probability: float = 0.0

    def __post_init__(self):
        if isinstance(self.capacity, bool) or not isinstance(self.capacity, (int, np.integer)) or self.capacity < 1:
            raise StructureError(f"capacity must be a positive integer, got {self.capacity!r}")
        q = float(self.loss_probability)
        if not (0.0 <= q < 1.0):
            raise StructureError(f"loss probability must lie in [0, 1), got {q}")
        object.__setattr__(self, "capacity", int(self.capacity))
        object.__setattr__(self, "loss_probability", q)


@dataclass(frozen=True)
class Partition:
    """Plant subsets ``sets[j]`` selected with probability ``probabilities[j]``."""

    sets: tuple[tuple[int, ...], ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        try:
            sets = tuple(tuple(int(i) if _is_int(i) else _bad_index(i) for i in s) for s in self.sets)
        except TypeError:
            raise StructureError("sets must be a list of lists of plant indices") from None
        try:
            probs = tuple(float(p) for p in self.probabilities)
        except (TypeError, ValueError):
            raise StructureError("probabilities must be numeric") from None
        if len(sets) == 0:
            raise StructureError("partition needs at least one set")
        if len(sets) != len(probs):
            raise StructureError(f"{len(sets)} sets but {len(probs)} probabilities")
        for j, s in enumerate(sets, start=1):
            if not s:
                raise StructureError(f"set {j} is empty")
            for i in s:
                if i < 1:
                    raise StructureError(f"set {j} contains non-positive plant index {i}")
        if not all(math.isfinite(p) for p in probs):
            raise StructureError("probabilities must be finite")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "probabilities", probs)

    @property
    def size(self) -> int:
        return len(self.sets)

    def set_of(self, plant_index: int) -> int:
        """Return the 1-based index of the set containing ``plant_index``."""
        for j, s in enumerate(self.sets, start=1):
            if plant_index in s:
                return j
        raise StructureError(f"plant {plant_index} does not appear in any set")

    def channel_of(self, plant_index: int) -> int:
        """1-based channel used by the plant: its rank inside its (sorted) set."""
        s = self.sets[self.set_of(plant_index) - 1]
        return sorted(s).index(plant_index) + 1


def _is_int(i) -> bool:
    return isinstance(i, (int, np.integer)) and not isinstance(i, bool)


def _bad_index(i):
    raise StructureError(f"plant index must be an integer, got {i!r}")


@dataclass(frozen=True)
class Violation:
    label: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c for c in CONDITIONS if any(v.label == c for v in self.violations))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "partition admissible"
        return "; ".join(f"{v.label}: {v.message}" for v in self.violations)


def validate_partition(partition: Partition, N: int, M: int) -> ValidationReport:
    """Check conditions C1-C4 for a partition of plants ``1..N`` under capacity ``M``.

    Returns a report listing every violated condition (empty when admissible).
    Indices outside ``1..N`` raise :class:`StructureError` rather than being
    reported as a condition violation.
    """
    for j, s in enumerate(partition.sets, start=1):
        for i in s:
            if i > N:
                raise StructureError(f"set {j} references plant {i} but there are only {N} plants")

    found = []
    for j, s in enumerate(partition.sets, start=1):
        if len(s) > M:
            found.append(Violation("C1", f"set {j} has {len(s)} plants, capacity is {M}"))
        if len(set(s)) != len(s):
            found.append(Violation("C2", f"set {j} lists a plant twice"))

    seen: dict[int, int] = {}
    for j, s in enumerate(partition.sets, start=1):
        for i in set(s):
            if i in seen:
                found.append(Violation("C2", f"plant {i} appears in sets {seen[i]} and {j}"))
            else:
                seen[i] = j

    missing = sorted(set(range(1, N + 1)) - set(seen))
    if missing:
        found.append(Violation("C3", f"plants {missing} are never scheduled"))

    for j, p in enumerate(partition.probabilities, start=1):
        if p <= 0.0 or p >= 1.0:
            found.append(Violation("C4", f"p_{j} = {p} is outside the open interval (0, 1)"))
    total = math.fsum(partition.probabilities)
    if abs(total - 1.0) > PROB_SUM_TOL:
        found.append(Violation("C4", f"probabilities sum to {total!r}, not 1"))

    found.sort(key=lambda v: CONDITIONS.index(v.label))
    return ValidationReport(tuple(found))


@dataclass(frozen=True, eq=False)
class NcsModel:
    plants: tuple[Plant, ...]
    network: NetworkConfig
    partition: Partition
    check: InitVar[bool] = True

    def __post_init__(self, check):
        plants = tuple(self.plants)
        object.__setattr__(self, "plants", plants)
        for k, p in enumerate(plants, start=1):
            if p.index != k:
                raise StructureError(f"plant at position {k} carries index {p.index}")
        if not check:
            return
        N, M = len(plants), self.network.capacity
        if N < 2:
            raise StructureError(f"need at least 2 plants, got {N}")
        if not (0 < M < N):
            raise StructureError(f"0 < M < N violated (M={M}, N={N})")
        report = validate_partition(self.partition, N, M)
        if not report.ok:
            raise PartitionError(str(report), report)

    @property
    def N(self) -> int:
        return len(self.plants)

    def plant(self, index: int) -> Plant:
        return self.plants[index - 1]

    def replace_plants(self, plants) -> NcsModel:
        return NcsModel(tuple(plants), self.network, self.partition)

    def mode_probabilities(self, plant_index: int) -> ModeProbabilities:
        return mode_probabilities(self.partition, plant_index, self.network.loss_probability)


@dataclass(frozen=True)
class ModeProbabilities:
    """Stationary probabilities of closed-loop (``pi_s``) and open-loop (``pi_u``) steps.

    The switching is i.i.d. in time, so both rows of the mode transition
    matrix equal ``(pi_s, pi_u)``.
    """

    pi_s: float
    pi_u: float

    def __post_init__(self):
        if not (0.0 <= self.pi_s <= 1.0) or not (0.0 <= self.pi_u <= 1.0):
            raise StructureError(f"mode probabilities out of range: ({self.pi_s}, {self.pi_u})")
        if abs(self.pi_s + self.pi_u - 1.0) > PROB_SUM_TOL:
            raise StructureError(f"mode probabilities must sum to 1, got {self.pi_s + self.pi_u!r}")

    @classmethod
    def closed(cls, pi_s: float) -> ModeProbabilities:
        pi_s = float(pi_s)
        return cls(pi_s, 1.0 - pi_s)

    def transition_matrix(self) -> np.ndarray:
        return np.array([[self.pi_s, self.pi_u], [self.pi_s, self.pi_u]])


def mode_probabilities(partition: Partition, plant_index: int, q: float) -> ModeProbabilities:
    """Closed-loop probability ``p_j (1 - q)`` for the set ``j`` holding the plant."""
    j = partition.set_of(plant_index)
    p = partition.probabilities[j - 1]
    return ModeProbabilities.closed(p * (1.0 - q))


def lossless_mode_probabilities(p: float) -> ModeProbabilities:
    """Weights ``(p_j, 1 - p_j)`` used when the network never drops packets."""
    return ModeProbabilities(p, 1.0 - p)


def mode_matrices(plant: Plant) -> ModePair:
    if plant.K is None:
        raise MissingGainError(f"plant {plant.index} has no gain K; run synthesis first")
    K = plant.K
    if K.shape != (plant.B.shape[1], plant.A.shape[0]):
        raise StructureError(f"B {plant.B.shape} and K {K.shape} are incompatible")
    return ModePair(plant.A + plant.B @ K, plant.A)


@dataclass(frozen=True)
class AssumptionReport:
    open_loop_unstable: bool
    closed_loop_schur: bool
    open_loop_radius: float
    closed_loop_radius: float

    @property
    def holds(self) -> bool:
        return self.open_loop_unstable and self.closed_loop_schur


def check_assumption(plant: Plant) -> AssumptionReport:
    """Open loop unstable and closed loop Schur, each judged with a 1e-9 margin."""
    if plant.K is None:
        raise MissingGainError(f"plant {plant.index} has no gain K; run synthesis first")
    modes = mode_matrices(plant)
    r_open = spectral_radius(modes.A_u)
    r_closed = spectral_radius(modes.A_s)
    return AssumptionReport(
        open_loop_unstable=r_open >= 1.0 - SCHUR_MARGIN,
        closed_loop_schur=r_closed < 1.0 - SCHUR_MARGIN,
        open_loop_radius=r_open,
        closed_loop_radius=r_closed,
    )


def make_partition(sets: Sequence[Sequence[int]], probabilities: Sequence[float]) -> Partition:
    return Partition(tuple(tuple(s) for s in sets), tuple(probabilities))
