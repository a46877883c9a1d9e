"""Exhaustive search over admissible partitions and a probability grid."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np

from .errors import NcsError, StructureError
from .model import ModeProbabilities, NcsModel, Partition, mode_matrices
from .stability import check_stochastic_stability
from .synthesis import synthesize

MAX_PLANTS = 6
MIN_GRID_STEP = 0.05


def set_partitions(N: int, M: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All partitions of ``1..N`` into blocks of at most ``M`` plants.

    Blocks are sorted and ordered by their smallest element.
    """

    def rec(rest):
        if not rest:
            yield ()
            return
        first, others = rest[0], rest[1:]
        for k in range(min(M, len(rest))):
            for extra in combinations(others, k):
                block = (first,) + extra
                remaining = tuple(x for x in others if x not in extra)
                for tail in rec(remaining):
                    yield (block,) + tail

    yield from rec(tuple(range(1, N + 1)))


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


@dataclass(frozen=True)
class SweepEntry:
    sets: tuple[tuple[int, ...], ...]
    probabilities: tuple[float, ...]
    radii: tuple[float, ...]

    @property
    def max_radius(self) -> float:
        return max(self.radii)


def sweep(model: NcsModel, grid_step: float = 0.1, synthesize_missing: bool = True):
    """Return ``(feasible_entries, evaluated_count)``.

    A (partition, probabilities) pair is feasible when every plant is
    stochastically stable. Plants without a gain get one synthesised for the
    induced closed-loop probability (cached, since only ``p_j`` matters).
    """
    N, M, q = model.N, model.network.capacity, model.network.loss_probability
    if N > MAX_PLANTS:
        raise StructureError(f"sweep is limited to N <= {MAX_PLANTS} plants, got {N}")
    if grid_step < MIN_GRID_STEP:
        raise StructureError(f"grid step must be >= {MIN_GRID_STEP}, got {grid_step}")
    units = round(1.0 / grid_step)
    if abs(units * grid_step - 1.0) > 1e-9:
        raise StructureError(f"grid step {grid_step} does not divide 1")

    cache: dict[tuple[int, int], float] = {}

    def radius(plant_index: int, k: int) -> float:
        key = (plant_index, k)
        if key not in cache:
            plant = model.plant(plant_index)
            probs = ModeProbabilities.closed((k / units) * (1.0 - q))
            if plant.has_gain:
                cache[key] = check_stochastic_stability(mode_matrices(plant), probs).radius
            elif synthesize_missing:
                try:
                    cache[key] = synthesize(plant, probs).radius
                except NcsError:
                    cache[key] = float("inf")
            else:
                raise StructureError(f"plant {plant_index} has no gain")
        return cache[key]

    feasible = []
    evaluated = 0
    for sets in set_partitions(N, M):
        v = len(sets)
        if v < 2 or v > units:
            continue
        for comp in compositions(units, v):
            evaluated += 1
            radii = [0.0] * N
            for block, k in zip(sets, comp):
                for i in block:
                    radii[i - 1] = radius(i, k)
            if max(radii) < 1.0 - 1e-9:
                feasible.append(SweepEntry(sets, tuple(k / units for k in comp), tuple(radii)))
    return feasible, evaluated


def entry_partition(entry: SweepEntry) -> Partition:
    return Partition(entry.sets, entry.probabilities)
