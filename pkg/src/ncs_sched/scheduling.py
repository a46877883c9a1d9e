"""Scheduling logics and data-loss signals, reproducibly seeded.

Random streams come from numpy's ``SeedSequence`` keyed by
``(seed, run, stream label, channel)`` and fed to a ``PCG64`` bit generator,
so every (run, stream) pair is independent of how many other runs or
channels were drawn and of execution order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PartitionError, StructureError
from .model import PROB_SUM_TOL, Partition

PRNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(entropy=seed, spawn_key=(run, stream, channel))"

STREAMS = {"schedule": 0, "loss": 1, "initial": 2}
SCHEDULE_MODES = ("iid", "frequency_exact")


@dataclass(frozen=True)
class RngSeed:
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not (0 <= self.seed < 2**64):
            raise StructureError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def generator(self, stream: str, run: int = 0, channel: int = 0) -> np.random.Generator:
        key = (int(run), STREAMS[stream], int(channel))
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(self.seed), spawn_key=key)))


@dataclass(frozen=True, eq=False)
class ScheduleLogic:
    """``assignments[t]`` is the 1-based index of the set granted access at step ``t``."""

    assignments: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.assignments)

    def counts(self, v: int) -> np.ndarray:
        return np.bincount(self.assignments, minlength=v + 1)[1:]


@dataclass(frozen=True, eq=False)
class DataLossSignal:
    """``channels[m - 1, t] == 1`` when channel ``m`` drops its packet at step ``t``."""

    channels: np.ndarray

    @property
    def horizon(self) -> int:
        return self.channels.shape[1]

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]


def _check_probabilities(partition: Partition):
    p = partition.probabilities
    if any(x <= 0.0 or x >= 1.0 for x in p) or abs(math.fsum(p) - 1.0) > PROB_SUM_TOL:
        raise PartitionError(
            f"set probabilities {p} must lie in (0, 1) and sum to 1 (a single set is never admissible)")


def largest_remainder(weights, total: int) -> np.ndarray:
    """Integer counts proportional to ``weights`` summing exactly to ``total``.

    Floors first, then hands out the missing units by largest fractional
    part; equal remainders go to the lower index.
    """
    w = np.asarray(weights, dtype=float)
    exact = w * total
    counts = np.floor(exact).astype(np.int64)
    short = int(total - counts.sum())
    # remainders compared at 12 decimals so float noise cannot break index ties
    order = sorted(range(len(w)), key=lambda k: (-round(float(exact[k] - counts[k]), 12), k))
    for k in order[:short]:
        counts[k] += 1
    return counts


def generate_schedule_iid(partition: Partition, T: int, seed: RngSeed, run: int = 0) -> ScheduleLogic:
    """Draw ``gamma(t)`` independently at every step with the set probabilities."""
    _check_probabilities(partition)
    if T < 0:
        raise StructureError(f"horizon must be non-negative, got {T}")
    rng = seed.generator("schedule", run)
    p = np.asarray(partition.probabilities)
    draws = rng.choice(len(p), size=T, p=p / p.sum()) + 1
    return ScheduleLogic(draws.astype(np.int64))


def generate_schedule_frequency_exact(partition: Partition, T: int, seed: RngSeed,
                                      run: int = 0) -> ScheduleLogic:
    """Each set appears exactly its rounded share of ``T`` steps, in random order."""
    _check_probabilities(partition)
    if T < 1:
        raise StructureError(f"horizon must be positive, got {T}")
    counts = largest_remainder(partition.probabilities, T)
    pool = np.repeat(np.arange(1, len(counts) + 1, dtype=np.int64), counts)
    return ScheduleLogic(seed.generator("schedule", run).permutation(pool))


def generate_schedule(partition: Partition, T: int, seed: RngSeed, mode: str = "iid",
                      run: int = 0) -> ScheduleLogic:
    if mode == "iid":
        return generate_schedule_iid(partition, T, seed, run)
    if mode == "frequency_exact":
        return generate_schedule_frequency_exact(partition, T, seed, run)
    raise StructureError(f"unknown schedule mode {mode!r}")


def generate_loss_signal(q: float, M: int, T: int, seed: RngSeed, mode: str = "iid",
                         tie_channels: bool = False, run: int = 0) -> DataLossSignal:
    """Packet-drop indicators for ``M`` channels over ``T`` steps.

    ``iid`` draws Bernoulli(``q``) per channel and step; ``frequency_exact``
    places exactly ``round(q T)`` drops per channel at random positions.
    With ``tie_channels`` every channel reuses channel 1's sequence.
    """
    if not (0.0 <= q < 1.0):
        raise StructureError(f"loss probability must lie in [0, 1), got {q}")
    if M < 1 or T < 0:
        raise StructureError(f"need M >= 1 and T >= 0, got M={M}, T={T}")
    if mode not in SCHEDULE_MODES:
        raise StructureError(f"unknown loss mode {mode!r}")

    def one(channel):
        rng = seed.generator("loss", run, channel)
        if mode == "iid":
            return (rng.random(T) < q).astype(np.uint8)
        ones = int(largest_remainder((q, 1.0 - q), T)[0])
        pool = np.zeros(T, dtype=np.uint8)
        pool[:ones] = 1
        return rng.permutation(pool)

    if tie_channels:
        first = one(1)
        rows = [first.copy() for _ in range(M)]
    else:
        rows = [one(m) for m in range(1, M + 1)]
    return DataLossSignal(np.vstack(rows) if rows else np.zeros((M, T), dtype=np.uint8))


def schedule_csv(schedule: ScheduleLogic) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "set_index"])
    w.writerows((t, int(j)) for t, j in enumerate(schedule.assignments))
    return buf.getvalue()


def loss_csv(loss: DataLossSignal) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "channel", "lost"])
    for t in range(loss.horizon):
        for m in range(loss.n_channels):
            w.writerow((t, m + 1, int(loss.channels[m, t])))
    return buf.getvalue()


def write_schedule_csv(schedule: ScheduleLogic, path) -> None:
    Path(path).write_text(schedule_csv(schedule), encoding="utf-8")


def write_loss_csv(loss: DataLossSignal, path) -> None:
    Path(path).write_text(loss_csv(loss), encoding="utf-8")
