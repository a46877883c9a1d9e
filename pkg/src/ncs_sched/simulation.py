"""Closed-loop simulation of the NCS and Monte Carlo cost estimation.

Each run draws its own schedule, loss signal and initial states from streams
keyed by the run index, so results do not depend on how runs are batched.
Runs are propagated together as a ``(runs, d)`` array per plant.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import StructureError
from .model import NcsModel, mode_matrices
from .scheduling import (
    SCHEDULE_MODES,
    DataLossSignal,
    RngSeed,
    ScheduleLogic,
    generate_loss_signal,
    generate_schedule,
)

DIVERGENCE_LIMIT = 1e100
TAIL_FRACTION = 0.1


@dataclass(frozen=True)
class SimulationConfig:
    horizon: int = 1000
    runs: int = 100
    x0_box: float = 1.0
    seed: RngSeed = field(default_factory=RngSeed)
    schedule_mode: str = "iid"
    loss_mode: str = "iid"
    tie_channels: bool = False
    x0: tuple | None = None  # fixed per-plant initial states; overrides x0_box

    def __post_init__(self):
        if isinstance(self.horizon, bool) or int(self.horizon) != self.horizon or self.horizon < 1:
            raise StructureError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if isinstance(self.runs, bool) or int(self.runs) != self.runs or self.runs < 1:
            raise StructureError(f"runs must be an integer >= 1, got {self.runs!r}")
        if not self.x0_box >= 0:
            raise StructureError(f"x0_box must be non-negative, got {self.x0_box!r}")
        for name in ("schedule_mode", "loss_mode"):
            if getattr(self, name) not in SCHEDULE_MODES:
                raise StructureError(f"{name} must be one of {SCHEDULE_MODES}, got {getattr(self, name)!r}")
        if isinstance(self.seed, int):
            object.__setattr__(self, "seed", RngSeed(self.seed))


def resolve_mode(plant_index: int, gamma_t: Sequence[int], kappa_t: Sequence[int]) -> str:
    """``"s"`` if the plant is scheduled and its channel delivered, else ``"u"``.

    The channel of a scheduled plant is its rank within ``gamma_t`` sorted
    ascending (1-based).
    """
    members = sorted(gamma_t)
    if plant_index not in members:
        return "u"
    channel = members.index(plant_index)
    return "s" if kappa_t[channel] == 0 else "u"


def closed_loop_mask(model: NcsModel, plant_index: int, schedule: np.ndarray,
                     loss: np.ndarray) -> np.ndarray:
    """Boolean closed-loop indicator for one plant.

    ``schedule`` has shape ``(..., T)`` of 1-based set indices and ``loss``
    shape ``(..., M, T)``.
    """
    j = model.partition.set_of(plant_index)
    ch = model.partition.channel_of(plant_index)
    return (schedule == j) & (loss[..., ch - 1, :] == 0)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    run: int
    plant: int
    states: np.ndarray      # (T + 1, d), NaN after divergence
    closed: np.ndarray      # (T,) True where the step ran in closed loop
    norm_sq: np.ndarray     # (T + 1,)
    diverged_at: int | None = None

    @property
    def modes(self) -> list[str]:
        return ["s" if c else "u" for c in self.closed]

    @property
    def initial_mode(self) -> str:
        return "s" if self.closed[0] else "u"

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def _propagate(A_s, A_u, x0, closed, keep_states=False):
    """Batched recursion ``x(t+1) = A_{mode(t)} x(t)``.

    ``x0`` is ``(R, d)``, ``closed`` is ``(R, T)``. Returns ``(norm_sq (R, T+1),
    diverged_at (R,) with -1 for none, states or None)``.
    """
    R, T = closed.shape
    X = np.array(x0, dtype=float)
    norm_sq = np.empty((R, T + 1))
    diverged_at = np.full(R, -1, dtype=np.int64)
    states = np.empty((R, T + 1, X.shape[1])) if keep_states else None
    alive = np.ones(R, dtype=bool)
    AsT, AuT = A_s.T, A_u.T
    for t in range(T + 1):
        ns = np.einsum("ij,ij->i", X, X)
        bad = alive & ~(np.isfinite(ns) & (ns <= DIVERGENCE_LIMIT))
        if bad.any():
            diverged_at[bad] = t
            alive &= ~bad
            X[bad] = 0.0
        ns = np.where(alive, ns, np.nan)
        norm_sq[:, t] = ns
        if keep_states:
            states[:, t] = np.where(alive[:, None], X, np.nan)
        if t == T:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            X = np.where(closed[:, t, None], X @ AsT, X @ AuT)
    return norm_sq, diverged_at, states


def simulate(model: NcsModel, gamma: ScheduleLogic, kappa: DataLossSignal, x0, run: int = 0):
    """Run every plant of ``model`` under one schedule and loss signal.

    ``x0`` holds one initial state vector per plant. Returns a list of
    :class:`TrajectoryRecord`, one per plant, covering steps ``0..T``.
    """
    if gamma.horizon != kappa.horizon:
        raise StructureError(f"schedule horizon {gamma.horizon} != loss horizon {kappa.horizon}")
    if kappa.n_channels != model.network.capacity:
        raise StructureError(f"loss signal has {kappa.n_channels} channels, capacity is {model.network.capacity}")
    if len(x0) != model.N:
        raise StructureError(f"need {model.N} initial states, got {len(x0)}")
    records = []
    for plant, xi in zip(model.plants, x0):
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if xi.shape[0] != plant.state_dim:
            raise StructureError(f"plant {plant.index}: initial state has length {xi.shape[0]}, "
                                 f"expected {plant.state_dim}")
        modes = mode_matrices(plant)
        closed = closed_loop_mask(model, plant.index, gamma.assignments, kappa.channels)
        norm_sq, div, states = _propagate(modes.A_s, modes.A_u, xi[None, :], closed[None, :],
                                          keep_states=True)
        records.append(TrajectoryRecord(run, plant.index, states[0], closed, norm_sq[0],
                                        None if div[0] < 0 else int(div[0])))
    return records


@dataclass(frozen=True, eq=False)
class PlantBatch:
    """Per-plant results of a batch of runs."""

    plant: int
    norm_sq: np.ndarray       # (R, T + 1)
    closed: np.ndarray        # (R, T)
    diverged_at: np.ndarray   # (R,), -1 where the run completed


@dataclass(frozen=True, eq=False)
class BatchResult:
    config: SimulationConfig
    plants: tuple[PlantBatch, ...]
    schedules: np.ndarray     # (R, T)
    losses: np.ndarray        # (R, M, T)


def sample_initial_states(model: NcsModel, config: SimulationConfig, run: int):
    if config.x0 is not None:
        return [np.asarray(x, dtype=float).reshape(-1) for x in config.x0]
    out = []
    for plant in model.plants:
        rng = config.seed.generator("initial", run, plant.index)
        out.append(rng.uniform(-config.x0_box, config.x0_box, size=plant.state_dim))
    return out


def run_batch(model: NcsModel, config: SimulationConfig) -> BatchResult:
    """Simulate ``config.runs`` independent runs of ``config.horizon`` steps."""
    R, T, M = config.runs, config.horizon, model.network.capacity
    q = model.network.loss_probability
    schedules = np.empty((R, T), dtype=np.int64)
    losses = np.empty((R, M, T), dtype=np.uint8)
    x0 = [np.empty((R, p.state_dim)) for p in model.plants]
    if config.x0 is not None and len(config.x0) != model.N:
        raise StructureError(f"need {model.N} initial states, got {len(config.x0)}")
    for r in range(R):
        schedules[r] = generate_schedule(model.partition, T, config.seed, config.schedule_mode, run=r).assignments
        losses[r] = generate_loss_signal(q, M, T, config.seed, config.loss_mode, config.tie_channels, run=r).channels
        for k, xi in enumerate(sample_initial_states(model, config, r)):
            x0[k][r] = xi
    batches = []
    for plant, xi in zip(model.plants, x0):
        modes = mode_matrices(plant)
        closed = closed_loop_mask(model, plant.index, schedules, losses)
        norm_sq, div, _ = _propagate(modes.A_s, modes.A_u, xi, closed)
        batches.append(PlantBatch(plant.index, norm_sq, closed, div))
    return BatchResult(config, tuple(batches), schedules, losses)


@dataclass(frozen=True, eq=False)
class CostEstimate:
    """Truncated expected sum of squared norms for one plant.

    ``run_costs`` and ``run_tails`` are per completed run; ``tail_mass`` is the
    mean over runs of the sum across the final 10% of steps.
    """

    plant: int
    mean: float
    std: float
    stderr: float
    tail_mass: float
    closed_frequency: float
    runs_completed: int
    runs_diverged: int
    run_costs: np.ndarray
    run_tails: np.ndarray


def tail_length(T: int) -> int:
    return max(1, int(round(TAIL_FRACTION * T)))


def summarize(batch: BatchResult) -> list[CostEstimate]:
    T = batch.config.horizon
    k = tail_length(T)
    out = []
    for pb in batch.plants:
        ok = pb.diverged_at < 0
        ns = pb.norm_sq[ok, :T]
        costs = ns.sum(axis=1)
        tails = ns[:, T - k:].sum(axis=1)
        n = int(ok.sum())
        std = float(costs.std(ddof=1)) if n > 1 else 0.0
        out.append(CostEstimate(
            plant=pb.plant,
            mean=float(costs.mean()) if n else float("nan"),
            std=std,
            stderr=std / np.sqrt(n) if n else float("nan"),
            tail_mass=float(tails.mean()) if n else float("nan"),
            closed_frequency=float(pb.closed.mean()),
            runs_completed=n,
            runs_diverged=int((~ok).sum()),
            run_costs=costs,
            run_tails=tails,
        ))
    return out


def estimate_cost(model: NcsModel, config: SimulationConfig) -> list[CostEstimate]:
    """Monte Carlo estimate of ``E sum_{t<T} |x_i(t)|^2`` for every plant."""
    return summarize(run_batch(model, config))


def _g17(x: float) -> str:
    return "nan" if not np.isfinite(x) else format(float(x), ".17g")


def trajectories_csv(batch: BatchResult) -> str:
    """Rows ``run,t,plant,mode,norm_sq`` for every run, step ``t < T`` and plant."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "t", "plant", "mode", "norm_sq"])
    R, T = batch.schedules.shape
    for r in range(R):
        for t in range(T):
            for pb in batch.plants:
                w.writerow((r, t, pb.plant, "s" if pb.closed[r, t] else "u", _g17(pb.norm_sq[r, t])))
    return buf.getvalue()


def write_trajectories_csv(batch: BatchResult, path) -> None:
    Path(path).write_text(trajectories_csv(batch), encoding="utf-8")
