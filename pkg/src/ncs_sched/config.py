"""JSON experiment configuration: strict parsing with path-qualified errors.

Schema::

    {
      "plants": [{"A": [[...]], "B": [[...]], "K": [[...]]}, ...],   # K optional
      "network": {"capacity": 1, "loss_probability": 0.3},
      "partition": {"sets": [[1], [2]], "probabilities": [0.6, 0.4]},
      "simulation": {"horizon": 1000, "runs": 100, "seed": 0,
                     "schedule_mode": "iid", "loss_mode": "iid",
                     "tie_channels": false, "x0_box": 1.0},           # optional
      "synthesis": {"beta_schedule": [1, 10, 100, 1000]}             # optional
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError, NcsError, PartitionError, StructureError
from .model import NcsModel, NetworkConfig, Partition, Plant, validate_partition
from .scheduling import SCHEDULE_MODES, RngSeed
from .simulation import SimulationConfig
from .synthesis import DEFAULT_BETAS

TOP_KEYS = ("plants", "network", "partition", "simulation", "synthesis")
PLANT_KEYS = ("A", "B", "K")
NETWORK_KEYS = ("capacity", "loss_probability")
PARTITION_KEYS = ("sets", "probabilities")
SIMULATION_KEYS = ("horizon", "runs", "seed", "schedule_mode", "loss_mode", "tie_channels", "x0_box")
SYNTHESIS_KEYS = ("beta_schedule",)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: NcsModel
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    beta_schedule: tuple[float, ...] = DEFAULT_BETAS
    source: Path | None = None


def _obj(value, path, allowed, required=()):
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    for key in value:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")
    for key in required:
        if key not in value:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    return value


def _int(value, path, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(path, f"must be >= {lo}, got {value}")
    return value


def _float(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _matrix(value, path):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(path, "expected a non-empty list of rows")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width or width == 0:
            raise ConfigError(f"{path}[{i}]", f"row length {len(row)} differs from {width}")
        for j, x in enumerate(row):
            _float(x, f"{path}[{i}][{j}]")
    return value


def _plant(k, raw):
    path = f"plants[{k - 1}]"
    _obj(raw, path, PLANT_KEYS, ("A", "B"))
    A = _matrix(raw["A"], f"{path}.A")
    B = _matrix(raw["B"], f"{path}.B")
    K = _matrix(raw["K"], f"{path}.K") if raw.get("K") is not None else None
    if len(A) != len(A[0]):
        raise ConfigError(f"{path}.A", f"not square ({len(A)}x{len(A[0])})")
    if len(B) != len(A):
        raise ConfigError(f"{path}.B", f"row count mismatch ({len(B)} rows, state dimension {len(A)})")
    if K is not None and (len(K) != len(B[0]) or len(K[0]) != len(A)):
        raise ConfigError(f"{path}.K", f"shape {len(K)}x{len(K[0])}, expected {len(B[0])}x{len(A)}")
    try:
        return Plant(k, A, B, K)
    except StructureError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_simulation(raw, base: SimulationConfig | None = None) -> SimulationConfig:
    base = base or SimulationConfig()
    if raw is None:
        return base
    _obj(raw, "simulation", SIMULATION_KEYS)
    kw = {}
    if "horizon" in raw:
        kw["horizon"] = _int(raw["horizon"], "simulation.horizon", 1)
    if "runs" in raw:
        kw["runs"] = _int(raw["runs"], "simulation.runs", 1)
    if "seed" in raw:
        seed = _int(raw["seed"], "simulation.seed", 0)
        if seed >= 2**64:
            raise ConfigError("simulation.seed", "must fit in 64 bits")
        kw["seed"] = RngSeed(seed)
    for key in ("schedule_mode", "loss_mode"):
        if key in raw:
            if raw[key] not in SCHEDULE_MODES:
                raise ConfigError(f"simulation.{key}", f"must be one of {list(SCHEDULE_MODES)}")
            kw[key] = raw[key]
    if "tie_channels" in raw:
        if not isinstance(raw["tie_channels"], bool):
            raise ConfigError("simulation.tie_channels", "expected true or false")
        kw["tie_channels"] = raw["tie_channels"]
    if "x0_box" in raw:
        box = _float(raw["x0_box"], "simulation.x0_box")
        if box < 0:
            raise ConfigError("simulation.x0_box", "must be non-negative")
        kw["x0_box"] = box
    return replace(base, **kw)


def parse_config_data(data, source=None) -> ExperimentConfig:
    _obj(data, "", TOP_KEYS, ("plants", "network", "partition"))
    if not isinstance(data["plants"], list) or not data["plants"]:
        raise ConfigError("plants", "expected a non-empty array")
    plants = [_plant(k, raw) for k, raw in enumerate(data["plants"], start=1)]
    N = len(plants)

    net = _obj(data["network"], "network", NETWORK_KEYS, NETWORK_KEYS)
    M = _int(net["capacity"], "network.capacity")
    q = _float(net["loss_probability"], "network.loss_probability")
    if not (0 < M < N):
        raise ConfigError("network.capacity", f"0 < M < N violated (M={M}, N={N})")
    if not (0.0 <= q < 1.0):
        raise ConfigError("network.loss_probability", f"must lie in [0, 1), got {q}")

    part = _obj(data["partition"], "partition", PARTITION_KEYS, PARTITION_KEYS)
    sets, probs = part["sets"], part["probabilities"]
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise ConfigError("partition.sets", "expected a list of lists of plant indices")
    for j, s in enumerate(sets):
        for k, i in enumerate(s):
            _int(i, f"partition.sets[{j}][{k}]", 1)
    if not isinstance(probs, list):
        raise ConfigError("partition.probabilities", "expected a list of numbers")
    probs = [_float(p, f"partition.probabilities[{j}]") for j, p in enumerate(probs)]
    try:
        partition = Partition(tuple(tuple(s) for s in sets), tuple(probs))
        report = validate_partition(partition, N, M)
    except StructureError as exc:
        raise ConfigError("partition", str(exc)) from None
    if not report.ok:
        for label, where in (("C1", "partition.sets"), ("C2", "partition.sets"), ("C3", "partition.sets"),
                             ("C4", "partition.probabilities")):
            if label in report.labels:
                raise ConfigError(where, str(report))

    try:
        model = NcsModel(tuple(plants), NetworkConfig(M, q), partition)
    except (StructureError, PartitionError) as exc:
        raise ConfigError("", str(exc)) from None

    sim = parse_simulation(data.get("simulation"))
    betas = DEFAULT_BETAS
    if data.get("synthesis") is not None:
        syn = _obj(data["synthesis"], "synthesis", SYNTHESIS_KEYS)
        if "beta_schedule" in syn:
            raw = syn["beta_schedule"]
            if not isinstance(raw, list) or not raw:
                raise ConfigError("synthesis.beta_schedule", "expected a non-empty list of positive numbers")
            betas = tuple(_float(b, f"synthesis.beta_schedule[{k}]") for k, b in enumerate(raw))
            if any(b <= 0 for b in betas):
                raise ConfigError("synthesis.beta_schedule", "entries must be positive")
    return ExperimentConfig(model, sim, betas, source)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("", f"config file {path} not found") from None
    except UnicodeDecodeError as exc:
        raise ConfigError("", f"config file is not UTF-8: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return parse_config_data(data, path)


def config_to_data(cfg: ExperimentConfig) -> dict:
    """Inverse of :func:`parse_config_data`; gains are included where present."""
    m = cfg.model
    plants = []
    for p in m.plants:
        d = {"A": p.A.tolist(), "B": p.B.tolist()}
        if p.K is not None:
            d["K"] = p.K.tolist()
        plants.append(d)
    s = cfg.simulation
    return {
        "plants": plants,
        "network": {"capacity": m.network.capacity, "loss_probability": m.network.loss_probability},
        "partition": {"sets": [list(x) for x in m.partition.sets],
                      "probabilities": list(m.partition.probabilities)},
        "simulation": {"horizon": s.horizon, "runs": s.runs, "seed": s.seed.seed,
                       "schedule_mode": s.schedule_mode, "loss_mode": s.loss_mode,
                       "tie_channels": s.tie_channels, "x0_box": s.x0_box},
        "synthesis": {"beta_schedule": list(cfg.beta_schedule)},
    }


def load_example(number: int) -> ExperimentConfig:
    """Bundled worked-example configurations: 1, 2 (printed gains) or "2_plants" (no gains)."""
    path = Path(__file__).parent / "data" / f"example{number}.json"
    if not path.exists():
        raise NcsError(f"no bundled example {number}")
    return parse_config(path)
