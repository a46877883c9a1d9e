"""Command line entry point ``ncs``.

    ncs analyze    --config cfg.json [--out DIR]
    ncs synthesize --config cfg.json [--out DIR]
    ncs schedule   --config cfg.json [--out DIR] [--seed S] [--horizon T]
    ncs simulate   --config cfg.json [--out DIR] [--seed S] [--runs R] [--horizon T]
    ncs sweep      --config cfg.json [--out DIR] [--grid-step 0.1]

Exit status is 0 when every requested verdict is positive, 1 when a verdict
is negative (an unstable plant, a diverged run, no feasible partition) and 2
on errors. Files written before an error are removed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import ExperimentConfig, config_to_data, parse_config
from .errors import ConfigError, MissingGainError, NcsError, PlantError, StructureError
from .report import certificate_report, cost_report, write_json
from .scheduling import RngSeed, generate_loss_signal, generate_schedule, write_loss_csv, write_schedule_csv
from .simulation import run_batch, summarize, write_trajectories_csv
from .stability import analyze_ncs
from .sweep import sweep
from .synthesis import synthesize_model

log = logging.getLogger("ncs")

COMMANDS = ("analyze", "synthesize", "schedule", "simulate", "sweep")


class _Outputs:
    def __init__(self, out: Path):
        self.out = out
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        self.written.append(p)
        return p

    def discard(self):
        for p in self.written:
            p.unlink(missing_ok=True)


def _threads() -> int:
    raw = os.environ.get("NCS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError("NCS_THREADS", f"expected a positive integer, got {raw!r}") from None


def _analyze(model):
    n = _threads()
    if n == 1:
        return analyze_ncs(model)
    with ThreadPoolExecutor(max_workers=n) as pool:
        return analyze_ncs(model, executor=pool)


def _require_gains(model):
    missing = [p.index for p in model.plants if not p.has_gain]
    if missing:
        raise MissingGainError(f"plants {missing} have no gain K; run `ncs synthesize` first")


def cmd_analyze(cfg: ExperimentConfig, out: _Outputs, args) -> int:
    _require_gains(cfg.model)
    analysis = _analyze(cfg.model)
    write_json(certificate_report(cfg.model, analysis, cfg.simulation.seed.seed), out.path("certificate.json"))
    for pv in analysis.plants:
        log.info("plant %d: pi_s=%.6g radius=%.6g %s", pv.plant, pv.probs.pi_s, pv.radius,
                 "stable" if pv.stable else "NOT stable")
    return 0 if analysis.stable else 1


def cmd_synthesize(cfg: ExperimentConfig, out: _Outputs, args) -> int:
    model, results = synthesize_model(cfg.model, cfg.beta_schedule, overwrite=args.overwrite)
    for idx, res in results.items():
        log.info("plant %d: %s (radius %.6g)", idx, res.method, res.radius)
    new_cfg = replace(cfg, model=model)
    write_json(config_to_data(new_cfg), out.path("model.json"))
    analysis = _analyze(model)
    write_json(certificate_report(model, analysis, cfg.simulation.seed.seed, results),
               out.path("certificate.json"))
    ok = analysis.stable and all(r.verified for r in results.values())
    return 0 if ok else 1


def cmd_schedule(cfg: ExperimentConfig, out: _Outputs, args) -> int:
    from .plots import plot_loss, plot_schedule

    sim, model = cfg.simulation, cfg.model
    gamma = generate_schedule(model.partition, sim.horizon, sim.seed, sim.schedule_mode)
    kappa = generate_loss_signal(model.network.loss_probability, model.network.capacity, sim.horizon,
                                 sim.seed, sim.loss_mode, sim.tie_channels)
    write_schedule_csv(gamma, out.path("schedule.csv"))
    write_loss_csv(kappa, out.path("loss.csv"))
    plot_schedule(gamma.assignments, model.partition.sets, out.path("schedule.svg"))
    plot_loss(kappa.channels, out.path("loss.svg"))
    return 0


def cmd_simulate(cfg: ExperimentConfig, out: _Outputs, args) -> int:
    from .plots import plot_norms

    _require_gains(cfg.model)
    batch = run_batch(cfg.model, cfg.simulation)
    estimates = summarize(batch)
    write_trajectories_csv(batch, out.path("trajectories.csv"))
    write_json(cost_report(estimates, cfg.simulation, cfg.model), out.path("cost.json"))
    for pb in batch.plants:
        plot_norms(pb.norm_sq, pb.plant, out.path(f"plant_{pb.plant}.svg"))
    for e in estimates:
        log.info("plant %d: mean cost %.6g (+/- %.3g), closed-loop frequency %.4f, diverged %d",
                 e.plant, e.mean, e.stderr, e.closed_frequency, e.runs_diverged)
    return 0 if all(e.runs_diverged == 0 for e in estimates) else 1


def cmd_sweep(cfg: ExperimentConfig, out: _Outputs, args) -> int:
    feasible, evaluated = sweep(cfg.model, args.grid_step)
    write_json({
        "capacity": cfg.model.network.capacity,
        "loss_probability": cfg.model.network.loss_probability,
        "grid_step": args.grid_step,
        "evaluated": evaluated,
        "feasible_count": len(feasible),
        "feasible": [
            {"sets": [list(s) for s in e.sets], "probabilities": list(e.probabilities),
             "radii": list(e.radii), "max_radius": e.max_radius}
            for e in feasible
        ],
    }, out.path("sweep.json"))
    log.info("%d of %d (partition, probability) pairs feasible", len(feasible), evaluated)
    return 0 if feasible else 1


HANDLERS = {
    "analyze": cmd_analyze,
    "synthesize": cmd_synthesize,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncs", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="experiment JSON file")
    parser.add_argument("--out", type=Path, default=Path("ncs_out"), help="output directory")
    parser.add_argument("--seed", type=int, help="override simulation.seed")
    parser.add_argument("--runs", type=int, help="override simulation.runs")
    parser.add_argument("--horizon", type=int, help="override simulation.horizon")
    parser.add_argument("--grid-step", type=float, default=0.1, help="probability grid step for sweep")
    parser.add_argument("--overwrite", action="store_true", help="synthesize: replace existing gains too")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    kw = {}
    if args.seed is not None:
        kw["seed"] = RngSeed(args.seed)
    if args.runs is not None:
        kw["runs"] = args.runs
    if args.horizon is not None:
        kw["horizon"] = args.horizon
    if not kw:
        return cfg
    try:
        return replace(cfg, simulation=replace(cfg.simulation, **kw))
    except StructureError as exc:
        raise ConfigError("simulation", str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    out = _Outputs(args.out)
    try:
        cfg = _apply_overrides(parse_config(args.config), args)
        return HANDLERS[args.command](cfg, out, args)
    except (NcsError, PlantError) as exc:
        out.discard()
        print(f"ncs {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
