"""Deterministic JSON reports.

Floats are written with 17 significant digits and keys keep insertion order,
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from . import __version__
from .model import NcsModel, mode_matrices
from .scheduling import PRNG_ALGORITHM
from .stability import NcsAnalysis, verify_certificate

_MARK = "\x00f:"
_MARK_RE = re.compile(r'"\\u0000f:([^"]*)"')


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _prepare(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return _MARK + format(x, ".17g")
    return obj


def dumps(obj) -> str:
    """JSON text with every float rendered as ``%.17g``; NaN/inf become ``null``."""
    text = json.dumps(_prepare(obj), indent=2, ensure_ascii=True)
    # '%.17g' output ('3', '1.5e-05', ...) is already a valid JSON number
    return _MARK_RE.sub(lambda m: m.group(1), text) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def certificate_report(model: NcsModel, analysis: NcsAnalysis, seed: int | None = None,
                       synthesis: dict | None = None) -> dict:
    """Per-plant certificate data plus the overall verdict."""
    synthesis = synthesis or {}
    plants = []
    for pv in analysis.plants:
        cert = pv.certificate
        entry = {
            "plant": pv.plant,
            "set_index": model.partition.set_of(pv.plant),
            "pi_s": pv.probs.pi_s,
            "pi_u": pv.probs.pi_u,
            "second_moment_radius": pv.radius,
            "stable": pv.stable,
            "marginal": pv.verdict.marginal,
            "K": model.plant(pv.plant).K,
            "P_s": cert.P_s if cert is not None else None,
            "P_u": cert.P_u if cert is not None else None,
            "P_hat": cert.P_hat if cert is not None else None,
            "residual_s": cert.residual_s if cert is not None else None,
            "residual_u": cert.residual_u if cert is not None else None,
            "synthesis_method": None,
        }
        if pv.plant in synthesis:
            res = synthesis[pv.plant]
            entry["synthesis_method"] = res.method
            entry["synthesis_verified"] = res.verified
        plants.append(entry)
    return {
        "tool": "ncs_sched",
        "version": __version__,
        "seed": seed,
        "prng": PRNG_ALGORITHM,
        "loss_probability": model.network.loss_probability,
        "capacity": model.network.capacity,
        "stable": analysis.stable,
        "plants": plants,
    }


def verify_report(report: dict, model: NcsModel) -> list[bool]:
    """Re-check each plant's ``P_s, P_u`` from a report against ``model``.

    Plants reported unstable carry no matrices and re-verify as ``False``.
    """
    out = []
    for entry in report["plants"]:
        plant = model.plant(entry["plant"])
        if entry.get("P_s") is None:
            out.append(False)
            continue
        modes = mode_matrices(plant)
        probs = model.mode_probabilities(plant.index)
        check = verify_certificate(modes, probs, np.array(entry["P_s"]), np.array(entry["P_u"]))
        out.append(check.valid)
    return out


def cost_report(estimates, config, model: NcsModel) -> dict:
    return {
        "tool": "ncs_sched",
        "version": __version__,
        "seed": config.seed.seed,
        "prng": PRNG_ALGORITHM,
        "horizon": config.horizon,
        "runs": config.runs,
        "schedule_mode": config.schedule_mode,
        "loss_mode": config.loss_mode,
        "tie_channels": config.tie_channels,
        "plants": [
            {
                "plant": e.plant,
                "expected_closed_frequency": model.mode_probabilities(e.plant).pi_s,
                "closed_frequency": e.closed_frequency,
                "mean_cost": e.mean,
                "std_cost": e.std,
                "stderr_cost": e.stderr,
                "tail_mass": e.tail_mass,
                "runs_completed": e.runs_completed,
                "runs_diverged": e.runs_diverged,
            }
            for e in estimates
        ],
    }
