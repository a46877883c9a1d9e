"""SVG figures: squared-norm trajectories, schedules and loss signals."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed hash salt and no date stamp keep SVG output stable between runs
matplotlib.rcParams["svg.hashsalt"] = "ncs_sched"
_SVG_META = {"Date": None, "Creator": "ncs_sched"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_norms(norm_sq: np.ndarray, plant: int, path, max_runs: int = 100) -> None:
    """``norm_sq`` is ``(runs, T + 1)``; one line per run on a log axis."""
    fig, ax = plt.subplots(figsize=(8, 5))
    t = np.arange(norm_sq.shape[1])
    for row in norm_sq[:max_runs]:
        ax.plot(t, np.where(row > 0, row, np.nan), lw=0.6, alpha=0.7)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(f"|x_{plant}(t)|^2")
    ax.set_title(f"plant {plant}")
    ax.grid(True, which="major", alpha=0.3)
    _save(fig, path)


def plot_schedule(assignments: np.ndarray, sets, path) -> None:
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.step(np.arange(len(assignments)), assignments, where="post", lw=0.8)
    ax.set_yticks(range(1, len(sets) + 1))
    ax.set_yticklabels(["{" + ",".join(map(str, s)) + "}" for s in sets])
    ax.set_xlabel("t")
    ax.set_ylabel("scheduled set")
    _save(fig, path)


def plot_loss(channels: np.ndarray, path) -> None:
    M = channels.shape[0]
    fig, axes = plt.subplots(M, 1, figsize=(8, 1.6 * M + 1), sharex=True, squeeze=False)
    for m, ax in enumerate(axes[:, 0]):
        ax.step(np.arange(channels.shape[1]), channels[m], where="post", lw=0.8)
        ax.set_ylim(-0.1, 1.1)
        ax.set_yticks([0, 1])
        ax.set_ylabel(f"channel {m + 1}")
    axes[-1, 0].set_xlabel("t")
    _save(fig, path)
