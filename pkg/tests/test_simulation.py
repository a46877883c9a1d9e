import numpy as np
import pytest

from ncs_sched.errors import StructureError
from ncs_sched.model import NcsModel, NetworkConfig, Plant, make_partition
from ncs_sched.scheduling import DataLossSignal, RngSeed, ScheduleLogic
from ncs_sched.simulation import (
    SimulationConfig,
    estimate_cost,
    resolve_mode,
    run_batch,
    simulate,
    summarize,
    tail_length,
    trajectories_csv,
)

from helpers import scalar_model


@pytest.mark.parametrize("i, gamma, kappa, mode", [
    (3, [3, 4], [0, 0], "s"),
    (4, [4, 3], [0, 1], "u"),
    (3, [4, 3], [0, 1], "s"),
    (5, [3, 4], [0, 0], "u"),
    (5, [5], [1, 0], "u"),
])
def test_resolve_mode(i, gamma, kappa, mode):
    assert resolve_mode(i, gamma, kappa) == mode


def test_zero_initial_state_has_zero_cost():
    cfg = SimulationConfig(horizon=50, runs=5, seed=1, x0=([0.0], [0.0]))
    for e in estimate_cost(scalar_model(), cfg):
        assert e.mean == 0.0 and e.tail_mass == 0.0


def test_zero_box_has_zero_cost():
    cfg = SimulationConfig(horizon=50, runs=5, seed=1, x0_box=0.0)
    assert all(e.mean == 0.0 for e in estimate_cost(scalar_model(), cfg))


def test_single_plant_deterministic_recursion():
    A = np.array([[0.0, 1.0], [-0.5, 0.0]])
    model = NcsModel((Plant(1, A, [[0.0], [1.0]], [[0.0, 0.0]]),), NetworkConfig(1, 0.0),
                     make_partition([[1]], [1.0]), check=False)
    gamma = ScheduleLogic(np.ones(6, dtype=np.int64))
    kappa = DataLossSignal(np.zeros((1, 6), dtype=np.uint8))
    (rec,) = simulate(model, gamma, kappa, [[1.0, 2.0]])
    x = np.array([1.0, 2.0])
    for t in range(7):
        np.testing.assert_array_equal(rec.states[t], x)
        x = A @ x
    assert rec.modes == ["s"] * 6


def test_scalar_states_follow_modes():
    model = scalar_model()
    gamma = ScheduleLogic(np.array([2, 1], dtype=np.int64))
    kappa = DataLossSignal(np.zeros((1, 2), dtype=np.uint8))
    rec = simulate(model, gamma, kappa, [[1.0], [1.0]])[0]
    np.testing.assert_allclose(rec.states[:, 0], [1.0, 1.2, 0.6])
    assert rec.modes == ["u", "s"] and rec.initial_mode == "u"
    np.testing.assert_allclose(rec.norm_sq, [1.0, 1.44, 0.36])


def test_lost_packet_runs_open_loop():
    model = scalar_model()
    gamma = ScheduleLogic(np.array([1], dtype=np.int64))
    kappa = DataLossSignal(np.ones((1, 1), dtype=np.uint8))
    rec = simulate(model, gamma, kappa, [[1.0], [1.0]])[0]
    assert rec.modes == ["u"]
    assert rec.states[1, 0] == pytest.approx(1.2)


def test_simulate_rejects_mismatched_inputs():
    model = scalar_model()
    with pytest.raises(StructureError):
        simulate(model, ScheduleLogic(np.ones(3, dtype=np.int64)),
                 DataLossSignal(np.zeros((1, 2), dtype=np.uint8)), [[1.0], [1.0]])
    with pytest.raises(StructureError):
        simulate(model, ScheduleLogic(np.ones(2, dtype=np.int64)),
                 DataLossSignal(np.zeros((1, 2), dtype=np.uint8)), [[1.0]])


def test_closed_frequency_matches_mode_law(example1):
    cfg = SimulationConfig(horizon=1000, runs=100, seed=7)
    est = summarize(run_batch(example1.model, cfg))
    for e, expected in zip(est, (0.42, 0.28)):
        sigma = np.sqrt(expected * (1 - expected) / (cfg.runs * cfg.horizon))
        assert abs(e.closed_frequency - expected) < 3 * sigma


def test_random_scalar_costs_within_four_standard_errors():
    rng = np.random.default_rng(99)
    T, R = 100, 400
    checked = 0
    while checked < 50:
        a_s, a_u = rng.uniform(-0.9, 0.9), rng.uniform(-1.5, 1.5)
        p, q = rng.uniform(0.1, 0.9), rng.uniform(0.0, 0.5)
        pi_s = p * (1 - q)
        L = pi_s * a_s ** 2 + (1 - pi_s) * a_u ** 2
        if L >= 0.9:
            continue
        checked += 1
        cfg = SimulationConfig(horizon=T, runs=R, seed=checked, x0=([1.0], [1.0]))
        e = estimate_cost(scalar_model(a_u, a_s, p, q), cfg)[0]
        exact = (1 - L ** T) / (1 - L)
        assert abs(e.mean - exact) <= 4 * e.stderr + 1e-12, (a_s, a_u, p, q)


def test_tail_mass_bounded_by_total(example2):
    cfg = SimulationConfig(horizon=200, runs=20, seed=3)
    for e in estimate_cost(example2.model, cfg):
        assert np.all(e.run_tails <= e.run_costs)
        assert 0 <= e.tail_mass <= e.mean


def test_tail_length():
    assert tail_length(1000) == 100
    assert tail_length(3) == 1


def test_batch_is_deterministic(example1):
    cfg = SimulationConfig(horizon=60, runs=4, seed=21)
    a, b = run_batch(example1.model, cfg), run_batch(example1.model, cfg)
    assert trajectories_csv(a) == trajectories_csv(b)
    c = run_batch(example1.model, SimulationConfig(horizon=60, runs=4, seed=22))
    assert trajectories_csv(a) != trajectories_csv(c)


def test_trajectories_csv_layout(example1):
    text = trajectories_csv(run_batch(example1.model, SimulationConfig(horizon=3, runs=2, seed=0)))
    lines = text.splitlines()
    assert lines[0] == "run,t,plant,mode,norm_sq"
    assert len(lines) == 1 + 2 * 3 * 2
    assert lines[1].startswith("0,0,1,") and lines[-1].startswith("1,2,2,")


def test_divergence_is_flagged():
    model = scalar_model(a_u=1e30, a_s=2e30, p=0.05)
    cfg = SimulationConfig(horizon=40, runs=10, seed=5, x0=([1.0], [1.0]))
    batch = run_batch(model, cfg)
    pb = batch.plants[0]
    assert np.all(pb.diverged_at > 0)
    first = pb.diverged_at[0]
    assert np.isnan(pb.norm_sq[0, first:]).all()
    e = summarize(batch)[0]
    assert e.runs_diverged == 10 and e.runs_completed == 0 and np.isnan(e.mean)


def test_config_validation():
    with pytest.raises(StructureError):
        SimulationConfig(runs=0)
    with pytest.raises(StructureError):
        SimulationConfig(horizon=0)
    with pytest.raises(StructureError):
        SimulationConfig(schedule_mode="fixed")
    assert isinstance(SimulationConfig(seed=4).seed, RngSeed)
