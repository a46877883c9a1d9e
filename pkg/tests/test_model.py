import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncs_sched.errors import MissingGainError, PartitionError, StructureError
from ncs_sched.model import (
    ModeProbabilities,
    NcsModel,
    NetworkConfig,
    Plant,
    check_assumption,
    lossless_mode_probabilities,
    make_partition,
    mode_matrices,
    mode_probabilities,
    validate_partition,
)

from printed_values import A2, B2, K2


@pytest.mark.parametrize("sets, p, N, M, labels", [
    ([[1], [2]], [0.6, 0.4], 2, 1, ()),
    ([[1, 2], [3, 4], [5]], [0.3, 0.3, 0.4], 5, 2, ()),
    ([[1], [1, 2]], [0.5, 0.5], 2, 2, ("C2",)),
    ([[1], [2]], [0.5, 0.4], 2, 1, ("C4",)),
    ([[1, 2], [3]], [0.5, 0.5], 3, 1, ("C1",)),
    ([[1], [2]], [0.5, 0.5], 3, 1, ("C3",)),
    ([[1, 2, 3]], [1.0], 3, 3, ("C4",)),
])
def test_validate_partition(sets, p, N, M, labels):
    assert validate_partition(make_partition(sets, p), N, M).labels == labels


def test_open_interval_violation_has_distinct_message():
    rep = validate_partition(make_partition([[1], [2]], [1.0, 0.0]), 2, 1)
    assert rep.labels == ("C4",)
    assert any("open interval" in v.message for v in rep.violations)


@pytest.mark.parametrize("sets", [[[0], [1]], [[1], [-2]]])
def test_non_positive_index_is_structural(sets):
    with pytest.raises(StructureError):
        make_partition(sets, [0.5, 0.5])


def test_out_of_range_index_is_structural():
    with pytest.raises(StructureError):
        validate_partition(make_partition([[1], [3]], [0.5, 0.5]), 2, 1)


def test_empty_set_rejected():
    with pytest.raises(StructureError):
        make_partition([[1, 2], []], [0.5, 0.5])


@settings(max_examples=60, deadline=None)
@given(st.permutations(list(range(5))), st.data())
def test_validate_partition_is_permutation_invariant(order, data):
    sets = [[1, 2], [3], [4, 5], [2], [6]]
    probs = data.draw(st.lists(st.floats(0.01, 0.9), min_size=5, max_size=5))
    base = validate_partition(make_partition(sets, probs), 6, 2)
    perm = validate_partition(make_partition([sets[k] for k in order], [probs[k] for k in order]), 6, 2)
    assert base.labels == perm.labels


def test_check_assumption_example1_plant2():
    rep = check_assumption(Plant(2, A2, B2, K2))
    oracle = 1.0123 + math.sqrt(0.0502 * 0.4920)
    assert rep.open_loop_unstable
    assert rep.open_loop_radius == pytest.approx(oracle, abs=1e-12)
    assert rep.closed_loop_schur
    assert rep.holds


def test_check_assumption_stable_open_loop():
    rep = check_assumption(Plant(1, 0.5 * np.eye(2), np.eye(2), np.zeros((2, 2))))
    assert not rep.open_loop_unstable
    assert rep.closed_loop_schur


def test_check_assumption_needs_gain():
    with pytest.raises(MissingGainError, match="synthesis"):
        check_assumption(Plant(1, np.eye(2), np.eye(2)))


def test_mode_matrices_example1_plant2():
    modes = mode_matrices(Plant(2, A2, B2, K2))
    # hand arithmetic: 1.0123 + 0.0123*(-7.4787), 0.0502 + 0.0123*(-2.2188), ...
    expected = np.array([[0.9203, 0.0229], [-3.1875, -0.0794]])
    np.testing.assert_allclose(modes.A_s, expected, atol=5e-4)
    assert modes.A_u is not None and np.array_equal(modes.A_u, A2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_zero_gain_modes_are_bit_identical(d, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-2, 2, (d, d))
    modes = mode_matrices(Plant(1, A, rng.uniform(-2, 2, (d, m)), np.zeros((m, d))))
    assert np.array_equal(modes.A_s, A) and np.array_equal(modes.A_u, A)


def test_zero_input_matrix_ignores_gain():
    A = np.array([[1.1, 0.3], [0.0, 0.9]])
    modes = mode_matrices(Plant(1, A, np.zeros((2, 1)), [[5.0, -3.0]]))
    assert np.array_equal(modes.A_s, A)


@pytest.mark.parametrize("p, q, expected", [
    (0.6, 0.3, (0.42, 0.58)),
    (0.4, 0.4, (0.24, 0.76)),
    (0.6, 0.0, (0.6, 0.4)),
])
def test_mode_probabilities(p, q, expected):
    part = make_partition([[1], [2]], [p, 1 - p])
    mp = mode_probabilities(part, 1, q)
    assert mp.pi_s == pytest.approx(expected[0], abs=1e-15)
    assert mp.pi_u == pytest.approx(expected[1], abs=1e-15)


def test_mode_probabilities_lossless_matches_direct_weights():
    part = make_partition([[1], [2]], [0.6, 0.4])
    assert mode_probabilities(part, 1, 0.0) == lossless_mode_probabilities(0.6)


def test_mode_probabilities_absent_plant():
    with pytest.raises(StructureError):
        mode_probabilities(make_partition([[1], [2]], [0.5, 0.5]), 3, 0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.0, 0.999))
def test_mode_probabilities_sum_to_one(p, q):
    mp = mode_probabilities(make_partition([[1], [2]], [p, 1 - p]), 1, q)
    assert mp.pi_s + mp.pi_u == 1.0
    assert mp.pi_u == 1.0 - mp.pi_s


def test_transition_matrix_rows_identical():
    T = ModeProbabilities.closed(0.42).transition_matrix()
    assert np.array_equal(T[0], T[1])


@pytest.mark.parametrize("A, B, K", [
    ([[1, 2]], [[1]], None),
    ([[1, 0], [0, 1]], [[1]], None),
    ([[1, 0], [0, 1]], [[1], [0]], [[1, 2, 3]]),
])
def test_plant_shape_errors(A, B, K):
    with pytest.raises(StructureError):
        Plant(1, A, B, K)


def test_model_checks_capacity_and_partition():
    plants = (Plant(1, [[1.1]], [[1.0]]), Plant(2, [[1.1]], [[1.0]]))
    with pytest.raises(StructureError, match="0 < M < N"):
        NcsModel(plants, NetworkConfig(2, 0.1), make_partition([[1, 2]], [1.0]))
    with pytest.raises(PartitionError) as info:
        NcsModel(plants, NetworkConfig(1, 0.1), make_partition([[1], [2]], [0.7, 0.7]))
    assert info.value.report.labels == ("C4",)


def test_network_rejects_bad_loss_probability():
    with pytest.raises(StructureError):
        NetworkConfig(1, 1.0)
    with pytest.raises(StructureError):
        NetworkConfig(0, 0.1)


def test_channel_of_uses_sorted_rank():
    part = make_partition([[4, 3], [1, 2]], [0.5, 0.5])
    assert part.channel_of(3) == 1
    assert part.channel_of(4) == 2
