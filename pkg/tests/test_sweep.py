from math import comb

import pytest

from ncs_sched.errors import StructureError
from ncs_sched.model import ModeProbabilities, mode_matrices, validate_partition
from ncs_sched.stability import second_moment_lift
from ncs_sched.sweep import compositions, entry_partition, set_partitions, sweep


@pytest.mark.parametrize("N, M, count", [
    (4, 4, 15),   # Bell number B_4
    (5, 2, 26),   # involutions of 5 elements
    (3, 1, 1),
    (6, 3, 166),  # B_6 = 203 minus 30 + 6 + 1 with a block of 4, 5 or 6
])
def test_set_partition_counts(N, M, count):
    parts = list(set_partitions(N, M))
    assert len(parts) == count
    assert len(set(parts)) == count
    for p in parts:
        assert sorted(i for b in p for i in b) == list(range(1, N + 1))
        assert all(len(b) <= M for b in p)


@pytest.mark.parametrize("total, parts", [(10, 3), (10, 1), (5, 5), (4, 6)])
def test_composition_counts(total, parts):
    comps = list(compositions(total, parts))
    assert len(comps) == (comb(total - 1, parts - 1) if parts <= total else 0)
    assert all(sum(c) == total and min(c) >= 1 for c in comps)


def test_sweep_matches_direct_radius_scan(example1):
    model = example1.model
    feasible, evaluated = sweep(model, grid_step=0.1)
    assert evaluated == 9
    expected = []
    for k in range(1, 10):
        p = (k / 10, 1 - k / 10)
        r = [second_moment_lift(mode_matrices(model.plant(i)),
                                ModeProbabilities.closed(round(p[i - 1] * 10) / 10 * 0.7)).radius
             for i in (1, 2)]
        if max(r) < 1 - 1e-9:
            expected.append(k)
    assert [round(e.probabilities[0] * 10) for e in feasible] == expected
    assert 6 in expected
    for e in feasible:
        assert validate_partition(entry_partition(e), 2, 1).ok


def test_sweep_limits(example1):
    with pytest.raises(StructureError):
        sweep(example1.model, grid_step=0.01)
    with pytest.raises(StructureError):
        sweep(example1.model, grid_step=0.3)
