import numpy as np
import pytest

import oracles
from quartile_shift.shift_table import (
    TwoSample,
    build_table,
    canonicalize_sorted,
    change_points,
    mann_whitney_count,
    trajectory,
)


def test_table2(radiation_data):
    assert tuple(build_table(radiation_data, 8.69)) == (6, 2, 3, 5)
    assert tuple(build_table(radiation_data, 8.7)) == (6, 2, 4, 4)


def test_extreme_tables(radiation_data):
    # far left every treated value is above every control
    assert tuple(build_table(radiation_data, -1e6)) == (0, 5, 6, 5)
    assert tuple(build_table(radiation_data, 1e6)) == (6, 6, 4, 0)


def test_right_continuity_at_breakpoint(radiation_data):
    # 8.7 is a difference of the data: the breakpoint belongs to the right segment
    traj = change_points(radiation_data)
    assert tuple(traj.counts_at(8.7)) == tuple(build_table(radiation_data, 8.7))
    assert tuple(traj.counts_at(8.69999)) == tuple(build_table(radiation_data, 8.69999))


def test_routes_agree_on_radiation_data(radiation_data):
    sweep = trajectory(radiation_data, "sweep")
    scratch = trajectory(radiation_data, "scratch")
    np.testing.assert_array_equal(sweep.breakpoints, scratch.breakpoints)
    np.testing.assert_array_equal(sweep.counts, scratch.counts)
    assert sweep.breakpoints.size == 99
    cp = change_points(radiation_data)
    comp = sweep.compress()
    np.testing.assert_array_equal(cp.breakpoints, comp.breakpoints)
    np.testing.assert_array_equal(cp.counts, comp.counts)


def test_matches_pooled_sort_oracle(rng):
    for _ in range(50):
        m, n = rng.integers(1, 8, 2)
        if m + n < 4:
            continue
        x = rng.integers(0, 10, m).astype(float)
        y = rng.integers(0, 10, n).astype(float)
        data = TwoSample(x, y)
        traj = change_points(data)
        for d in oracles.integer_grid(x, y):
            assert tuple(traj.counts_at(d)) == oracles.table_by_sort(x, y, d)


def test_counts_always_sum_to_n(rng):
    data = TwoSample(rng.standard_normal(30), rng.standard_normal(19))
    traj = trajectory(data)
    assert np.all(traj.counts.sum(axis=1) == 19)
    assert np.all((traj.counts >= 0) & (traj.counts <= np.array(data.design.k)))


def test_canonicalize_collapses_rounding_noise():
    v = np.sort(np.array([8.7, 8.7 + 1e-15, 8.700000000000001, 9.0]))
    out = canonicalize_sorted(v, 36.0)
    assert np.unique(out).size == 2
    assert out[0] == 8.7


def test_mann_whitney(radiation_data):
    assert mann_whitney_count(radiation_data) == 87
    assert mann_whitney_count(TwoSample([1.0, 2.0], [1.0, 2.0, 3.0])) == 3  # ties count 0


@pytest.mark.parametrize("x,y", [([], [1, 2, 3, 4]), ([1.0], [2.0, 3.0]), ([1.0, np.nan], [1.0, 2.0, 3.0])])
def test_twosample_validation(x, y):
    with pytest.raises(ValueError):
        TwoSample(x, y)


def test_unknown_route(radiation_data):
    with pytest.raises(ValueError):
        trajectory(radiation_data, "magic")
