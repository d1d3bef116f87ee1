import math

import numpy as np
import pytest

import oracles
from quartile_shift.hypergeom import BudgetExceededError
from quartile_shift.rank import (
    HL,
    MERT,
    MOOD,
    ConfidenceSet,
    WeightVector,
    d2_null_distribution,
    deviate_test,
    fit_test,
    hl_estimate,
    invert_rank_test,
    null_mean_var,
    resolve_weights,
    segment_pvalues,
    t_statistic,
)
from quartile_shift.shift_table import TwoSample, change_points


def test_weight_validation():
    assert resolve_weights("HL") is HL
    assert resolve_weights("0,0.2,0.8,1").w == (0.0, 0.2, 0.8, 1.0)
    for bad in [(1, 2, 3, 4), (0, 2, 1, 3), (0, 1, 1, 1), (0, -1, 1, 2), (0, 1, 2)]:
        with pytest.raises(ValueError):
            WeightVector(bad)
    with pytest.raises(ValueError):
        resolve_weights("median")


def test_null_moments(radiation_data):
    t0, var = null_mean_var(radiation_data.design, HL)
    assert abs(t0 - 22.957) < 1e-3
    assert abs(var - 6.1206) < 1e-3


def test_t_at_breakpoint(radiation_data):
    traj = change_points(radiation_data)
    assert t_statistic(traj.counts_at(8.7), HL) == 22
    assert t_statistic(traj.counts_at(8.69999), HL) == 23


def test_estimates(radiation_data):
    assert hl_estimate(radiation_data).estimate == 8.7
    assert hl_estimate(radiation_data).rule == "crossing-point"
    assert hl_estimate(radiation_data, MERT).estimate == 8.7
    assert hl_estimate(radiation_data, MOOD).estimate == 9.9


def test_midpoint_rule():
    # symmetric toy data: T equals its mean on a whole segment
    data = TwoSample([0.0, 1.0, 2.0, 3.0], [10.0, 11.0, 12.0, 13.0])
    est = hl_estimate(data)
    assert est.rule == "interval-midpoint"
    a, b = est.defining_interval
    assert est.estimate == (a + b) / 2 == 10.0


def test_tests_at_worked_example_values(radiation_data):
    t = deviate_test(radiation_data, 0.0)
    assert abs(t.statistic - 4.155885) < 1e-5
    assert abs(t.exact_p - 0.0436) < 5e-4
    assert t.mode == "exact"
    a = deviate_test(radiation_data, 0.0, mode="asymptotic")
    assert a.exact_p is None and math.isclose(a.p, a.asymptotic_p)
    g = fit_test(radiation_data, 8.69)
    assert abs(g.statistic - 9.2) < 0.05 and abs(g.exact_p - 0.021) < 0.001


def test_exact_mode_budget():
    rng = np.random.default_rng(1)
    data = TwoSample(rng.standard_normal(250), rng.standard_normal(250))
    with pytest.raises(BudgetExceededError):
        deviate_test(data, 0.0, mode="exact")
    assert deviate_test(data, 0.0, mode="auto").mode == "asymptotic"
    with pytest.raises(ValueError):
        deviate_test(data, 0.0, mode="fast")


def test_exact_ci(radiation_data):
    cs = invert_rank_test(radiation_data, HL, 0.05)
    assert cs.intervals == ((0.1, 19.5),)
    assert abs(cs.attained_level - 0.9564) < 1e-3
    assert invert_rank_test(radiation_data, HL, 0.10).intervals == ((0.1, 14.9),)
    assert invert_rank_test(radiation_data, HL, 1 / 3).intervals == ((3.0, 10.7),)


def test_exact_ci_whole_line_when_unattainable():
    cs = invert_rank_test(TwoSample([1.0, 2.0], [3.0, 4.0]), HL, 0.01)
    assert cs.intervals == ((-math.inf, math.inf),) and cs.warning


def test_asymptotic_ci_is_interval(radiation_data):
    cs = invert_rank_test(radiation_data, HL, 0.05, mode="asymptotic")
    assert cs.is_interval and 8.7 in cs



def test_confidence_set_validation():
    with pytest.raises(ValueError):
        ConfidenceSet(((0.0, 2.0), (1.0, 3.0)), 0.95)
    with pytest.raises(ValueError):
        ConfidenceSet(((2.0, 1.0),), 0.95)
    empty = ConfidenceSet((), 0.95)
    assert empty.is_empty and empty.enclosing_length == 0.0 and 0.0 not in empty
    cs = ConfidenceSet(((0.0, 1.0), (2.0, 3.0)), 0.95)
    assert cs.enclosing_interval == (0.0, 3.0) and 1.5 not in cs and 2.5 in cs
    assert ConfidenceSet(((-1.0, 5.0),), 0.99).contains_set(cs)


def test_hl_against_grid_oracle(rng):
    for _ in range(40):
        m, n = rng.integers(1, 9, 2)
        if m + n < 4:
            continue
        x = rng.integers(0, 12, m).astype(float)
        y = rng.integers(0, 16, n).astype(float)
        for w in (HL, MOOD, MERT):
            assert hl_estimate(TwoSample(x, y), w).estimate == oracles.hl_grid_oracle(x, y, w.array)


def test_pvalue_curve_shapes(radiation_data):
    traj = change_points(radiation_data)
    lo, hi, pd, pg = segment_pvalues(traj)
    assert lo.size == pd.size == pg.size == len(traj)
    assert np.all((pd >= 0) & (pd <= 1 + 1e-12))
    # the rank p-value region above any alpha is one interval
    for alpha in (0.05, 0.1, 1 / 3):
        idx = np.flatnonzero(pd > alpha)
        assert np.all(np.diff(idx) == 1)
