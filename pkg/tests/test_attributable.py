import math

import numpy as np
import pytest

import oracles
from quartile_shift.attributable import attributable_bound, mw_null_distribution
from quartile_shift.hypergeom import BudgetExceededError
from quartile_shift.shift_table import TwoSample


def test_trivial_laws():
    assert mw_null_distribution(1, 1).pmf.tolist() == [0.5, 0.5]
    np.testing.assert_allclose(mw_null_distribution(2, 1).pmf, [1 / 3] * 3)


def test_worked_example_tail():
    assert abs(mw_null_distribution(16, 7).upper_tail(82) - 0.044) <= 0.001


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 8) for m in range(1, 8) if n + m <= 10])
def test_matches_permutations(n, m):
    d = mw_null_distribution(n, m)
    np.testing.assert_allclose(d.pmf, oracles.mw_law(n, m), atol=1e-14)
    np.testing.assert_allclose(d.pmf, d.pmf[::-1], atol=1e-15)
    assert math.isclose(d.pmf.sum(), 1.0, rel_tol=1e-12)
    assert math.isclose(d.mean(), n * m / 2, rel_tol=1e-12)


def test_budget():
    with pytest.raises(BudgetExceededError):
        mw_null_distribution(2000, 2000)


def test_worked_example_bound(radiation_data):
    r = attributable_bound(radiation_data, 0.05)
    assert (r.v_observed, r.total_pairs, r.critical_value, r.lower_bound) == (87, 112, 82, 6)
    assert abs(r.attained_confidence - 0.956) < 0.001


def test_no_effect_data():
    r = attributable_bound(TwoSample([10.0, 11, 12, 13], [1.0, 2, 3]), 0.05)
    assert r.v_observed == 0 and r.lower_bound == 0


def test_unattainable_level_warns():
    r = attributable_bound(TwoSample([1.0, 2.0], [3.0, 4.0]), 0.01)
    assert r.lower_bound == 0 and r.attained_confidence == 0.0 and r.warning


def test_bounds_agree_with_permutation_oracle(rng):
    for _ in range(30):
        m, n = rng.integers(1, 7, 2)
        if not 4 <= m + n <= 12:
            continue
        x = rng.standard_normal(m)
        y = rng.standard_normal(n) + rng.uniform(0, 3)
        for alpha in (0.05, 0.1, 0.25):
            r = attributable_bound(TwoSample(x, y), alpha)
            v, c, b = oracles.attributable_oracle(list(x), list(y), alpha)
            assert r.v_observed == v
            assert r.lower_bound == b
            if c is not None:
                assert r.critical_value == c


def test_bound_monotone_in_confidence(radiation_data):
    bounds = [attributable_bound(radiation_data, a).lower_bound for a in (0.01, 0.05, 0.1, 0.2, 0.5)]
    assert bounds == sorted(bounds)
    assert all(b <= 87 for b in bounds)
