import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from quartile_shift.hypergeom import (
    BudgetExceededError,
    NullDistribution,
    check_counts,
    enumerate_support,
    g2_null_distribution,
    lower_block_ginv,
    make_design,
    moments,
    pmf,
    support,
)


def test_design_for_worked_example():
    d = make_design(23, 16)
    assert d.q == (6, 12, 18)
    assert d.k == (6, 6, 6, 5)
    assert d.m == 7


@pytest.mark.parametrize("N,n", [(3, 1), (10, 0), (10, 10), (4, -1)])
def test_design_rejects(N, n):
    with pytest.raises(ValueError):
        make_design(N, n)


@pytest.mark.parametrize("N,n", [(4, 1), (4, 2), (7, 3), (9, 4), (10, 7), (11, 5)])
def test_moments_match_assignment_enumeration(N, n):
    E, V = oracles.exact_moments(N, n)
    model = moments(make_design(N, n))
    np.testing.assert_allclose(model.E, [float(e) for e in E], atol=1e-12)
    np.testing.assert_allclose(model.V, [[float(v) for v in row] for row in V], atol=1e-12)


@pytest.mark.parametrize("N,n", [(4, 2), (8, 3), (11, 6), (12, 4)])
def test_pmf_matches_assignment_enumeration(N, n):
    law = oracles.assignment_tables(N, n)
    d = make_design(N, n)
    got = {tuple(a): p for a, p in enumerate_support(d)}
    assert set(got) == set(law)
    for a, p in law.items():
        assert math.isclose(got[a], float(p), rel_tol=1e-12)
        assert math.isclose(pmf(d, a), float(p), rel_tol=1e-12)


def test_ginv_identity_and_zero_border():
    model = moments(make_design(23, 16))
    G = model.Vginv
    assert np.all(G[0] == 0) and np.all(G[:, 0] == 0)
    np.testing.assert_allclose(model.V @ G @ model.V, model.V, atol=1e-12)


def test_singular_block_rejected():
    with pytest.raises(ValueError):
        lower_block_ginv(np.ones((4, 4)))


def test_expected_g2_is_three():
    for N, n in [(23, 16), (12, 5), (40, 21)]:
        d = make_design(N, n)
        tables, probs = support(d)
        assert math.isclose(math.fsum(moments(d).quadratic_form(tables) * probs), 3.0, abs_tol=1e-9)
        assert math.isclose(g2_null_distribution(d).mean(), 3.0, abs_tol=1e-9)


def test_check_counts():
    d = make_design(23, 16)
    assert check_counts(d, (6, 2, 3, 5)) == (6, 2, 3, 5)
    for bad in [(6, 2, 3), (7, 2, 2, 5), (6, 2, 3, 4), (6.5, 2, 2.5, 5), (-1, 6, 6, 5)]:
        with pytest.raises(ValueError):
            check_counts(d, bad)


def test_budget_error():
    d = make_design(400, 200)
    assert not d.within_budget()
    with pytest.raises(BudgetExceededError):
        support(d)


def test_null_distribution_merges_and_tails():
    nd = NullDistribution.from_atoms([1.0, 1.0 + 1e-12, 2.0, 0.5], [0.25, 0.25, 0.25, 0.25])
    assert nd.values.tolist() == [0.5, 1.0, 2.0]
    assert nd.probs.tolist() == [0.25, 0.5, 0.25]
    assert nd.upper_tail(1.0) == 0.75
    assert nd.upper_tail(1.0 - 1e-13) == 0.75
    assert nd.upper_tail(3.0) == 0.0
    assert nd.tails().tolist() == [1.0, 0.75, 0.25]


def test_pmf_fraction_exact_small():
    # N=4, n=1: each of the four cells equally likely
    d = make_design(4, 1)
    for a, p in enumerate_support(d):
        assert Fraction(p).limit_denominator(100) == Fraction(1, 4)
