"""Generalized-method-of-moments shift estimation on the quartile table.

The four moment conditions E(A) = E are weighted by the generalized inverse
of their covariance; the estimate minimizes G^2 over the shift.  G^2 is
piecewise constant, so its minimum is attained on whole segments, and the
estimate is the midpoint of a minimizing run.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chisq import chi2_1_quantile, chi2_sf
from .hypergeom import moments
from .rank import ConfidenceSet, EstimateResult, TestResult, accepted_intervals, as_trajectory
from .shift_table import ShiftTrajectory, TwoSample


class UnboundedMinimizerError(ValueError):
    """G^2 attains its minimum only on an unbounded end segment."""


@dataclass(frozen=True)
class GmmResult:
    estimate: EstimateResult
    min_g2: float
    minimizing_segments: tuple[tuple[float, float], ...]
    overid: TestResult
    ambiguity_flag: bool


def _g2_runs(traj: ShiftTrajectory):
    g2 = moments(traj.design).quadratic_form(traj.counts)
    return traj.runs(g2)


def _is_min(values: np.ndarray, best: float) -> np.ndarray:
    return values <= best + 1e-9 * max(1.0, best)


def gmm_estimate(data: TwoSample | ShiftTrajectory) -> GmmResult:
    """Midpoint of the run on which G^2 is smallest.

    Several disjoint minimizing runs can occur; then the longest bounded
    one is used (leftmost on ties) and ``ambiguity_flag`` is set.
    """
    traj = as_trajectory(data)
    lo, hi, g2 = _g2_runs(traj)
    best = float(g2.min())
    idx = np.flatnonzero(_is_min(g2, best))
    segments = tuple((float(lo[i]), float(hi[i])) for i in idx)
    bounded = [i for i in idx if np.isfinite(lo[i]) and np.isfinite(hi[i])]
    if not bounded:
        raise UnboundedMinimizerError("G^2 is minimized only on an unbounded end segment")
    lengths = np.array([hi[i] - lo[i] for i in bounded])
    pick = bounded[int(np.argmax(lengths))]
    a, b = float(lo[pick]), float(hi[pick])
    est = EstimateResult((a + b) / 2, (a, b), "interval-midpoint", True)
    overid = TestResult(best, chi2_sf(best, 2), "chi2(2)")
    return GmmResult(est, best, segments, overid, len(idx) > 1)


def gmm_difference_test(
    data: TwoSample | ShiftTrajectory, delta0: float, fit: GmmResult | None = None
) -> TestResult:
    """Large-sample test of shift ``delta0``: G^2(delta0) - min G^2 against chi2(1)."""
    traj = as_trajectory(data)
    fit = fit if fit is not None else gmm_estimate(traj)
    g2 = float(moments(traj.design).quadratic_form(traj.counts_at(delta0)))
    stat = max(g2 - fit.min_g2, 0.0)
    return TestResult(stat, chi2_sf(stat, 1), "chi2(1)", None, float(delta0))


def gmm_confidence_set(
    data: TwoSample | ShiftTrajectory, alpha: float = 0.05, fit: GmmResult | None = None
) -> ConfidenceSet:
    """Shifts not rejected by the difference test; possibly several intervals."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    traj = as_trajectory(data)
    fit = fit if fit is not None else gmm_estimate(traj)
    lo, hi, g2 = _g2_runs(traj)
    crit = chi2_1_quantile(1 - alpha)
    accepted = g2 - fit.min_g2 <= crit * (1 + 1e-12)
    return ConfidenceSet(accepted_intervals(lo, hi, accepted), 1 - alpha)


def g2_curve(data: TwoSample | ShiftTrajectory):
    """Runs of constant G^2 - min G^2 as ``(lower, upper, excess)``."""
    traj = as_trajectory(data)
    lo, hi, g2 = _g2_runs(traj)
    return lo, hi, g2 - g2.min()
