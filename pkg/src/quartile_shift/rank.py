"""Group-rank inference with fixed cell scores.

The statistic is T = w'A for a score vector w = (0, w2, w3, w4) with
0 <= w2 < w3 <= w4.  Under the null its mean is w'E and its variance w'Vw;
the squared deviate D^2 = (w'(A - E))^2 / w'Vw is referred to chi-square(1)
or to its exact law under the hypergeometric table distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .chisq import chi2_1_quantile, chi2_sf
from .hypergeom import (
    EXACT_BUDGET,
    BudgetExceededError,
    NullDistribution,
    QuartileDesign,
    g2_null_distribution,
    moments,
    support,
)
from .shift_table import ShiftTrajectory, TwoSample, change_points


@dataclass(frozen=True)
class WeightVector:
    w: tuple[float, float, float, float]
    name: str = "custom"

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if len(w) != 4:
            raise ValueError(f"need four scores, got {len(w)}")
        if w[0] != 0.0:
            raise ValueError(f"the first score must be 0, got {w[0]}")
        if not (0.0 <= w[1] < w[2] <= w[3]):
            raise ValueError(f"scores must satisfy 0 <= w2 < w3 <= w4, got {w}")
        object.__setattr__(self, "w", w)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.w)


HL = WeightVector((0.0, 1.0, 2.0, 3.0), "hl")
MOOD = WeightVector((0.0, 0.0, 1.0, 1.0), "mood")
MERT = WeightVector((0.0, 0.18, 0.82, 1.0), "mert")
PRESETS = {"hl": HL, "mood": MOOD, "mert": MERT}

WeightLike = Union[WeightVector, str, Sequence[float]]


def resolve_weights(w: WeightLike) -> WeightVector:
    """Accept a WeightVector, a preset name, ``"w1,w2,w3,w4"`` or a sequence."""
    if isinstance(w, WeightVector):
        return w
    if isinstance(w, str):
        key = w.strip().lower()
        if key in PRESETS:
            return PRESETS[key]
        try:
            vals = [float(v) for v in key.split(",")]
        except ValueError:
            raise ValueError(f"unknown weights {w!r}; use hl, mood, mert or w1,w2,w3,w4") from None
        return WeightVector(tuple(vals))
    return WeightVector(tuple(w))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    asymptotic_p: float
    reference: str
    exact_p: float | None = None
    delta0: float | None = None

    @property
    def mode(self) -> str:
        return "exact" if self.exact_p is not None else "asymptotic"

    @property
    def p(self) -> float:
        return self.exact_p if self.exact_p is not None else self.asymptotic_p


@dataclass(frozen=True)
class ConfidenceSet:
    """Finite union of disjoint closed intervals, sorted.

    The set can be empty: with heavily tied data the rank statistic may jump
    over every acceptable value.
    """

    intervals: tuple[tuple[float, float], ...]
    nominal_level: float
    attained_level: float | None = None
    warning: str | None = None

    def __post_init__(self):
        for a, b in self.intervals:
            if not a <= b:
                raise ValueError(f"interval [{a}, {b}] is reversed")
        for (a, b), (c, _) in zip(self.intervals, self.intervals[1:]):
            if not b < c:
                raise ValueError("intervals must be sorted and disjoint")

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_interval(self) -> bool:
        return len(self.intervals) == 1

    @property
    def enclosing_interval(self) -> tuple[float, float]:
        if self.is_empty:
            return (math.nan, math.nan)
        return (self.intervals[0][0], self.intervals[-1][1])

    @property
    def enclosing_length(self) -> float:
        if self.is_empty:
            return 0.0
        lo, hi = self.enclosing_interval
        return hi - lo

    def __contains__(self, value: float) -> bool:
        return any(a <= value <= b for a, b in self.intervals)

    def contains_set(self, other: ConfidenceSet) -> bool:
        return all(any(a <= c and d <= b for a, b in self.intervals) for c, d in other.intervals)


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    defining_interval: tuple[float, float]
    rule: str
    half_open: bool = False


def as_trajectory(data: TwoSample | ShiftTrajectory) -> ShiftTrajectory:
    if isinstance(data, ShiftTrajectory):
        return data
    return change_points(data)


def t_statistic(a, w: WeightLike) -> float:
    return float(np.dot(resolve_weights(w).array, np.asarray(a, dtype=float)))


def null_mean_var(design: QuartileDesign, w: WeightLike) -> tuple[float, float]:
    """Null mean w'E and variance w'Vw of T."""
    w = resolve_weights(w).array
    model = moments(design)
    return float(w @ model.E), float(w @ model.V @ w)


def squared_deviate(a, design: QuartileDesign, w: WeightLike):
    t0, var = null_mean_var(design, w)
    t = np.asarray(a, dtype=float) @ resolve_weights(w).array
    return (t - t0) ** 2 / var


@lru_cache(maxsize=256)
def t_null_distribution(design: QuartileDesign, w: WeightVector) -> NullDistribution:
    tables, probs = support(design)
    return NullDistribution.from_atoms(tables @ w.array, probs)


@lru_cache(maxsize=256)
def d2_null_distribution(design: QuartileDesign, w: WeightVector) -> NullDistribution:
    t = t_null_distribution(design, w)
    t0, var = null_mean_var(design, w)
    return NullDistribution.from_atoms((t.values - t0) ** 2 / var, t.probs)


def _use_exact(design: QuartileDesign, mode: str, budget: int) -> bool:
    if mode == "exact":
        if not design.within_budget(budget):
            raise BudgetExceededError(
                f"exact mode needs {design.support_bound} candidate tables (budget {budget}); "
                "use mode='asymptotic'"
            )
        return True
    if mode == "asymptotic":
        return False
    if mode == "auto":
        return design.within_budget(budget)
    raise ValueError(f"mode must be exact, asymptotic or auto, got {mode!r}")


def deviate_test(
    data: TwoSample | ShiftTrajectory,
    delta0: float,
    w: WeightLike = "hl",
    mode: str = "auto",
    budget: int = EXACT_BUDGET,
) -> TestResult:
    """Two-sided test of shift ``delta0`` by the squared deviate D^2."""
    w = resolve_weights(w)
    traj = as_trajectory(data)
    a = traj.counts_at(delta0)
    d2 = float(squared_deviate(a, traj.design, w))
    exact = None
    if _use_exact(traj.design, mode, budget):
        exact = d2_null_distribution(traj.design, w).upper_tail(d2)
    return TestResult(d2, chi2_sf(d2, 1), "chi2(1)", exact, float(delta0))


def fit_test(
    data: TwoSample | ShiftTrajectory,
    delta0: float,
    mode: str = "auto",
    budget: int = EXACT_BUDGET,
) -> TestResult:
    """Test of the shift model at ``delta0`` by G^2 = (A-E)'V^-(A-E)."""
    traj = as_trajectory(data)
    g2 = float(moments(traj.design).quadratic_form(traj.counts_at(delta0)))
    exact = None
    if _use_exact(traj.design, mode, budget):
        exact = g2_null_distribution(traj.design).upper_tail(g2)
    return TestResult(g2, chi2_sf(g2, 3), "chi2(3)", exact, float(delta0))


def _close(a, b) -> np.ndarray:
    return np.abs(np.asarray(a) - b) <= 1e-9 * max(1.0, abs(b))


def hl_estimate(data: TwoSample | ShiftTrajectory, w: WeightLike = "hl") -> EstimateResult:
    """Solve w'A = w'E on the step function of T.

    If T takes the value w'E on an interval the estimate is that interval's
    midpoint; otherwise it is the breakpoint where T jumps past w'E.
    """
    w = resolve_weights(w)
    traj = as_trajectory(data)
    t = traj.counts @ w.array
    t0, _ = null_mean_var(traj.design, w)
    eq = np.flatnonzero(_close(t, t0))
    if eq.size:
        lo, hi = traj.lower[eq[0]], traj.upper[eq[-1]]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise RuntimeError("T equals its null mean on an unbounded segment")
        return EstimateResult(float((lo + hi) / 2), (float(lo), float(hi)), "interval-midpoint", True)
    # T is nonincreasing: first segment strictly below the null mean
    s = int(np.searchsorted(-t, -t0, side="right"))
    if s == 0 or s == len(t):
        raise RuntimeError("T never brackets its null mean")
    b = float(traj.lower[s])
    return EstimateResult(b, (b, b), "crossing-point")


def d2_minimizing_segment(data: TwoSample | ShiftTrajectory, w: WeightLike = "hl") -> tuple[float, float]:
    """Run of segments on which D^2 is smallest (diagnostic)."""
    traj = as_trajectory(data)
    lo, hi, d2 = traj.runs(squared_deviate(traj.counts, traj.design, w))
    i = int(np.argmin(d2))
    return float(lo[i]), float(hi[i])


def accepted_intervals(lower, upper, accepted) -> tuple[tuple[float, float], ...]:
    """Closure of the union of accepted half-open segments."""
    out: list[list[float]] = []
    for a, b, ok in zip(lower, upper, accepted):
        if not ok:
            continue
        if out and out[-1][1] == a:
            out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((float(a), float(b)) for a, b in out)


def rank_critical_value(design: QuartileDesign, w: WeightLike, alpha: float) -> tuple[float, float] | None:
    """Exact critical D^2 and its tail: the largest attainable tail <= alpha.

    Returns None when no tail probability is as small as ``alpha``.
    """
    dist = d2_null_distribution(design, resolve_weights(w))
    tails = dist.tails()
    ok = np.flatnonzero(tails <= alpha * (1 + 1e-12))
    if ok.size == 0:
        return None
    i = int(ok[0])
    return float(dist.values[i]), float(tails[i])


def invert_rank_test(
    data: TwoSample | ShiftTrajectory,
    w: WeightLike = "hl",
    alpha: float = 0.05,
    mode: str = "exact",
    budget: int = EXACT_BUDGET,
) -> ConfidenceSet:
    """Confidence interval for the shift by inverting the D^2 test."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    w = resolve_weights(w)
    traj = as_trajectory(data)
    d2 = squared_deviate(traj.counts, traj.design, w)
    if _use_exact(traj.design, mode, budget):
        crit = rank_critical_value(traj.design, w, alpha)
        if crit is None:
            return ConfidenceSet(
                ((-math.inf, math.inf),), 1 - alpha, 1.0,
                warning=f"no exact test of level {alpha} exists for this design; the set is the whole line",
            )
        c, tail = crit
        accepted = d2 < c - 1e-9 * max(1.0, c)
        return ConfidenceSet(accepted_intervals(traj.lower, traj.upper, accepted), 1 - alpha, 1 - tail)
    c = chi2_1_quantile(1 - alpha)
    accepted = d2 <= c * (1 + 1e-12)
    return ConfidenceSet(accepted_intervals(traj.lower, traj.upper, accepted), 1 - alpha)


def segment_pvalues(traj: ShiftTrajectory, w: WeightLike = "hl", mode: str = "exact"):
    """Per-segment p-values of the D^2 and G^2 tests (the p-value curve).

    Returns ``(lower, upper, p_d2, p_g2)``.
    """
    w = resolve_weights(w)
    model = moments(traj.design)
    d2 = squared_deviate(traj.counts, traj.design, w)
    g2 = model.quadratic_form(traj.counts)
    if _use_exact(traj.design, mode, EXACT_BUDGET):
        dd = d2_null_distribution(traj.design, w)
        gd = g2_null_distribution(traj.design)
        pd = np.array([dd.upper_tail(v) for v in d2])
        pg = np.array([gd.upper_tail(v) for v in g2])
    else:
        pd = np.array([chi2_sf(v, 1) for v in d2])
        pg = np.array([chi2_sf(v, 3) for v in g2])
    return traj.lower, traj.upper, pd, pg
