"""Inference without a shift model: the Mann-Whitney count and attributable effects.

V counts the (control, treated) pairs in which the treated response is
higher.  Under random assignment with no effect its law depends only on n and
m.  If Pr(V >= c) <= alpha then, with confidence 1 - Pr(V >= c), at least
V - c + 1 of the favorable comparisons are caused by the treatment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .hypergeom import BudgetExceededError
from .shift_table import TwoSample, mann_whitney_count

MW_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class MannWhitneyDist:
    n: int
    m: int
    pmf: np.ndarray

    @property
    def total_pairs(self) -> int:
        return self.n * self.m

    def upper_tail(self, v: int) -> float:
        """Pr(V >= v)."""
        v = max(int(v), 0)
        if v > self.total_pairs:
            return 0.0
        return float(math.fsum(self.pmf[v:]))

    def tails(self) -> np.ndarray:
        """Pr(V >= v) for v = 0, ..., nm."""
        return np.cumsum(self.pmf[::-1])[::-1]

    def mean(self) -> float:
        return float(math.fsum(np.arange(self.pmf.size) * self.pmf))


@lru_cache(maxsize=64)
def mw_null_distribution(n: int, m: int, budget: int = MW_BUDGET) -> MannWhitneyDist:
    """Exact null pmf of V for n treated and m controls."""
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if n * m + 1 > budget:
        raise BudgetExceededError(f"the Mann-Whitney table has {n * m + 1} entries (budget {budget})")
    pmf = _backend.mw_frequencies(n, m)
    pmf.setflags(write=False)
    return MannWhitneyDist(n, m, pmf)


@dataclass(frozen=True)
class AttributableResult:
    v_observed: int
    total_pairs: int
    critical_value: int
    attained_confidence: float
    lower_bound: int
    warning: str | None = None


def attributable_bound(data: TwoSample, alpha: float = 0.05) -> AttributableResult:
    """Lower confidence bound on the number of comparisons caused by treatment."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    dist = mw_null_distribution(data.n, data.m)
    v = mann_whitney_count(data)
    tails = dist.tails()
    ok = np.flatnonzero(tails <= alpha * (1 + 1e-12))
    if ok.size == 0:
        return AttributableResult(
            v, dist.total_pairs, dist.total_pairs + 1, 0.0, 0,
            warning=f"no critical value reaches level {alpha} for n={data.n}, m={data.m}",
        )
    c = int(ok[0])
    return AttributableResult(v, dist.total_pairs, c, 1.0 - float(tails[c]), max(v - c + 1, 0))
