"""Exact multivariate hypergeometric law of the pooled-quartile 4x2 table.

Given N pooled observations of which n are treated, the quartile order
statistics cut the pooled sample into four cells with fixed totals
``k = (k1, k2, k3, k4)``.  Under the null the treated counts per cell follow
the multivariate hypergeometric distribution with those margins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from . import _backend

#: Largest (k1+1)(k2+1)(k3+1) for which exact enumeration is attempted.
EXACT_BUDGET = 10**6


class BudgetExceededError(RuntimeError):
    """Exact enumeration is over budget; use the Normal/chi-square approximations."""


class CellCounts(NamedTuple):
    a1: int
    a2: int
    a3: int
    a4: int


@dataclass(frozen=True)
class QuartileDesign:
    N: int
    n: int
    m: int
    q: tuple[int, int, int]
    k: tuple[int, int, int, int]

    @property
    def support_bound(self) -> int:
        k1, k2, k3, _ = self.k
        return (k1 + 1) * (k2 + 1) * (k3 + 1)

    def within_budget(self, budget: int = EXACT_BUDGET) -> bool:
        return self.support_bound <= budget


def make_design(N: int, n: int) -> QuartileDesign:
    """Margins of the quartile table for N pooled observations, n treated."""
    N, n = int(N), int(n)
    if N < 4:
        raise ValueError(f"need N >= 4 so that every quartile cell is occupied, got N={N}")
    if not 1 <= n <= N - 1:
        raise ValueError(f"need 1 <= n <= N-1, got n={n}, N={N}")
    q = tuple(-(-i * N // 4) for i in (1, 2, 3))
    k = (q[0], q[1] - q[0], q[2] - q[1], N - q[2])
    return QuartileDesign(N=N, n=n, m=N - n, q=q, k=k)


def check_counts(design: QuartileDesign, a) -> CellCounts:
    """Validate ``a`` against the margins of ``design``."""
    a = tuple(a)
    if len(a) != 4:
        raise ValueError(f"a table has four cells, got {len(a)}")
    if any(int(v) != v for v in a):
        raise ValueError(f"cell counts must be integers, got {a}")
    a = CellCounts(*(int(v) for v in a))
    for aj, kj in zip(a, design.k):
        if not 0 <= aj <= kj:
            raise ValueError(f"cell counts {tuple(a)} violate margins {design.k}")
    if sum(a) != design.n:
        raise ValueError(f"cell counts {tuple(a)} must sum to n={design.n}")
    return a


def lower_block_ginv(M: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Generalized inverse with zero first row/column.

    The lower-right 3x3 block is inverted by cofactor expansion; a block whose
    determinant is negligible relative to its scale is rejected.
    """
    b = np.asarray(M, dtype=float)[1:, 1:]
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != i]
            c = [x for x in range(3) if x != j]
            minor = b[r[0], c[0]] * b[r[1], c[1]] - b[r[0], c[1]] * b[r[1], c[0]]
            cof[i, j] = (-1) ** (i + j) * minor
    det = float(b[0] @ cof[0])
    scale = float(np.max(np.abs(b))) ** 3
    if scale == 0.0 or abs(det) < 1e-14 * scale:
        raise ValueError(f"{what} lower 3x3 block is singular (det={det:g})")
    out = np.zeros((4, 4))
    out[1:, 1:] = cof.T / det
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HypergeomModel:
    design: QuartileDesign
    E: np.ndarray
    V: np.ndarray
    Vginv: np.ndarray

    def quadratic_form(self, a) -> np.ndarray | float:
        """G^2 = (a - E)' V^- (a - E); ``a`` may be a stack of tables."""
        r = np.asarray(a, dtype=float) - self.E
        if r.ndim == 1:
            return float(r @ self.Vginv @ r)
        return np.einsum("ij,jk,ik->i", r, self.Vginv, r)


@lru_cache(maxsize=512)
def moments(design: QuartileDesign) -> HypergeomModel:
    """Null mean vector, covariance matrix and its generalized inverse."""
    N, n, m = design.N, design.n, design.m
    k = np.array(design.k, dtype=float)
    E = n * k / N
    denom = N * N * (N - 1)
    V = -n * m * np.outer(k, k) / denom
    V[np.diag_indices(4)] = n * m * k * (N - k) / denom
    Vginv = lower_block_ginv(V, "covariance")
    return HypergeomModel(design, _frozen(E), _frozen(V), _frozen(Vginv))


@lru_cache(maxsize=64)
def _log_binomials(k: int) -> np.ndarray:
    return _frozen(np.array([math.log(math.comb(k, a)) for a in range(k + 1)]))


def pmf(design: QuartileDesign, a) -> float:
    """Exact probability of the table ``a`` under the null."""
    a = check_counts(design, a)
    lp = sum(_log_binomials(kj)[aj] for kj, aj in zip(design.k, a))
    return math.exp(lp - math.log(math.comb(design.N, design.n)))


@lru_cache(maxsize=128)
def _support(design: QuartileDesign) -> tuple[np.ndarray, np.ndarray]:
    logc = [_log_binomials(kj) for kj in design.k]
    tables, probs = _backend.enumerate_tables(
        design.k, design.n, logc, math.log(math.comb(design.N, design.n))
    )
    return _frozen(tables), _frozen(probs)


def support(design: QuartileDesign, budget: int = EXACT_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Every admissible table (rows) with its probability, as arrays."""
    if design.support_bound > budget:
        raise BudgetExceededError(
            f"exact enumeration needs {design.support_bound} candidate tables "
            f"(budget {budget}); use the asymptotic mode"
        )
    return _support(design)


def enumerate_support(design: QuartileDesign, budget: int = EXACT_BUDGET) -> Iterator[tuple[CellCounts, float]]:
    tables, probs = support(design, budget)
    for row, p in zip(tables, probs):
        yield CellCounts(*(int(v) for v in row)), float(p)


def _same(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b) <= 1e-9 * np.maximum(1.0, np.abs(b))


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Exact law of a real statistic; values within 1e-9 (relative) are merged."""

    values: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_atoms(cls, values, probs) -> NullDistribution:
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(values, kind="stable")
        v, p = values[order], probs[order]
        if v.size == 0:
            raise ValueError("empty distribution")
        start = np.r_[True, ~_same(v[1:], v[:-1])]
        ids = np.cumsum(start) - 1
        merged = np.bincount(ids, weights=p)
        return cls(_frozen(v[start].copy()), _frozen(merged))

    def upper_tail(self, x: float) -> float:
        """Pr(S >= x), treating values within tolerance of x as equal."""
        keep = (self.values >= x) | _same(self.values, np.full_like(self.values, x))
        return float(math.fsum(self.probs[keep]))

    def tails(self) -> np.ndarray:
        """Pr(S >= values[i]) for every support point."""
        return np.cumsum(self.probs[::-1])[::-1]

    def mean(self) -> float:
        return float(math.fsum(self.values * self.probs))


@lru_cache(maxsize=128)
def g2_null_distribution(design: QuartileDesign) -> NullDistribution:
    """Exact null law of the fit statistic G^2 for this design."""
    tables, probs = support(design)
    return NullDistribution.from_atoms(moments(design).quadratic_form(tables), probs)
