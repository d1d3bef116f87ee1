"""Quartile tables as a function of the hypothesized shift.

For a hypothesized shift ``delta`` the treated values are moved to
``y - delta``, pooled with the controls, and the treated members of each
pooled-quartile cell are counted.  As ``delta`` grows the counts change only
at the pairwise differences ``y_j - x_i``; between them they are constant.

Ordering convention: when a shifted treated value equals a control value the
treated value sorts first.  This makes ``delta -> table`` right-continuous,
so a breakpoint belongs to the segment on its right.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .hypergeom import CellCounts, QuartileDesign, make_design

TIE_RULE = (
    "a shifted treated value equal to a control value is ordered below it; "
    "tables are right-continuous in the shift"
)

# Differences closer than this (relative to the data scale) are one breakpoint.
_COINCIDENCE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class TwoSample:
    """Control sample ``x`` and treated sample ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.size < 1 or y.size < 1:
            raise ValueError("both samples need at least one observation")
        if x.size + y.size < 4:
            raise ValueError("need at least four pooled observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("observations must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.size

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def N(self) -> int:
        return self.x.size + self.y.size

    @cached_property
    def design(self) -> QuartileDesign:
        return make_design(self.N, self.n)

    @cached_property
    def xs(self) -> np.ndarray:
        return np.sort(self.x)

    @cached_property
    def ys(self) -> np.ndarray:
        return np.sort(self.y)

    @cached_property
    def scale(self) -> float:
        return float(max(np.max(np.abs(self.x)), np.max(np.abs(self.y))))

    @cached_property
    def differences(self) -> np.ndarray:
        """Canonical ``ys[j] - xs[i]`` as an (n, m) array."""
        raw = self.ys[:, None] - self.xs[None, :]
        flat = raw.ravel()
        order = np.argsort(flat, kind="stable")
        canon = np.empty_like(flat)
        canon[order] = canonicalize_sorted(flat[order], self.scale)
        canon = canon.reshape(raw.shape)
        canon.setflags(write=False)
        return canon

    def has_ties(self) -> bool:
        pooled = np.concatenate([self.x, self.y])
        return np.unique(pooled).size < pooled.size


def _round_significant(v: np.ndarray, digits: int = 12) -> np.ndarray:
    out = v.copy()
    # leave zeros and values too small or large to scale in double precision
    with np.errstate(divide="ignore"):
        mag = np.log10(np.abs(v))
    nz = (v != 0) & (np.abs(mag) < 290)
    e = np.floor(mag[nz])
    p = (digits - 1) - e
    up = p >= 0
    vals = v[nz]
    res = np.empty_like(vals)
    s = 10.0 ** p[up]
    res[up] = np.round(vals[up] * s) / s
    s = 10.0 ** (-p[~up])
    res[~up] = np.round(vals[~up] / s) * s
    out[nz] = res
    return out


def canonicalize_sorted(values: np.ndarray, scale: float) -> np.ndarray:
    """Collapse coincident sorted differences onto one representative each.

    Values closer than 1e-12 of the data scale form a cluster.  Its
    representative is the cluster's smallest member, replaced by its
    12-significant-digit rounding when that lies within a quarter tolerance;
    this keeps clusters strictly ordered.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return v.copy()
    tol = _COINCIDENCE_RTOL * scale
    start = np.r_[True, np.diff(v) > tol]
    ids = np.cumsum(start) - 1
    first = v[start]
    snapped = _round_significant(first)
    rep = np.where(np.abs(snapped - first) <= tol / 4, snapped, first)
    return rep[ids]


def _cells(pos: np.ndarray, q) -> np.ndarray:
    return np.searchsorted(np.asarray(q), pos, side="left")


def build_table(data: TwoSample, delta0: float) -> CellCounts:
    """Treated counts per pooled-quartile cell at shift ``delta0``, from scratch."""
    # control i lies below shifted treated j  <=>  y_j - x_i > delta0
    below = np.sum(data.differences > delta0, axis=1)
    pos = np.arange(data.n) + below + 1
    a = np.bincount(_cells(pos, data.design.q), minlength=4)
    return CellCounts(*(int(v) for v in a))


@dataclass(frozen=True, eq=False)
class ShiftTrajectory:
    """Piecewise-constant map from shift to table.

    Segment ``s`` is ``[lower[s], upper[s])`` with ``lower[0] = -inf`` and
    ``upper[-1] = inf``; ``counts[s]`` is its table.
    """

    breakpoints: np.ndarray
    counts: np.ndarray
    design: QuartileDesign

    def __post_init__(self):
        if self.counts.shape != (self.breakpoints.size + 1, 4):
            raise ValueError("need one table per segment")
        self.breakpoints.setflags(write=False)
        self.counts.setflags(write=False)

    def __len__(self) -> int:
        return self.counts.shape[0]

    @cached_property
    def lower(self) -> np.ndarray:
        return np.r_[-np.inf, self.breakpoints]

    @cached_property
    def upper(self) -> np.ndarray:
        return np.r_[self.breakpoints, np.inf]

    def segment_index(self, delta: float) -> int:
        return int(np.searchsorted(self.breakpoints, delta, side="right"))

    def counts_at(self, delta: float) -> CellCounts:
        return CellCounts(*(int(v) for v in self.counts[self.segment_index(delta)]))

    def compress(self) -> ShiftTrajectory:
        """Drop breakpoints across which the table does not change."""
        change = np.any(self.counts[1:] != self.counts[:-1], axis=1)
        keep = np.r_[True, change]
        return ShiftTrajectory(self.breakpoints[change].copy(), self.counts[keep].copy(), self.design)

    def runs(self, values: np.ndarray, rtol: float = 1e-9):
        """Merge adjacent segments with equal ``values``.

        Returns ``(lower, upper, value)`` arrays of the maximal runs.
        """
        values = np.asarray(values, dtype=float)
        same = np.abs(np.diff(values)) <= rtol * np.maximum(1.0, np.abs(values[1:]))
        start = np.flatnonzero(np.r_[True, ~same])
        lo = self.lower[start]
        hi = np.r_[self.lower[start[1:]], np.inf]
        return lo, hi, values[start]


def _pair_order(data: TwoSample):
    d = data.differences.ravel()
    order = np.argsort(d, kind="stable")
    ds = d[order]
    start = np.r_[True, ds[1:] != ds[:-1]]
    breakpoints = ds[start]
    offsets = np.r_[np.flatnonzero(start), ds.size]
    treated = order // data.m
    return breakpoints, offsets, treated


def trajectory(data: TwoSample, method: str = "sweep") -> ShiftTrajectory:
    """Table on every segment between consecutive distinct differences.

    ``method="sweep"`` applies adjacent transpositions in breakpoint order;
    ``method="scratch"`` rebuilds the table at one interior point per segment.
    """
    design = data.design
    if method == "sweep":
        breakpoints, offsets, treated = _pair_order(data)
        counts = _backend.sweep_counts(treated.astype(np.int64), offsets.astype(np.int64), data.n, data.m, design.q)
    elif method == "scratch":
        breakpoints = np.unique(data.differences)
        reps = np.r_[breakpoints[0] - 1.0, breakpoints]
        counts = np.array([build_table(data, d) for d in reps], dtype=np.int64)
    else:
        raise ValueError(f"unknown trajectory method {method!r}")
    return ShiftTrajectory(np.asarray(breakpoints, dtype=float).copy(), np.asarray(counts, dtype=np.int64), design)


def change_points(data: TwoSample) -> ShiftTrajectory:
    """Compressed trajectory from the at most 3n differences that change it.

    Treated value j (rank r among treated) sits at pooled position
    ``r + c + 1`` while ``c`` controls lie below it.  It drops into cell k
    exactly when that position reaches ``q_k``, i.e. when the shift passes
    ``ys[r] - xs[q_k - r - 1]``.
    """
    design = data.design
    n, m = data.n, data.m
    r = np.arange(n)
    values, cells = [], []
    for k, qk in enumerate(design.q):
        i = qk - r - 1
        ok = (i >= 0) & (i < m)
        values.append(data.ys[ok] - data.xs[i[ok]])
        cells.append(np.full(int(ok.sum()), k))
    values = np.concatenate(values)
    cells = np.concatenate(cells)
    order = np.argsort(values, kind="stable")
    values = canonicalize_sorted(values[order], data.scale)
    cells = cells[order]

    start_pos = m + r + 1
    first = np.bincount(_cells(start_pos, design.q), minlength=4).astype(np.int64)
    steps = np.zeros((values.size, 4), dtype=np.int64)
    idx = np.arange(values.size)
    steps[idx, cells] += 1
    steps[idx, cells + 1] -= 1
    counts = np.vstack([first, first + np.cumsum(steps, axis=0)])

    # keep the last state of each group of coincident values
    if values.size:
        last = np.r_[values[1:] != values[:-1], True]
        keep = np.r_[True, last]
        values = values[last]
        counts = counts[keep]
    traj = ShiftTrajectory(values.copy(), counts, design)
    return traj.compress()


def mann_whitney_count(data: TwoSample) -> int:
    """Number of (control, treated) pairs with the treated value strictly higher."""
    return int(np.sum(np.searchsorted(data.xs, data.y, side="left")))
