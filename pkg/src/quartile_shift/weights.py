"""Large-sample calculus for group rank statistics.

Under local shift alternatives the cell proportions move by eta, where
eta_g = lam(1-lam) * integral of the score phi(u, f) = -f'(F^-1(u)) / f(F^-1(u))
over the g-th quarter of (0, 1).  With Sigma the limiting covariance of A/sqrt(N),
a score vector w has efficacy w'eta / sqrt(w'Sigma w), maximized by w = Sigma^- eta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .hypergeom import lower_block_ginv, make_design, moments
from .rank import PRESETS, WeightLike, WeightVector, resolve_weights

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class Distribution:
    """A location family member with density, its derivative and quantile function."""

    name: str
    pdf: Callable[[float], float]
    dpdf: Callable[[float], float]
    ppf: Callable[[float], float]
    score: Callable[[float], float] | None = field(default=None, compare=False)

    def phi(self, x: float) -> float:
        """-f'(x)/f(x)."""
        if self.score is not None:
            return self.score(x)
        return -self.dpdf(x) / self.pdf(x)


def _norm_pdf(x):
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI)


NORMAL = Distribution(
    "normal",
    pdf=_norm_pdf,
    dpdf=lambda x: -x * _norm_pdf(x),
    ppf=lambda u: float(special.ndtri(u)),
    score=lambda x: x,
)

CAUCHY = Distribution(
    "cauchy",
    pdf=lambda x: 1.0 / (math.pi * (1.0 + x * x)),
    dpdf=lambda x: -2.0 * x / (math.pi * (1.0 + x * x) ** 2),
    ppf=lambda u: math.tan(math.pi * (u - 0.5)),
    score=lambda x: 2.0 * x / (1.0 + x * x),
)


# Normal(0,1) + Exponential(1): f(x) = exp(1/2 - x) Phi(x - 1)
def _ne_logpdf(x):
    return 0.5 - x + float(special.log_ndtr(x - 1.0))


def _ne_pdf(x):
    return math.exp(_ne_logpdf(x))


def _ne_mills(x):
    # phi(x-1) / Phi(x-1), stable in both tails
    z = x - 1.0
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI - float(special.log_ndtr(z)))


def _ne_cdf(x):
    return float(special.ndtr(x)) - math.exp(0.5 - x + float(special.log_ndtr(x - 1.0)))


def _ne_ppf(u):
    if not 0.0 < u < 1.0:
        raise ValueError("quantile level must lie in (0, 1)")
    lo, hi = -10.0, 10.0
    while _ne_cdf(lo) > u:
        lo *= 2
    while _ne_cdf(hi) < u:
        hi *= 2
    return optimize.brentq(lambda x: _ne_cdf(x) - u, lo, hi, xtol=1e-10, rtol=1e-14)


NORMAL_PLUS_EXPONENTIAL = Distribution(
    "ne",
    pdf=_ne_pdf,
    dpdf=lambda x: _ne_pdf(x) * (_ne_mills(x) - 1.0),
    ppf=_ne_ppf,
    score=lambda x: 1.0 - _ne_mills(x),
)

DISTRIBUTIONS = {"normal": NORMAL, "cauchy": CAUCHY, "ne": NORMAL_PLUS_EXPONENTIAL}


def get_distribution(name: str | Distribution) -> Distribution:
    if isinstance(name, Distribution):
        return name
    key = name.strip().lower()
    if key not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {name!r}; choose from {sorted(DISTRIBUTIONS)}")
    return DISTRIBUTIONS[key]


def score_function(dist: str | Distribution, u: float) -> float:
    """phi(u, f) = -f'(F^-1(u)) / f(F^-1(u))."""
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie strictly inside (0, 1), got {u}")
    d = get_distribution(dist)
    return d.phi(d.ppf(u))


def sigma_matrix(lam: float) -> np.ndarray:
    """Limiting covariance of A / sqrt(N) with n/N -> lam."""
    c = lam * (1 - lam) / 16
    return c * (4 * np.eye(4) - np.ones((4, 4)))


def _pdf_at(d: Distribution, u: float) -> float:
    if u <= 0.0 or u >= 1.0:
        return 0.0
    return d.pdf(d.ppf(u))


@dataclass(frozen=True, eq=False)
class ScoreModel:
    distribution: str
    lam: float
    eta: np.ndarray
    Sigma: np.ndarray
    Sigma_ginv: np.ndarray
    optimal_w: np.ndarray

    def optimal_weights(self) -> WeightVector:
        """The optimal scores as a WeightVector, when they are admissible."""
        return WeightVector(tuple(self.optimal_w), f"optimal-{self.distribution}")

    @property
    def max_efficacy(self) -> float:
        return math.sqrt(float(self.eta @ self.Sigma_ginv @ self.eta))


def _normalize(w: np.ndarray) -> np.ndarray:
    w = w - w[0]
    if abs(w[-1]) > 0:
        w = w / w[-1]
    w[np.abs(w) < 1e-12] = 0.0
    return w


def band_scores(dist: str | Distribution, lam: float = 0.5, check: bool = True) -> ScoreModel:
    """eta by adaptive quadrature of phi over each quarter, plus Sigma and the optimal w.

    Because the integrand is -d log f, each band integral also has the closed
    form lam(1-lam)[f(F^-1(a)) - f(F^-1(b))]; with ``check`` the two are compared.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    d = get_distribution(dist)
    c = lam * (1 - lam)
    eta = np.empty(4)
    for g in range(4):
        a, b = g / 4, (g + 1) / 4
        val, err = integrate.quad(lambda u: d.phi(d.ppf(u)), a, b, epsabs=1e-10, epsrel=1e-10, limit=200)
        if not math.isfinite(val) or err > 1e-7:
            raise ArithmeticError(f"quadrature failed on band {g + 1} for {d.name} (error {err:g})")
        eta[g] = c * val
    if check:
        closed = np.array([c * (_pdf_at(d, g / 4) - _pdf_at(d, (g + 1) / 4)) for g in range(4)])
        if np.max(np.abs(closed - eta)) > 1e-7:
            raise ArithmeticError(f"band integrals for {d.name} disagree with the closed form")
    sigma = sigma_matrix(lam)
    ginv = lower_block_ginv(sigma, "Sigma")
    return ScoreModel(d.name, lam, eta, sigma, ginv, _normalize(ginv @ eta))


def _as_array(w: WeightLike | np.ndarray) -> np.ndarray:
    if isinstance(w, np.ndarray):
        return w.astype(float)
    if isinstance(w, (list, tuple)) and not isinstance(w, WeightVector):
        return np.asarray(w, dtype=float)
    return resolve_weights(w).array


def noncentrality(w: WeightLike | np.ndarray, model: ScoreModel, delta: float = 1.0) -> float:
    """delta * w'eta / sqrt(w'Sigma w)."""
    w = _as_array(w)
    q = float(w @ model.Sigma @ w)
    if q <= 1e-15 * max(1.0, float(w @ w)):
        raise ValueError("degenerate scores: w'Sigma w = 0")
    return delta * float(w @ model.eta) / math.sqrt(q)


def relative_efficiency(w1: WeightLike | np.ndarray, w2: WeightLike | np.ndarray, model: ScoreModel) -> float:
    """Asymptotic relative efficiency of scores w1 to scores w2."""
    den = noncentrality(w2, model)
    if den == 0.0:
        raise ZeroDivisionError("reference scores have zero efficacy")
    return (noncentrality(w1, model) / den) ** 2


def efficiency_table(
    dists: Sequence[str] = ("normal", "cauchy"),
    lam: float = 0.5,
    weights: Sequence[str] = ("hl", "mood", "mert"),
) -> dict[str, dict[str, float]]:
    """Efficiency of each preset relative to the optimal scores, per distribution, plus the minimum."""
    models = {d: band_scores(d, lam) for d in dists}
    table: dict[str, dict[str, float]] = {}
    for name in weights:
        w = PRESETS[name] if name in PRESETS else resolve_weights(name)
        row = {d: relative_efficiency(w, m.optimal_w, m) for d, m in models.items()}
        row["min"] = min(row.values())
        table[w.name if name in PRESETS else name] = row
    return table


def finite_sample_gap(N: int, lam: float) -> float:
    """Largest entry of |V_N / N - Sigma| for n = round(lam N)."""
    design = make_design(N, max(1, min(N - 1, round(lam * N))))
    return float(np.max(np.abs(moments(design).V / N - sigma_matrix(lam))))
