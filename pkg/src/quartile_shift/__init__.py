"""Exact and large-sample shift inference from pooled-quartile tables."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .attributable import AttributableResult, attributable_bound, mw_null_distribution
from .gmm import GmmResult, UnboundedMinimizerError, gmm_confidence_set, gmm_difference_test, gmm_estimate
from .hypergeom import (
    BudgetExceededError,
    CellCounts,
    QuartileDesign,
    enumerate_support,
    g2_null_distribution,
    make_design,
    moments,
    pmf,
)
from .rank import (
    HL,
    MERT,
    MOOD,
    ConfidenceSet,
    WeightVector,
    deviate_test,
    fit_test,
    hl_estimate,
    invert_rank_test,
)
from .shift_table import TwoSample, build_table, change_points, mann_whitney_count, trajectory

__all__ = [
    "BACKEND", "AttributableResult", "attributable_bound", "mw_null_distribution", "GmmResult",
    "UnboundedMinimizerError", "gmm_confidence_set", "gmm_difference_test", "gmm_estimate",
    "BudgetExceededError", "CellCounts", "QuartileDesign", "enumerate_support", "g2_null_distribution",
    "make_design", "moments", "pmf", "HL", "MERT", "MOOD", "ConfidenceSet", "WeightVector",
    "deviate_test", "fit_test", "hl_estimate", "invert_rank_test", "TwoSample", "build_table",
    "change_points", "mann_whitney_count", "trajectory",
]
