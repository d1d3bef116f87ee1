"""Chi-square tails for 1, 2 and 3 degrees of freedom, in closed form."""
import math
from statistics import NormalDist

_STD_NORMAL = NormalDist()


def chi2_sf(x, df):
    """Upper tail Pr(chi2_df >= x) for df in {1, 2, 3}."""
    if x <= 0:
        return 1.0
    if df == 1:
        return math.erfc(math.sqrt(x / 2.0))
    if df == 2:
        return math.exp(-x / 2.0)
    if df == 3:
        return math.erfc(math.sqrt(x / 2.0)) + math.sqrt(2.0 * x / math.pi) * math.exp(-x / 2.0)
    raise ValueError(f"df must be 1, 2 or 3, got {df}")


def chi2_1_quantile(level):
    """The ``level`` quantile of chi-square on one degree of freedom."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = _STD_NORMAL.inv_cdf(0.5 + level / 2.0)
    return z * z


def normal_two_sided_p(z):
    return math.erfc(abs(z) / math.sqrt(2.0))
