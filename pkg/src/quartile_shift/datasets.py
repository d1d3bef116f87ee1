"""Bundled example data."""
from __future__ import annotations

from .shift_table import TwoSample

# Centromere-positive signals per 1000 binucleated cells: 7 unexposed controls
# and 16 residents of buildings made with 60Co-contaminated steel
# (Chang et al., 1999).
RADIATION_CONTROL = (3.2, 5.1, 8.3, 8.8, 9.5, 11.9, 14.0)
RADIATION_EXPOSED = (
    3.7, 6.8, 8.4, 8.5, 10.0, 11.3, 12.0, 12.5,
    18.7, 19.0, 20.0, 22.7, 24.0, 31.8, 33.3, 36.0,
)


def radiation() -> TwoSample:
    return TwoSample(RADIATION_CONTROL, RADIATION_EXPOSED)


EXAMPLES = {"radiation": radiation}
