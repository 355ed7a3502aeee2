"""
Least-squares power-law fits in log-log coordinates
"""
from typing import NamedTuple, Tuple

import numpy as np
from scipy.stats import linregress

from vpfplab.errors import DegenerateDataError


class PointSummary(NamedTuple):
    n: int
    median: float
    spread: float


class RateFitResult(NamedTuple):
    """
    y ≈ exp(intercept) x^slope

    ``per_point`` holds the per-N medians that were fitted, with their
    interquartile spread
    """
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    per_point: Tuple[PointSummary, ...] = ()

    def as_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'slope_stderr': self.slope_stderr,
            'r_squared': self.r_squared,
            'per_point': [point._asdict() for point in self.per_point],
        }


def summarize(n, values):
    """
    Median and interquartile range of the replications at one N
    """
    values = np.asarray(values, dtype=float)
    upper, lower = np.percentile(values, [75, 25])
    return PointSummary(int(n), float(np.median(values)),
                        float(upper - lower))


def fit_power_law(xs, ys, per_point=()):
    """
    Ordinary least squares of log y against log x

    >>> fit = fit_power_law([1, 2, 4, 8], [1, 4, 16, 64])
    >>> round(fit.slope, 12), round(fit.r_squared, 12)
    (2.0, 1.0)

    :raises DegenerateDataError: if all ys are zero or any value is not
                                 positive
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D of equal length")
    if len(xs) < 3:
        raise ValueError("a slope fit needs at least 3 points, got {}"
                         .format(len(xs)))
    if not np.any(ys):
        raise DegenerateDataError("degenerate zero data")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DegenerateDataError("power-law fits need positive data, got "
                                  "xs={} ys={}".format(xs, ys))
    fit = linregress(np.log(xs), np.log(ys))
    return RateFitResult(float(fit.slope), float(fit.intercept),
                         float(fit.stderr), float(fit.rvalue ** 2),
                         tuple(per_point))
