"""Histogram, normal QQ pairs and normality summaries.

Plot-ready numbers only; rendering is left to the caller.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from rglab.exceptions import DegenerateVarianceError, ParameterError

__all__ = [
    "HistogramData",
    "NormalitySummary",
    "histogram",
    "normality_summary",
    "qq_normal",
    "sturges_bins",
]

_DEGENERATE_WIDTH = 1e-9


@dataclass(frozen=True, eq=False)
class HistogramData:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class NormalitySummary:
    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float

    def as_dict(self):
        return {
            "mean": self.mean,
            "sd": self.sd,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_distance": self.ks_distance,
        }


def _values(values):
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ParameterError("need at least one value")
    if not np.all(np.isfinite(values)):
        raise ParameterError("values must be finite")
    return values


def sturges_bins(m):
    return int(math.ceil(1 + math.log2(m)))


def histogram(values, bin_count=None):
    """Equal-width bins over [min, max], the last bin closed on the right.

    ``bin_count`` defaults to Sturges' rule.  A constant input gets the range
    ``[v, v + 1e-9 * max(1, |v|)]`` so every value lands in the first bin.
    """
    values = _values(values)
    if bin_count is None:
        bin_count = sturges_bins(values.size)
    if int(bin_count) != bin_count or bin_count < 1:
        raise ParameterError(f"bin_count must be a positive integer, got {bin_count!r}")
    lo, hi = values.min(), values.max()
    # 1e-9 is absolute near unit scale and relative beyond it, so the bins stay
    # representable for large-magnitude inputs
    span = _DEGENERATE_WIDTH * max(1.0, abs(lo), abs(hi))
    if hi - lo < span:
        hi = lo + span
    counts, edges = np.histogram(values, bins=int(bin_count), range=(lo, hi))
    return HistogramData(edges=edges, counts=counts)


def qq_normal(values):
    """``(m, 2)`` array of (theoretical, sample) quantiles, ascending.

    The i-th order statistic of ``m`` is paired with ``Phi^-1((i - 0.5) / m)``.
    """
    values = _values(values)
    m = values.size
    if m < 2:
        raise ParameterError("a QQ plot needs at least two values")
    theoretical = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    return np.column_stack([theoretical, np.sort(values)])


def normality_summary(values):
    """Moment statistics (1/m divisors) and the KS distance to the fitted normal.

    The KS distance is descriptive: parameters are fitted from the same data
    and no Lilliefors correction is applied.
    """
    values = _values(values)
    if values.size < 8:
        raise ParameterError(f"need at least 8 values, got {values.size}")
    mean = float(values.mean())
    sd = float(values.std())
    if sd == 0:
        raise DegenerateVarianceError("values are constant")
    z = (values - mean) / sd
    return NormalitySummary(
        mean=mean,
        sd=sd,
        skewness=float(np.mean(z ** 3)),
        excess_kurtosis=float(np.mean(z ** 4) - 3.0),
        ks_distance=float(stats.kstest(z, "norm").statistic),
    )
