"""Pearson correlations, the Fisher transform and empirical moments.

All moments use the 1/n divisor (population-moment convention), not the
1/(n-1) divisor most libraries default to.  Correlations are unaffected by the
choice; variances and fourth-order covariances are not.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from rglab.asymptotics import PairwiseMoments
from rglab.exceptions import (
    CorrelationClampWarning,
    DegenerateVarianceError,
    DomainError,
    ShapeError,
)

__all__ = [
    "CLAMP_EPS",
    "CorrelationVector",
    "Dataset",
    "FisherVector",
    "clamp_correlations",
    "correlate_all",
    "fisher",
    "fisher_inverse",
    "pairwise_moments",
    "pearson",
]

# |r| = 1 is pulled to 1 - CLAMP_EPS so the Fisher transform stays finite
CLAMP_EPS = 1e-12

MIN_SAMPLES = 4

_CHUNK_COLUMNS = 2048


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` observations of ``k`` features plus a target.

    Parameters
    ----------
    features : array_like, shape (n, k)
    target : array_like, shape (n,)
    """

    features: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        target = np.asarray(self.target, dtype=float)
        if features.ndim != 2:
            raise ShapeError(f"features must be 2-D (n, k), got shape {features.shape}")
        if target.ndim != 1:
            raise ShapeError(f"target must be 1-D, got shape {target.shape}")
        if features.shape[0] != target.shape[0]:
            raise ShapeError(
                f"features have {features.shape[0]} rows but target has {target.shape[0]}"
            )
        if features.shape[0] < MIN_SAMPLES:
            raise ShapeError(f"need n >= {MIN_SAMPLES} observations, got {features.shape[0]}")
        if features.shape[1] < 1:
            raise ShapeError("need at least one feature column")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(target))):
            raise DomainError("dataset contains non-finite entries")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "target", target)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def k(self):
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class CorrelationVector:
    """Sample correlations of each feature with the target, all inside (-1, 1)."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError("correlation values must be 1-D")
        if np.any(np.abs(values) >= 1) or not np.all(np.isfinite(values)):
            raise DomainError("correlation values must lie strictly inside (-1, 1)")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    def fisher(self):
        return FisherVector(fisher(self.values))


@dataclass(frozen=True, eq=False)
class FisherVector:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError("Fisher values must be 1-D")
        if not np.all(np.isfinite(values)):
            raise DomainError("Fisher values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    def correlations(self):
        return fisher_inverse(self.values)


def fisher(h):
    """Fisher's z-transform ``0.5 * log((1 + h) / (1 - h))``.

    Accepts a scalar or an array; raises ``DomainError`` naming the first
    offending value when any ``|h| >= 1``.
    """
    arr = np.asarray(h, dtype=float)
    bad = ~(np.abs(arr) < 1)
    if np.any(bad):
        raise DomainError(f"fisher() needs |h| < 1, got {arr[bad].flat[0]!r}")
    out = np.arctanh(arr)
    return float(out) if out.ndim == 0 else out


def fisher_inverse(z):
    """Inverse Fisher transform, ``tanh(z)``."""
    arr = np.asarray(z, dtype=float)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        raise DomainError(f"fisher_inverse() needs a finite argument, got {arr[bad].flat[0]!r}")
    out = np.tanh(arr)
    return float(out) if out.ndim == 0 else out


def clamp_correlations(values, warn=True):
    """Pull values of magnitude >= 1 - CLAMP_EPS to +/-(1 - CLAMP_EPS).

    Floating-point overshoot beyond +/-1 is absorbed by the same clamp.
    """
    values = np.array(values, dtype=float)
    limit = 1.0 - CLAMP_EPS
    hit = np.abs(values) > limit
    if np.any(hit):
        if warn:
            where = np.flatnonzero(hit)
            warnings.warn(
                f"{where.size} correlation(s) of magnitude ~1 clamped to +/-{limit!r} "
                f"(first at index {where[0]})",
                CorrelationClampWarning,
                stacklevel=3,
            )
        values[hit] = np.sign(values[hit]) * limit
    return values


def _as_vector(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {x.shape}")
    return x


def pearson(x, y):
    """Sample correlation with 1/n moments.

    Computed as ``(m_xy - m_x m_y) / sqrt((m_xx - m_x^2)(m_yy - m_y^2))`` in its
    centred form, which is algebraically identical and avoids cancellation.
    The result is clipped to [-1, 1].
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < MIN_SAMPLES:
        raise ShapeError(f"need n >= {MIN_SAMPLES} observations, got {x.shape[0]}")
    if np.ptp(x) == 0:
        raise DegenerateVarianceError("x is constant")
    if np.ptp(y) == 0:
        raise DegenerateVarianceError("y is constant")
    xc = x - x.mean()
    yc = y - y.mean()
    s_xy = np.mean(xc * yc)
    s_xx = np.mean(xc * xc)
    s_yy = np.mean(yc * yc)
    r = s_xy / np.sqrt(s_xx * s_yy)
    return float(np.clip(r, -1.0, 1.0))


def correlate_all(data):
    """Correlate every feature column of ``data`` with its target.

    Columns are processed in fixed-width blocks so peak memory stays bounded
    for k in the tens of thousands; each entry equals ``pearson`` on that
    column.  Entries at +/-1 are clamped (with a ``CorrelationClampWarning``).
    """
    y = data.target
    if np.ptp(y) == 0:
        raise DegenerateVarianceError("target is constant")
    yc = y - y.mean()
    s_yy = np.mean(yc * yc)
    X = data.features
    out = np.empty(data.k)
    for start in range(0, data.k, _CHUNK_COLUMNS):
        block = X[:, start:start + _CHUNK_COLUMNS]
        const = np.ptp(block, axis=0) == 0
        if np.any(const):
            col = start + int(np.flatnonzero(const)[0])
            raise DegenerateVarianceError(f"feature column {col} is constant")
        # one contiguous row per column: each reduction sees only its own column,
        # so results do not depend on where the column sits in the matrix
        rows = block.T.copy()
        rows -= rows.mean(axis=1, keepdims=True)
        s_xy = (rows * yc).mean(axis=1)
        s_xx = (rows * rows).mean(axis=1)
        out[start:start + rows.shape[0]] = s_xy / np.sqrt(s_xx * s_yy)
    np.clip(out, -1.0, 1.0, out=out)
    return CorrelationVector(clamp_correlations(out), data.n)


def _cov(a, b):
    return float(np.mean(a * b) - np.mean(a) * np.mean(b))


def pairwise_moments(data, i, j):
    """Empirical plug-in estimates of every moment in the independence condition.

    The three columns (feature ``i``, feature ``j``, target) are centred first,
    so the estimates follow the mean-zero convention.  All divisors are 1/n.
    """
    k = data.k
    for idx in (i, j):
        if not 0 <= idx < k:
            raise ShapeError(f"feature index {idx} out of range for k={k}")
    xi = data.features[:, i]
    xj = data.features[:, j]
    y = data.target
    for vec, name in ((xi, f"feature column {i}"), (xj, f"feature column {j}"), (y, "target")):
        if np.ptp(vec) == 0:
            raise DegenerateVarianceError(f"{name} is constant")
    xi = xi - xi.mean()
    xj = xj - xj.mean()
    y = y - y.mean()

    var_xi = float(np.mean(xi * xi))
    var_xj = float(np.mean(xj * xj))
    var_y = float(np.mean(y * y))
    rho = clamp_correlations(
        [
            np.mean(xi * y) / np.sqrt(var_xi * var_y),
            np.mean(xj * y) / np.sqrt(var_xj * var_y),
            np.mean(xi * xj) / np.sqrt(var_xi * var_xj),
        ]
    )
    xi2, xj2, y2 = xi * xi, xj * xj, y * y
    xiy, xjy = xi * y, xj * y
    return PairwiseMoments(
        var_xi=var_xi,
        var_xj=var_xj,
        var_y=var_y,
        rho_i=float(rho[0]),
        rho_j=float(rho[1]),
        rho_xixj=float(rho[2]),
        c_xi2_xj2=_cov(xi2, xj2),
        c_y2_xj2=_cov(y2, xj2),
        c_xiy_xj2=_cov(xiy, xj2),
        c_xi2_y2=_cov(xi2, y2),
        c_y2_y2=_cov(y2, y2),
        c_xiy_y2=_cov(xiy, y2),
        c_xi2_xjy=_cov(xi2, xjy),
        c_y2_xjy=_cov(y2, xjy),
        c_xiy_xjy=_cov(xiy, xjy),
    )
