"""Seeded samplers for the generative models and their analytic ground truths.

Feature indices are 0-based throughout.
"""

from dataclasses import dataclass

import numpy as np

from rglab.asymptotics import PSD_TOL, SYM_TOL
from rglab.correlation import MIN_SAMPLES, Dataset, FisherVector
from rglab.exceptions import ParameterError, ValidityError

__all__ = [
    "GaussianSpec",
    "PriorSpec",
    "SparseLinearSpec",
    "sample_gaussian_dataset",
    "sample_prior_fisher",
    "sample_sparse_dataset",
    "sample_support",
    "synthetic_correlation_noise",
    "true_correlations_sparse",
]


def _check_support_size(k, u):
    if not (isinstance(k, (int, np.integer)) and isinstance(u, (int, np.integer))):
        raise ParameterError(f"k and u must be integers, got k={k!r}, u={u!r}")
    if not 0 < u < k:
        raise ParameterError(f"support size must satisfy 0 < u < k, got u={u}, k={k}")


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < MIN_SAMPLES:
        raise ParameterError(f"sample size must be an integer >= {MIN_SAMPLES}, got {n!r}")


@dataclass(frozen=True, eq=False)
class SparseLinearSpec:
    """Target equals the sum of ``u`` out of ``k`` independent standard-normal features.

    ``support`` fixes the active features; when ``None`` a fresh uniformly
    random support is drawn for each sampled dataset.
    """

    k: int
    u: int
    support: tuple = None

    def __post_init__(self):
        _check_support_size(self.k, self.u)
        if self.support is not None:
            support = np.asarray(self.support)
            if support.ndim != 1 or support.size != self.u:
                raise ParameterError(f"support must hold exactly u={self.u} indices")
            if np.unique(support).size != self.u:
                raise ParameterError("support indices must be distinct")
            if support.min() < 0 or support.max() >= self.k:
                raise ParameterError(f"support indices must lie in [0, {self.k})")
            object.__setattr__(self, "support", tuple(int(i) for i in np.sort(support)))

    def with_support(self, support):
        return SparseLinearSpec(self.k, self.u, tuple(support))


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Zero-mean Gaussian law of (X_1, ..., X_k, Y); the target is the last coordinate."""

    covariance: np.ndarray

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] < 2:
            raise ValidityError(f"covariance must be square with size >= 2, got {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise ValidityError("covariance has non-finite entries")
        if np.max(np.abs(cov - cov.T)) > SYM_TOL * max(1.0, np.max(np.abs(cov))):
            raise ValidityError("covariance is not symmetric")
        cov = (cov + cov.T) / 2.0
        eig = np.linalg.eigvalsh(cov)
        if eig[0] < -PSD_TOL:
            raise ValidityError(
                "covariance is not positive semi-definite "
                f"(min eigenvalue {eig[0]:.6g}); a covariance or correlation matrix must be PSD"
            )
        object.__setattr__(self, "covariance", cov)

    @property
    def dimension(self):
        return self.covariance.shape[0]

    @property
    def k(self):
        return self.dimension - 1

    @classmethod
    def from_correlations(cls, target_corr, feature_corr=None):
        """Unit-variance spec from feature-target correlations and a feature correlation matrix.

        ``feature_corr`` may be a k x k matrix, a scalar (all off-diagonal
        entries equal) or ``None`` (independent features).
        """
        rho = np.atleast_1d(np.asarray(target_corr, dtype=float))
        k = rho.size
        if feature_corr is None:
            R = np.eye(k)
        elif np.ndim(feature_corr) == 0:
            R = np.full((k, k), float(feature_corr))
            np.fill_diagonal(R, 1.0)
        else:
            R = np.asarray(feature_corr, dtype=float)
        cov = np.eye(k + 1)
        cov[:k, :k] = R
        cov[:k, k] = rho
        cov[k, :k] = rho
        return cls(cov)


@dataclass(frozen=True)
class PriorSpec:
    """Fisher-scale prior: ``phi(rho_i) ~ N(theta, sigma_q**2)`` i.i.d. over ``k`` features."""

    sigma_q: float
    k: int
    theta: float = 0.0

    def __post_init__(self):
        if not self.sigma_q > 0:
            raise ParameterError(f"sigma_q must be positive, got {self.sigma_q!r}")
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")


def sample_support(k, u, rng):
    """Uniformly random ``u``-subset of ``range(k)``, sorted ascending."""
    _check_support_size(k, u)
    return np.sort(rng.choice(k, size=u, replace=False))


def sample_sparse_dataset(spec, n, rng):
    """Draw ``n`` rows of the sparse linear model.

    Returns ``(dataset, support)``.  The support is drawn first (when the spec
    does not fix one), then the ``n x k`` feature matrix.
    """
    _check_n(n)
    if spec.support is None:
        support = sample_support(spec.k, spec.u, rng)
    else:
        support = np.asarray(spec.support)
    X = rng.standard_normal((n, spec.k))
    y = X[:, support].sum(axis=1)
    return Dataset(X, y), support


def true_correlations_sparse(spec):
    """Population correlations: ``1/sqrt(u)`` on the support, 0 elsewhere.

    Returned as a plain array because the population value is exactly 1 when
    ``u == 1``.
    """
    if spec.support is None:
        raise ParameterError("true correlations need a known support")
    rho = np.zeros(spec.k)
    rho[list(spec.support)] = 1.0 / np.sqrt(spec.u)
    return rho


def _factor(cov):
    w, V = np.linalg.eigh(cov)
    w = np.where((w < 0) & (w >= -PSD_TOL), 0.0, w)
    return V * np.sqrt(w)


def sample_gaussian_dataset(spec, n, rng):
    """``n`` i.i.d. rows of N(0, covariance); features first, target last."""
    if not isinstance(spec, GaussianSpec):
        spec = GaussianSpec(spec)
    _check_n(n)
    L = _factor(spec.covariance)
    Z = rng.standard_normal((n, spec.dimension))
    draws = Z @ L.T
    return Dataset(draws[:, :-1], draws[:, -1])


def sample_prior_fisher(spec, rng):
    return FisherVector(spec.theta + spec.sigma_q * rng.standard_normal(spec.k))


def synthetic_correlation_noise(fisher_true, n, rng):
    """Add independent N(0, 1/(n-3)) noise to Fisher-scale true values."""
    _check_n(n)
    values = np.asarray(getattr(fisher_true, "values", fisher_true), dtype=float)
    return FisherVector(values + rng.standard_normal(values.shape) / np.sqrt(n - 3))
