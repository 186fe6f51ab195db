"""scikit-learn compatible front-ends.

``CorrelationSelector`` keeps the ``u`` features with the largest absolute
correlation to the target and plugs into pipelines like ``SelectKBest``.
``EmpiricalBayesOverlap`` fits the Fisher-scale prior width to a dataset and
predicts the expected correct-selection proportion at any sample size.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from rglab.correlation import MIN_SAMPLES, CorrelationVector, Dataset, correlate_all
from rglab.exceptions import ParameterError
from rglab.selection import MODES, SCALES, approximated_replicate, estimate_sigma_q, top_u_indices

__all__ = ["CorrelationSelector", "EmpiricalBayesOverlap"]


def _fit_correlations(estimator, X, y):
    X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
    if X.shape[0] < MIN_SAMPLES:
        raise ParameterError(f"need at least {MIN_SAMPLES} samples, got {X.shape[0]}")
    estimator.n_features_in_ = X.shape[1]
    return correlate_all(Dataset(X, y))


class CorrelationSelector(SelectorMixin, BaseEstimator):
    """Select the ``n_features_to_select`` features most correlated (in absolute value) with y.

    Attributes
    ----------
    correlations_ : ndarray of shape (n_features,)
        Sample correlations (1/n moments), clamped inside (-1, 1).
    fisher_ : ndarray of shape (n_features,)
        Their Fisher transforms.
    support_ : ndarray
        Selected column indices, ascending.
    """

    def __init__(self, n_features_to_select=10):
        self.n_features_to_select = n_features_to_select

    def fit(self, X, y):
        r = _fit_correlations(self, X, y)
        if not 0 < self.n_features_to_select <= r.values.size:
            raise ParameterError(
                f"n_features_to_select must be in [1, {r.values.size}], "
                f"got {self.n_features_to_select}"
            )
        self.correlations_ = r.values
        self.fisher_ = r.fisher().values
        self.support_ = top_u_indices(np.abs(r.values), self.n_features_to_select)
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.support_] = True
        return mask


class EmpiricalBayesOverlap(BaseEstimator):
    """Empirical-Bayes estimate of the expected top-``n_selected`` overlap.

    After ``fit``, ``sigma_q_`` holds the fitted prior width and
    ``overlap_mean_`` / ``overlap_sd_`` the approximated estimator at the
    observed sample size.  ``predict`` re-runs the approximation at other
    sample sizes, which is how the method is used for sample-size planning.

    Parameters
    ----------
    n_selected : int
    mode : {"paper_literal", "synthetic"}
    scale : {"raw", "fisher"}
    n_replicates : int
    random_state : int, Generator or None
    """

    def __init__(self, n_selected=100, mode="paper_literal", scale="raw", n_replicates=10,
                 random_state=None):
        self.n_selected = n_selected
        self.mode = mode
        self.scale = scale
        self.n_replicates = n_replicates
        self.random_state = random_state

    def _check_params(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.scale not in SCALES:
            raise ParameterError(f"scale must be one of {SCALES}, got {self.scale!r}")
        if self.n_replicates < 1:
            raise ParameterError("n_replicates must be positive")

    def _overlaps(self, n, rng):
        r = CorrelationVector(self.correlations_, n)
        return np.array([
            approximated_replicate(r, self.n_selected, self.mode, self.scale, rng,
                                   sigma_q=self.sigma_q_)
            for _ in range(self.n_replicates)
        ])

    def fit(self, X, y):
        self._check_params()
        r = _fit_correlations(self, X, y)
        if not 0 < self.n_selected <= r.values.size:
            raise ParameterError(f"n_selected must be in [1, {r.values.size}]")
        est = estimate_sigma_q(r, self.scale)
        self.correlations_ = r.values
        self.n_samples_fit_ = r.n
        self.sigma_q_ = est.value
        self.sigma_q_clamped_ = est.clamped
        self._rng = np.random.default_rng(self.random_state)
        self.overlaps_ = self._overlaps(r.n, self._rng)
        self.overlap_mean_ = float(self.overlaps_.mean())
        self.overlap_sd_ = float(self.overlaps_.std())
        return self

    def predict(self, n_samples):
        """Mean approximated overlap at each sample size in ``n_samples``."""
        check_is_fitted(self, "sigma_q_")
        n_samples = np.atleast_1d(np.asarray(n_samples))
        if np.any(n_samples < MIN_SAMPLES):
            raise ParameterError(f"every sample size must be >= {MIN_SAMPLES}")
        return np.array([self._overlaps(int(n), self._rng).mean() for n in n_samples])
