"""scikit-learn compatible wrappers around the path estimators.

Rows of ``X`` are paths observed on a common uniform grid over
``[0, horizon]`` (``n + 1`` columns). ``fit`` pools the variation sums over
all rows, which for a single row reduces to the per-path estimator;
``transform`` returns one estimate per row.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .estimation import (
    DEFAULT_FLOOR,
    ObservedPath,
    estimate_drift,
    estimate_hurst,
    estimate_sigma,
    estimate_sigma_plugin,
)

__all__ = ["DriftEstimator", "PowerVariationEstimator"]

_TWO_LOG2 = 2.0 * math.log(2.0)


def _as_paths(X, min_columns):
    X = np.asarray(X, dtype=np.float64) if not hasattr(X, "iloc") else X
    if np.ndim(X) == 1:
        X = np.reshape(X, (1, -1))
    return check_array(X, dtype=np.float64, ensure_min_features=min_columns)


class PowerVariationEstimator(TransformerMixin, BaseEstimator):
    """Hurst index and volatility from first- and second-order quadratic variations.

    Parameters
    ----------
    horizon : float, default=1.0
        Length ``T`` of the observation window.
    hurst : float or None, default=None
        Known Hurst index. When None, the estimated index is plugged into the
        volatility estimator.

    Attributes
    ----------
    hurst_ : float
        Pooled Hurst estimate (NaN if the log argument is not positive).
    sigma_ : float
        Pooled volatility estimate.
    v12_, v22_ : float
        Variation sums pooled over the rows of ``X``.
    n_features_in_ : int
        Number of grid nodes per path seen during ``fit``.
    """

    def __init__(self, horizon=1.0, hurst=None):
        self.horizon = horizon
        self.hurst = hurst

    def fit(self, X, y=None):
        X = _as_paths(X, 3)
        d1 = np.diff(X, axis=1)
        d2 = X[:, 2:] - 2.0 * X[:, 1:-1] + X[:, :-2]
        self.v12_ = float(np.sum(d1 * d1))
        self.v22_ = float(np.sum(d2 * d2))
        self.n_features_in_ = X.shape[1]
        self.n_paths_ = X.shape[0]
        arg = 4.0 - self.v22_ / self.v12_ if self.v12_ > 0 else math.nan
        self.hurst_ = math.log(arg) / _TWO_LOG2 if arg > 0 else math.nan
        h = self.hurst if self.hurst is not None else self.hurst_
        n = X.shape[1] - 1
        if math.isfinite(h):
            self.sigma_ = math.sqrt(n ** (2.0 * h - 1.0) * self.v12_ / self.n_paths_) / self.horizon**h
        else:
            self.sigma_ = math.nan
        return self

    def transform(self, X):
        """Per-path estimates, shape ``(n_paths, 2)``: columns ``[H_hat, sigma_hat]``."""
        check_is_fitted(self, "hurst_")
        X = _as_paths(X, 3)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} grid nodes, fitted with {self.n_features_in_}")
        out = np.empty((X.shape[0], 2))
        for i, row in enumerate(X):
            obs = ObservedPath(row, self.horizon)
            out[i, 0] = estimate_hurst(obs).estimate
            if self.hurst is not None:
                out[i, 1] = estimate_sigma(obs, self.hurst).estimate
            else:
                out[i, 1] = estimate_sigma_plugin(obs).estimate
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["hurst", "sigma"], dtype=object)


class DriftEstimator(TransformerMixin, BaseEstimator):
    """Drift coefficient ``X(T) / int_0^T dt / X(t)`` with a floored Riemann sum.

    ``fit`` stores the pooled ratio ``sum X_i(T) / sum I_i`` in ``drift_``.
    """

    def __init__(self, horizon=1.0, floor=DEFAULT_FLOOR):
        self.horizon = horizon
        self.floor = floor

    def fit(self, X, y=None):
        X = _as_paths(X, 2)
        results = [estimate_drift(ObservedPath(row, self.horizon), self.floor) for row in X]
        self.integral_sums_ = np.array([r.diagnostics["integral_sum"] for r in results])
        self.drift_ = float(np.sum(X[:, -1]) / np.sum(self.integral_sums_))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Per-path drift estimates, shape ``(n_paths, 1)``."""
        check_is_fitted(self, "drift_")
        X = _as_paths(X, 2)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} grid nodes, fitted with {self.n_features_in_}")
        est = [estimate_drift(ObservedPath(row, self.horizon), self.floor).estimate for row in X]
        return np.asarray(est).reshape(-1, 1)

    def get_feature_names_out(self, input_features=None):
        return np.array(["drift"], dtype=object)
