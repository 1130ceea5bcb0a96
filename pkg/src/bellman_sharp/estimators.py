"""scikit-learn adapters.

``BellmanTransformer`` maps rows ``(x1, x2, x3)`` to Bellman values, so it can
sit inside a ``Pipeline``.  ``MajorantTransformer`` does the same for rows
``(x, y)`` and the two-variable majorant.  Both are stateless: ``fit`` only
validates the parameters and records ``n_features_in_``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bellman import evaluate_batch
from .domain import Params
from .majorant import eval_U


class BellmanTransformer(TransformerMixin, BaseEstimator):
    """Rows ``(x1, x2, x3)`` to ``B(x)``.

    Parameters
    ----------
    p : float
    tau : float
    with_metadata : bool
        Also return ``omega``, ``beta``, ``b`` and the region code as columns.
    """

    def __init__(self, p=3.0, tau=0.0, with_metadata=False):
        self.p = p
        self.tau = tau
        self.with_metadata = with_metadata

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 columns (x1, x2, x3), got {X.shape[1]}")
        self.params_ = Params(self.p, self.tau)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        res = evaluate_batch(X[:, 0], X[:, 1], X[:, 2], self.params_)
        if not self.with_metadata:
            return res.value[:, None]
        return np.column_stack([res.value, res.omega, res.beta, res.b, res.region.astype(float)])

    def get_feature_names_out(self, input_features=None):
        names = ["B"]
        if self.with_metadata:
            names += ["omega", "beta", "b", "region"]
        return np.asarray(names, dtype=object)


class MajorantTransformer(TransformerMixin, BaseEstimator):
    """Rows ``(x, y)`` to ``U(x, y)``."""

    def __init__(self, p=3.0, tau=0.0):
        self.p = p
        self.tau = tau

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (x, y), got {X.shape[1]}")
        self.params_ = Params(self.p, self.tau)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.asarray(eval_U(X[:, 0], X[:, 1], self.params_)).reshape(-1, 1)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(["U"], dtype=object)
