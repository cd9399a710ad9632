"""scikit-learn adapters over the holonomy computations.

Nothing is learned: ``fit`` only validates input and records the feature
count, so both estimators compose with pipelines and ``get_params`` /
``set_params`` while staying pure functions of their parameters.
Input ``X`` is a column of K levels, shape ``(n_samples, 1)``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .holonomy import ChainKind, classify_chain, delta_theta

PHASE_FEATURES = ("T", "dynamic", "geometric", "delta_theta", "delta_theta_reconstructed", "discrepancy")


def _levels(X) -> np.ndarray:
    X = check_array(X, ensure_2d=True, dtype=float)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single column of K levels, got {X.shape[1]} columns")
    return X[:, 0]


class DeltaThetaTransformer(TransformerMixin, BaseEstimator):
    """Map levels K to ``(T, dynamic, geometric, delta_theta, reconstructed, discrepancy)``."""

    def __init__(self, a=2.0, tol=1e-10, reconstruct=True, lobe=1):
        self.a = a
        self.tol = tol
        self.reconstruct = reconstruct
        self.lobe = lobe

    def fit(self, X, y=None):
        _levels(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        out = []
        for K in _levels(X):
            r = delta_theta(self.a, float(K), tol=self.tol, lobe=self.lobe, reconstruct=self.reconstruct)
            out.append([getattr(r, name) for name in PHASE_FEATURES])
        return np.asarray(out, dtype=float).reshape(-1, len(PHASE_FEATURES))

    def get_feature_names_out(self, input_features=None):
        return np.asarray(PHASE_FEATURES, dtype=object)


class ChainClassifier(ClassifierMixin, BaseEstimator):
    """Predict the chain type (periodic, quasi-periodic, homoclinic, reeb-orbit) at each level."""

    def __init__(self, a=2.0, tol=1e-6, q_max=64, int_tol=1e-10, p_flag=1):
        self.a = a
        self.tol = tol
        self.q_max = q_max
        self.int_tol = int_tol
        self.p_flag = p_flag

    def fit(self, X, y=None):
        _levels(X)
        self.n_features_in_ = 1
        self.classes_ = np.array([k.value for k in ChainKind])
        return self

    def classify(self, X) -> list:
        check_is_fitted(self, "classes_")
        return [
            classify_chain(self.a, float(K), P_flag=self.p_flag, tol=self.tol, q_max=self.q_max, int_tol=self.int_tol)
            for K in _levels(X)
        ]

    def predict(self, X):
        return np.array([c.kind.value for c in self.classify(X)], dtype=object)
