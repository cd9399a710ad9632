"""Fefferman metric of the left-invariant family and its geodesic Hamiltonian.

All matrices are written in the left-invariant basis ``(e1, e2, e3, d/dgamma)``.
"""
from __future__ import annotations

import numpy as np

from .cr_structure import check_modulus
from .lie_group import ReducedState

__all__ = [
    "ReducedState",
    "metric_matrix",
    "inverse_metric_matrix",
    "hamiltonian",
    "sigma_coefficient",
    "metric_from_forms",
    "sym",
]


def metric_matrix(a: float) -> np.ndarray:
    a = check_modulus(a)
    g = np.zeros((4, 4))
    g[0, 0] = 1.0 / a
    g[1, 1] = a
    g[2, 2] = 0.5 * (a + 1.0 / a)
    g[2, 3] = g[3, 2] = -2.0 / 3.0
    return g


def inverse_metric_matrix(a: float) -> np.ndarray:
    a = check_modulus(a)
    h = np.zeros((4, 4))
    h[0, 0] = a
    h[1, 1] = 1.0 / a
    h[2, 3] = h[3, 2] = -1.5
    h[3, 3] = -9.0 / 8.0 * (a + 1.0 / a)
    return h


def hamiltonian(a: float, s) -> float:
    """Geodesic Hamiltonian ``H_a = 1/2 g^{ij} p_i p_j``; broadcasts over ``s[..., 4]``."""
    a = check_modulus(a)
    s = np.asarray(s, dtype=float)
    M1, M2, M3, P = np.moveaxis(s, -1, 0)
    return 0.5 * (a * M1 * M1 + M2 * M2 / a - 3.0 * M3 * P - 9.0 / 8.0 * (a + 1.0 / a) * P * P)


def sigma_coefficient(a: float) -> float:
    """Coefficient ``f`` of ``theta`` in ``sigma = dgamma/3 + f theta``."""
    a = check_modulus(a)
    return (a + 1.0 / a) / 8.0


def sym(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Symmetric product ``alpha . beta = (alpha x beta + beta x alpha) / 2`` of covectors."""
    return 0.5 * (np.outer(alpha, beta) + np.outer(beta, alpha))


def metric_from_forms(a: float) -> np.ndarray:
    """Rebuild the metric as ``L_theta + 4 theta . sigma`` from its one-forms.

    ``theta = -w3`` and ``sigma = dgamma/3 + f theta``; the Levi form is
    extended by zero in the Reeb and fibre directions.
    """
    a = check_modulus(a)
    w1, w2, w3, dgamma = np.eye(4)
    theta = -w3
    sigma = dgamma / 3.0 + sigma_coefficient(a) * theta
    levi = np.outer(w1, w1) / a + a * np.outer(w2, w2)
    return levi + 4.0 * sym(theta, sigma)
