"""Closed-form chains used as oracles.

At ``a = 1`` the Hamiltonian splits as ``H = H0 - H1`` with ``H0 = K/2`` and
``H1 = (M3 + 3P/2)^2 / 2``, two commuting pieces, so the chain through the
identity is ``exp(t alpha) exp(-t beta)`` with ``alpha = M1 e1 + M2 e2 + M3 e3``
and ``beta = (M3 + 3P/2) e3``.  These are geometric circles of S^3 lying on
complex lines for the complex structure given by right multiplication by ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ParameterError
from .lie_group import GroupElement, quat_mul, su2_exp

RESONANCE_TOL = 1e-10
K_UNIT = np.array([0.0, 0.0, 0.0, 1.0])


class A1ChainSpec(NamedTuple):
    M1: float
    M2: float
    M3: float
    P: float

    @property
    def alpha(self) -> np.ndarray:
        return np.array([self.M1, self.M2, self.M3])

    @property
    def beta(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.M3 + 1.5 * self.P])

    def resonance_residual(self) -> float:
        K = self.M1**2 + self.M2**2 + self.M3**2
        return abs(K - (self.M3 + 1.5 * self.P) ** 2)

    @classmethod
    def on_paraboloid(cls, M1: float, M2: float, P: float = 1.0) -> "A1ChainSpec":
        """Solve ``H = 0`` at ``a = 1`` for ``M3``."""
        if P == 0:
            raise ParameterError("P = 0 admits only M1 = M2 = 0")
        M3 = (M1 * M1 + M2 * M2 - 2.25 * P * P) / (3.0 * P)
        return cls(float(M1), float(M2), float(M3), float(P))


def chain_a1(spec: A1ChainSpec, t) -> np.ndarray:
    """SU(2) part of the ``a = 1`` chain through the identity, at time(s) ``t``."""
    spec = A1ChainSpec(*spec)
    if spec.resonance_residual() > RESONANCE_TOL:
        raise ParameterError(
            f"spec violates the resonance constraint K = (M3 + 3P/2)^2 by {spec.resonance_residual():.3e}"
        )
    t = np.asarray(t, dtype=float)[..., None]
    return quat_mul(su2_exp(t * spec.alpha), su2_exp(-t * spec.beta))


def chain_a1_period(spec: A1ChainSpec) -> float:
    """Closing time ``2 pi / |alpha|`` of the ``a = 1`` chain."""
    return 2.0 * np.pi / float(np.linalg.norm(A1ChainSpec(*spec).alpha))


def h0_flow(q, M, t):
    """Flow of ``H0 = K/2`` on the left-trivialized cotangent bundle."""
    M = np.asarray(M, dtype=float)
    return quat_mul(q, su2_exp(t * M)), M


def h1_flow(q, M, s, P: float = 1.0):
    """Flow of ``-H1`` with ``H1 = (M3 + 3P/2)^2 / 2``."""
    M = np.asarray(M, dtype=float)
    b = M[2] + 1.5 * P
    c, sn = np.cos(b * s), np.sin(b * s)
    M_new = np.array([c * M[0] - sn * M[1], sn * M[0] + c * M[1], M[2]])
    return quat_mul(q, su2_exp(np.array([0.0, 0.0, -b * s]))), M_new


def hopf_chain(g0: GroupElement | np.ndarray, lam: float, t) -> np.ndarray:
    """The Hopf fibre ``g0 exp(lam t e3)`` (a Reeb orbit, since the Reeb field is ``-e3``)."""
    q0 = g0.q if isinstance(g0, GroupElement) else np.asarray(g0, dtype=float)
    t = np.asarray(t, dtype=float)[..., None]
    return quat_mul(q0, su2_exp(lam * t * np.array([0.0, 0.0, 1.0])))


# -- circle and complex-line checks --------------------------------------------------------

@dataclass
class CircleFit:
    center: np.ndarray
    u: np.ndarray  # orthonormal basis of the plane of the circle
    v: np.ndarray
    radius: float
    residual: float


def _circle_residuals(params, xy):
    cx, cy, r = params
    d = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy)
    return d - r, d


def fit_circle(points) -> CircleFit:
    """Least-squares circle in R^4: PCA plane, algebraic fit, Gauss-Newton refinement."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] < 8:
        raise ParameterError("circle fit needs at least 8 points")
    mean = X.mean(axis=0)
    _, sv, Vt = np.linalg.svd(X - mean, full_matrices=False)
    if sv[0] == 0.0 or sv[1] < 1e-9 * sv[0]:
        raise ParameterError("points are collinear; no plane of a circle is defined")
    u, v = Vt[0], Vt[1]
    xy = np.column_stack([(X - mean) @ u, (X - mean) @ v])
    # Kasa fit
    Amat = np.column_stack([2 * xy, np.ones(len(xy))])
    sol, *_ = np.linalg.lstsq(Amat, np.sum(xy * xy, axis=1), rcond=None)
    cx, cy = sol[0], sol[1]
    params = np.array([cx, cy, np.sqrt(sol[2] + cx * cx + cy * cy)])
    for _ in range(20):
        res, d = _circle_residuals(params, xy)
        d = np.where(d == 0, 1e-300, d)
        J = np.column_stack([-(xy[:, 0] - params[0]) / d, -(xy[:, 1] - params[1]) / d, -np.ones(len(xy))])
        step, *_ = np.linalg.lstsq(J, -res, rcond=None)
        params = params + step
        if np.linalg.norm(step) < 1e-15 * max(1.0, params[2]):
            break
    center = mean + params[0] * u + params[1] * v
    rel = X - center
    inplane = np.column_stack([rel @ u, rel @ v])
    off = rel - inplane[:, :1] * u - inplane[:, 1:] * v
    dist = np.sqrt(np.sum(off * off, axis=1) + (np.hypot(inplane[:, 0], inplane[:, 1]) - params[2]) ** 2)
    return CircleFit(center, u, v, float(params[2]), float(np.max(dist)))


def circle_fit_check(points) -> float:
    """Maximum distance from the points to their best-fit circle."""
    return fit_circle(points).residual


def complex_line_check(points, fit: CircleFit | None = None) -> float:
    """How far the plane of the fitted circle is from a complex line (right-``k`` structure)."""
    X = np.asarray(points, dtype=float)
    if X.shape[0] < 4:
        raise ParameterError("complex line check needs at least 4 points")
    if fit is None:
        fit = fit_circle(X)
    worst = 0.0
    for e in (fit.u, fit.v):
        ek = quat_mul(e, K_UNIT)
        proj = (ek @ fit.u) * fit.u + (ek @ fit.v) * fit.v
        worst = max(worst, float(np.linalg.norm(ek - proj)))
    return worst
