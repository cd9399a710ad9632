"""Integration of the reduced flow and of the reconstructed chain on SU(2) x S^1.

The scheme is the explicit Dormand-Prince 5(4) pair with its order-4
continuous extension.  Casimir drift is monitored, not enforced.  ``tol`` is
the requested global accuracy; the per-step error target is
``tol * LOCAL_TOL_FACTOR`` in the max norm, which keeps the drift of H, K
and P below ``10 tol`` on runs of a few hundred time units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .cr_structure import check_modulus
from .exceptions import (
    DriftError,
    NotClosedWithinHorizon,
    ParameterError,
    StiffnessError,
)
from .fefferman import hamiltonian
from .lie_group import GroupElement, ReducedState
from .reduced_dynamics import vector_field

LOCAL_TOL_FACTOR = 1e-2
DRIFT_LIMIT = 1e-6
CHUNK = 4096
T_MAX = 1e4
CLOSURE_LIMIT = 1e-8

REDUCED, RECONSTRUCTED = 0, 1

# Gauss-Legendre rule used for quadrature over each step of the dense output
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass
class Trajectory:
    """Time-stamped samples of an integration, with dense output.

    ``states`` holds ``(M1, M2, M3, P)``; ``group_states`` (reconstructions
    only) holds ``(qw, qx, qy, qz, gamma)`` with gamma unwrapped (not reduced
    mod 2 pi).  ``drift`` records the maximum deviation of K, H and P from
    their initial values over the stored samples.
    """

    a: float
    times: np.ndarray
    states: np.ndarray
    group_states: np.ndarray | None = None
    drift: dict = field(default_factory=dict)
    _ys: np.ndarray = field(default=None, repr=False)
    _ks: np.ndarray = field(default=None, repr=False)
    _hs: np.ndarray = field(default=None, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def K(self) -> np.ndarray:
        return np.sum(self.states[:, :3] ** 2, axis=1)

    @property
    def H(self) -> np.ndarray:
        return hamiltonian(self.a, self.states)

    def __call__(self, t) -> np.ndarray:
        """Dense-output evaluation of the full state vector at times ``t``."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.t_end + 1e-12):
            raise ParameterError("dense output requested outside the integrated interval")
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self._hs) - 1)
        s = (t - self.times[idx]) / self._hs[idx]
        out = _dense(self._ys[idx], self._ks[idx], self._hs[idx], s)
        if out.shape[1] == 9:
            out[:, 4:8] /= np.linalg.norm(out[:, 4:8], axis=1, keepdims=True)
        return out[0] if scalar else out

    def reduced_at(self, t) -> np.ndarray:
        return self(t)[..., :4]

    def group_at(self, t) -> np.ndarray:
        if self.group_states is None:
            raise ParameterError("trajectory carries no group component")
        return self(t)[..., 4:]

    def integrate(self, fun, t0: float | None = None, t1: float | None = None) -> float:
        """``int fun(state(t)) dt`` by Gauss-Legendre quadrature on every step.

        ``fun`` receives an ``(m, dim)`` array of dense-output states.
        """
        t0 = self.times[0] if t0 is None else t0
        t1 = self.t_end if t1 is None else t1
        starts = self.times[:-1]
        lo = np.maximum(starts, t0)
        hi = np.minimum(self.times[1:], t1)
        keep = hi > lo
        idx = np.nonzero(keep)[0]
        lo, hi = lo[keep], hi[keep]
        h = self._hs[idx]
        # local coordinates of the sub-interval inside each step
        s_lo = (lo - starts[idx]) / h
        s_hi = (hi - starts[idx]) / h
        s = s_lo[:, None] + (s_hi - s_lo)[:, None] * _GL_X[None, :]
        rep = np.repeat(idx, len(_GL_X))
        pts = _dense(self._ys[rep], self._ks[rep], self._hs[rep], s.ravel())
        if pts.shape[1] == 9:
            pts[:, 4:8] /= np.linalg.norm(pts[:, 4:8], axis=1, keepdims=True)
        vals = np.asarray(fun(pts), dtype=float).reshape(len(idx), len(_GL_X))
        return float(np.sum((hi - lo) * (vals @ _GL_W)))


def _dense(y, k, h, s):
    """Continuous extension at fractions ``s`` of steps with data ``(y, k, h)``."""
    powers = np.stack([s, s**2, s**3, s**4], axis=-1)  # (m, 4)
    coef = powers @ _kernels.P.T  # (m, 7)
    return y + h[:, None] * np.einsum("mj,mjd->md", coef, k)


@dataclass
class PeriodReport:
    T: float
    K: float
    closure_residual: float
    trajectory: Trajectory = field(repr=False, default=None)


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    return tol


def _initial_step(mode, a, y0, tol):
    f0 = np.empty_like(y0)
    _kernels.rhs(mode, a, 9.0 / 8.0 * (a + 1.0 / a), 1.0, y0, f0)
    scale = max(np.max(np.abs(f0)), 1e-8)
    return min(0.1, 0.05 * (tol * LOCAL_TOL_FACTOR) ** 0.2 / scale)


def _run(mode, a, y0, t_end, tol, sign=1.0, stop=None, t0=0.0):
    """Chunked integration; ``stop(ts, ys, ks, hs)`` may end the run early.

    Returns the concatenated arrays and the value returned by ``stop``.
    """
    rtol = atol = tol * LOCAL_TOL_FACTOR
    y = np.array(y0, dtype=float)
    h = _initial_step(mode, a, y, tol)
    T_list, Y_list, K_list, H_list = [np.array([t0])], [y[None, :]], [], []
    t = t0
    hit = None
    while True:
        ts, ys, ks, hs, n, status, h = _kernels.dopri_chunk(
            mode, a, sign, y, t, t_end, rtol, atol, h, CHUNK
        )
        if n:
            T_list.append(ts[1:])
            Y_list.append(ys[1:])
            K_list.append(ks)
            H_list.append(hs)
            y = ys[-1].copy()
            t = ts[-1]
        if stop is not None and n:
            hit = stop(ts, ys, ks, hs)
            if hit is not None:
                break
        if status == _kernels.STATUS_UNDERFLOW:
            raise StiffnessError(f"step size underflow at t = {t:.17g}")
        if status == _kernels.STATUS_DONE:
            break
    ts = np.concatenate(T_list)
    ys = np.concatenate(Y_list)
    ks = np.concatenate(K_list) if K_list else np.empty((0, 7, len(y)))
    hs = np.concatenate(H_list) if H_list else np.empty(0)
    return ts, ys, ks, hs, hit


def _make_trajectory(a, ts, ys, ks, hs, mode) -> Trajectory:
    states = ys[:, :4].copy()
    groups = ys[:, 4:].copy() if mode == RECONSTRUCTED else None
    traj = Trajectory(a, ts, states, groups, _ys=ys[: len(hs)], _ks=ks, _hs=hs)
    K = traj.K
    H = traj.H
    traj.drift = {
        "K": float(np.max(np.abs(K - K[0]))),
        "H": float(np.max(np.abs(H - H[0]))),
        "P": float(np.max(np.abs(states[:, 3] - states[0, 3]))),
    }
    k0 = K[0]
    rel = traj.drift["K"] / k0 if k0 > 0 else traj.drift["K"]
    if rel > DRIFT_LIMIT:
        raise DriftError(f"Casimir K drifted by {rel:.3e} (relative), limit {DRIFT_LIMIT}")
    return traj


def _as_state(s) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != (4,):
        raise ParameterError("reduced state must have four components (M1, M2, M3, P)")
    return s


def integrate_reduced(a: float, s0, t_end: float, tol: float = 1e-10, sign: float = 1.0) -> Trajectory:
    """Integrate the reduced equations from ``s0`` over ``[0, t_end]``.

    ``sign = -1`` integrates the negated vector field (time reversal).
    """
    a = check_modulus(a)
    tol = _check_tol(tol)
    y0 = _as_state(s0)
    ts, ys, ks, hs, _ = _run(REDUCED, a, y0, float(t_end), tol, sign=float(sign))
    return _make_trajectory(a, ts, ys, ks, hs, REDUCED)


def _group_vector(g0) -> np.ndarray:
    if g0 is None:
        g0 = GroupElement.identity()
    if not isinstance(g0, GroupElement):
        g0 = GroupElement(np.asarray(g0, dtype=float))
    return np.concatenate([g0.q, [g0.gamma]])


def reconstruct_chain(
    a: float, s0, g0: GroupElement | None = None, t_end: float = 1.0, tol: float = 1e-10, sign: float = 1.0
) -> Trajectory:
    """Integrate the reduced state together with ``g' = g xi(M)``, ``gamma' = dH/dP``.

    The chain is the SU(2) component ``group_states[:, :4]``.
    """
    a = check_modulus(a)
    tol = _check_tol(tol)
    y0 = np.concatenate([_as_state(s0), _group_vector(g0)])
    ts, ys, ks, hs, _ = _run(RECONSTRUCTED, a, y0, float(t_end), tol, sign=float(sign))
    return _make_trajectory(a, ts, ys, ks, hs, RECONSTRUCTED)


def _section_stop(m0: np.ndarray, v0: np.ndarray, scale: float):
    """Build the chunk callback locating the first positive return to the section."""

    def stop(ts, ys, ks, hs):
        # g vanishes exactly at the start point, so the first step never counts
        g = (ys[:, :3] - m0) @ v0
        for i in range(len(hs)):
            if g[i] < 0.0 <= g[i + 1]:
                y_i, k_i, h_i = ys[i], ks[i], hs[i]

                def gfun(s):
                    y = _dense(y_i[None, :], k_i[None], np.array([h_i]), np.array([s]))[0]
                    return float((y[:3] - m0) @ v0)

                g_hi = gfun(1.0)
                s = 1.0 if g_hi <= 0.0 else brentq(gfun, 0.0, 1.0, xtol=1e-15, maxiter=200)
                y = _dense(y_i[None, :], k_i[None], np.array([h_i]), np.array([s]))[0]
                if np.linalg.norm(y[:3] - m0) < 1e-4 * scale:
                    return ts[i] + s * h_i, y
        return None

    return stop


def _one_period(mode, a, y0, tol, t_max, sign=1.0):
    m0 = y0[:3].copy()
    v0 = sign * vector_field(a, y0[:4])[:3]
    if np.linalg.norm(v0) == 0.0:
        raise ParameterError("initial state is an equilibrium; there is no period")
    scale = max(1.0, float(np.linalg.norm(m0)))
    stop = _section_stop(m0, v0, scale)
    ts, ys, ks, hs, hit = _run(mode, a, y0, float(t_max), tol, sign=sign, stop=stop)
    if hit is None:
        raise NotClosedWithinHorizon(f"no return to the Poincare section within t_max = {t_max:g}")
    T, yT = hit
    # truncate: keep the steps up to the one containing T
    i = int(np.searchsorted(ts, T, side="left"))
    i = max(i, 1)
    ts = np.concatenate([ts[:i], [T]])
    if mode == RECONSTRUCTED:
        yT = yT.copy()
        yT[4:8] /= np.linalg.norm(yT[4:8])
    ys = np.concatenate([ys[:i], yT[None, :]])
    traj = _make_trajectory(a, ts, ys, ks[:i], hs[:i], mode)
    residual = float(np.linalg.norm(yT[:3] - m0))
    return traj, T, residual


def detect_period(a: float, s0, tol: float = 1e-10, t_max: float = T_MAX) -> PeriodReport:
    """Period of the closed reduced curve through ``s0``.

    The section is the hyperplane through ``s0`` orthogonal to the initial
    velocity; the first crossing in the same direction and close to ``s0``
    is refined on the dense output.
    """
    a = check_modulus(a)
    tol = _check_tol(tol)
    y0 = _as_state(s0)
    traj, T, residual = _one_period(REDUCED, a, y0, tol, t_max)
    if residual > CLOSURE_LIMIT:
        raise NotClosedWithinHorizon(f"closure residual {residual:.3e} exceeds {CLOSURE_LIMIT:g}")
    return PeriodReport(T=T, K=float(np.sum(y0[:3] ** 2)), closure_residual=residual, trajectory=traj)


def reconstruct_period(a: float, s0, g0=None, tol: float = 1e-10, t_max: float = T_MAX, sign: float = 1.0):
    """Reconstructed chain over exactly one period of its reduced curve."""
    a = check_modulus(a)
    tol = _check_tol(tol)
    y0 = np.concatenate([_as_state(s0), _group_vector(g0)])
    traj, T, residual = _one_period(RECONSTRUCTED, a, y0, tol, t_max, sign=sign)
    if residual > CLOSURE_LIMIT:
        raise NotClosedWithinHorizon(f"closure residual {residual:.3e} exceeds {CLOSURE_LIMIT:g}")
    return PeriodReport(T=T, K=float(np.sum(y0[:3] ** 2)), closure_residual=residual, trajectory=traj)


def linear_frequency(a: float, s, eps: float = 1e-6) -> float:
    """Imaginary part of the Jacobian eigenvalues of the reduced field at an equilibrium.

    The Jacobian is formed by central differences.
    """
    s = _as_state(s)
    J = np.empty((4, 4))
    for j in range(4):
        d = np.zeros(4)
        d[j] = eps
        J[:, j] = (vector_field(a, s + d) - vector_field(a, s - d)) / (2 * eps)
    return float(np.max(np.abs(np.linalg.eigvals(J).imag)))
