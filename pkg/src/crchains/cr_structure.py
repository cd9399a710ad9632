"""Normal form of the left-invariant CR structures on SU(2).

The contact form is ``theta = -w3``; on the contact plane spanned by
``e1, e2`` the Levi form is ``(1/a) w1^2 + a w2^2`` and the almost complex
structure is ``J e1 = e2 / a``, ``J e2 = -a e1``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import ParameterError


class ContactVector(NamedTuple):
    """Coefficients of ``e1, e2`` in the contact plane ``ker theta``."""

    v1: float
    v2: float


def check_modulus(a: float) -> float:
    a = float(a)
    if not np.isfinite(a) or a <= 0.0:
        raise ParameterError(f"CR modulus must be a positive real, got a = {a!r}")
    return a


def levi_form(a: float, v: ContactVector, w: ContactVector) -> float:
    a = check_modulus(a)
    return v[0] * w[0] / a + a * v[1] * w[1]


def apply_J(a: float, v: ContactVector) -> ContactVector:
    a = check_modulus(a)
    return ContactVector(-a * v[1], v[0] / a)


def dtheta(v: ContactVector, w: ContactVector) -> float:
    """``d theta = w1 ^ w2`` evaluated on two contact vectors."""
    return v[0] * w[1] - v[1] * w[0]


def holomorphic_frame(a: float) -> np.ndarray:
    """Coefficients of ``Z_a = e1 - (i/a) e2`` on ``(e1, e2)``.

    The antiholomorphic frame is the complex conjugate.
    """
    a = check_modulus(a)
    return np.array([1.0, -1j / a])


def rossi_mu(epsilon: float) -> float:
    """Rossi parameter matching the modulus ``a = 1 + epsilon``."""
    epsilon = float(epsilon)
    if epsilon == -2.0:
        raise ParameterError("rossi_mu is singular at epsilon = -2")
    if epsilon < -2.0:
        raise ParameterError(f"rossi_mu requires epsilon > -2, got {epsilon!r}")
    half = 0.5 * epsilon
    return half / (1.0 + half)


def rossi_frame(mu: float) -> np.ndarray:
    """``Z - mu Zbar`` with ``Z = e1 - i e2``, as coefficients on ``(e1, e2)``."""
    z = np.array([1.0, -1j])
    return z - mu * np.conj(z)


def rotate_quarter_turn(frame: np.ndarray) -> np.ndarray:
    """Push a frame forward by the rotation ``e1 -> e2, e2 -> -e1``.

    This is the isomorphism between the structures for ``a`` and ``1/a``.
    """
    c1, c2 = frame
    return np.array([-c2, c1])


def complex_parallel_residual(u: np.ndarray, v: np.ndarray) -> float:
    """``|det[u v]| / (|u||v|)``: zero iff two complex 2-vectors span the same line."""
    det = u[0] * v[1] - u[1] * v[0]
    return float(abs(det) / (np.linalg.norm(u) * np.linalg.norm(v)))
