"""Quaternion model of SU(2) x S^1.

Conventions
-----------
The basis ``e1, e2, e3`` of su(2) is identified with half the imaginary
quaternion units, ``e_i <-> q_i / 2``.  With this scaling ``[e1, e2] = e3``
(cyclically), which is the structure equation ``d w3 = -w1 ^ w2`` of the
dual coframe.  A consequence is that ``exp(t e3)`` has period ``4 pi`` in
SU(2) and acts on R^3 (adjoint representation) as the rotation by angle ``t``
about the third axis.

Quaternions are stored as float arrays ``[w, x, y, z]``; every function
broadcasts over leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ParameterError

UNIT_TOL = 1e-12


class AlgebraElement(NamedTuple):
    """Coefficients on the basis ``(e1, e2, e3, d/dgamma)``."""

    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0
    p: float = 0.0


class ReducedState(NamedTuple):
    """Left-trivialized momenta ``(M1, M2, M3, P)`` in g* = R^3 x R."""

    M1: float
    M2: float
    M3: float
    P: float

    @property
    def angular(self) -> np.ndarray:
        return np.array([self.M1, self.M2, self.M3])


E1 = AlgebraElement(1.0, 0.0, 0.0)
E2 = AlgebraElement(0.0, 1.0, 0.0)
E3 = AlgebraElement(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class GroupElement:
    """A point ``(q, gamma)`` of SU(2) x S^1 with ``q`` a unit quaternion."""

    q: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4)
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > 1e-9:
            raise ParameterError(f"quaternion must have unit norm, got |q| = {norm!r}")
        object.__setattr__(self, "q", q / norm)
        object.__setattr__(self, "gamma", float(self.gamma) % (2.0 * math.pi))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), 0.0)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(quat_mul(self.q, other.q), self.gamma + other.gamma)

    def inverse(self) -> "GroupElement":
        return GroupElement(quat_conj(self.q), -self.gamma)


# -- quaternion primitives -------------------------------------------------

def quat_mul(p, q):
    """Hamilton product, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quat_distance(p, q):
    """Euclidean distance in R^4 (no sign identification: this is SU(2), not SO(3))."""
    return np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float), axis=-1)


def rotation_matrix(q) -> np.ndarray:
    """SO(3) image of a unit quaternion, ``v -> q v q^-1``."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotate(q, v):
    """Rotate vectors ``v`` (shape ``(..., 3)``) by unit quaternions ``q``."""
    v = np.asarray(v, dtype=float)
    pure = np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)
    return quat_mul(quat_mul(q, pure), quat_conj(q))[..., 1:]


def su2_exp(v) -> np.ndarray:
    """``exp(v1 e1 + v2 e2 + v3 e3)`` as a unit quaternion (``e_i = q_i / 2``)."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    half = 0.5 * r
    # sin(r/2)/r, continuous at r = 0
    s = np.where(r > 1e-8, np.sin(half) / np.where(r > 1e-8, r, 1.0), 0.5 - r * r / 48.0)
    return np.concatenate([np.cos(half), s * v], axis=-1)


def minimal_rotation(u, n) -> np.ndarray:
    """Unit quaternion of the smallest rotation taking unit vector ``u`` to ``n``.

    Singular only for ``u = -n``.
    """
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    q = np.concatenate([1.0 + np.sum(u * n, axis=-1, keepdims=True), np.cross(u, n)], axis=-1)
    return quat_normalize(q)


# -- Lie algebra -------------------------------------------------------------

def bracket(xi: AlgebraElement, eta: AlgebraElement) -> AlgebraElement:
    """Lie bracket; the S^1 generator is central."""
    c = np.cross(xi[:3], eta[:3])
    return AlgebraElement(float(c[0]), float(c[1]), float(c[2]), 0.0)


def exp_group(xi: AlgebraElement, t: float) -> GroupElement:
    q = su2_exp(t * np.asarray(xi[:3], dtype=float))
    return GroupElement(q, t * xi[3])


def coadjoint(g: GroupElement | np.ndarray, M: ReducedState) -> ReducedState:
    """``Ad*_{g^-1} M``: rotate the angular part by the SO(3) image of ``g``.

    This is the momentum map of the left action in the left trivialization.
    """
    q = g.q if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    m = rotate(q, [M[0], M[1], M[2]])
    return ReducedState(float(m[0]), float(m[1]), float(m[2]), float(M[3]))


def hopf_project(q) -> np.ndarray:
    """Image of ``e3`` under the rotation ``q``; fibres are the cosets ``q exp(t e3)``."""
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norm - 1.0) > 1e-9):
        raise ParameterError("hopf_project requires unit quaternions")
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack(
        [2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)], axis=-1
    )
