"""Holonomy of the chains: Berry-phase formula and direct reconstruction.

For a closed reduced curve ``C`` on the sphere ``K = r0^2`` (``P = 1``) the
chains wind around a two-torus, and after one circuit of ``C`` the torus
angle has advanced by

    delta_theta = (1 / r0) * int_0^T f dt  -  Omega(C),

``f = (a M1^2 + M2^2 / a + c(a)) / 2`` and ``Omega`` the oriented solid angle
enclosed by ``C``.  The angle is measured in the parameter of ``exp(theta e3)``,
so the isotropy circle has period ``4 pi`` in SU(2).

As a real number ``delta_theta`` depends on the spanning cap chosen for
``Omega`` (caps differ by ``4 pi``).  Both computations here fix the cap
through a polar axis ``n``: the solid angle is ``int (1 - cos polar) d azimuth``
about ``n`` and the reconstruction is read in the gauge that rotates the
momentum to ``n`` along the shortest arc.  Both are regular away from
``-n``; the default ``n = -e3`` is the direction of the paraboloid vertex,
so caps shrink to zero as curves shrink to the vertex.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .cr_structure import check_modulus
from .exceptions import (
    EmptyLevelSet,
    HomoclinicRegime,
    MomentumLevelViolation,
    ParameterError,
)
from .integrator import (
    T_MAX,
    PeriodReport,
    Trajectory,
    detect_period,
    reconstruct_period,
)
from .lie_group import (
    GroupElement,
    minimal_rotation,
    quat_conj,
    quat_mul,
    rotate,
)
from .reduced_dynamics import (
    SQRT3,
    Topology,
    c_of_a,
    center_offset,
    classify_level,
    homoclinic_level,
    k_on_paraboloid,
    lift,
    vector_field,
)

DEFAULT_AXIS = (0.0, 0.0, -1.0)
AXIS_CANDIDATES = [
    (0.0, 0.0, -1.0),
    (0.0, 0.0, 1.0),
    (1.0, 0.0, 0.0),
    (-1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, -1.0, 0.0),
]
POLE_CLEARANCE = 1e-3  # radians
SUBGROUP_TOL = 1e-6
LEVEL_MATCH = 1e-9


# -- axis handling ------------------------------------------------------------------

def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b1 = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    b1 = _unit(b1 - n * (b1 @ n))
    return b1, np.cross(n, b1)


def choose_axis(momenta: np.ndarray) -> np.ndarray:
    """First candidate axis whose singular pole ``-n`` the curve stays clear of."""
    u = momenta[:, :3] / np.linalg.norm(momenta[:, :3], axis=1, keepdims=True)
    for cand in AXIS_CANDIDATES:
        n = np.array(cand)
        # angular distance from -n
        closest = np.arccos(np.clip(np.max(-(u @ n)), -1.0, 1.0))
        if closest > POLE_CLEARANCE:
            return n
    raise ParameterError("curve comes close to every candidate pole")


# -- the two terms of the Berry formula ---------------------------------------------

def dynamic_integrand(a: float, states) -> np.ndarray:
    s = np.asarray(states, dtype=float)
    return 0.5 * (a * s[..., 0] ** 2 + s[..., 1] ** 2 / a + c_of_a(a))


def _require_closed(period: PeriodReport):
    if period.closure_residual > 1e-8:
        raise ParameterError(f"trajectory does not close (residual {period.closure_residual:.3e})")


def dynamic_phase(a: float, period: PeriodReport) -> float:
    """``(1/sqrt K) int_0^T f dt`` along one period of the reduced curve."""
    a = check_modulus(a)
    _require_closed(period)
    traj = period.trajectory
    if not np.allclose(traj.states[:, 3], 1.0):
        raise ParameterError("the dynamic phase is defined on the slice P = 1")
    integral = traj.integrate(lambda y: dynamic_integrand(a, y), 0.0, period.T)
    return integral / math.sqrt(period.K)


def solid_angle_rate(a: float, states, axis) -> np.ndarray:
    """``(1 - cos polar) d(azimuth)/dt`` about ``axis`` along the reduced flow."""
    n = _unit(axis)
    b1, b2 = _frame(n)
    s = np.asarray(states, dtype=float)
    m = s[..., :3]
    md = vector_field(a, s)[..., :3]
    x, y = m @ b1, m @ b2
    xd, yd = md @ b1, md @ b2
    r2 = np.sum(m * m, axis=-1)
    cos_polar = (m @ n) / np.sqrt(r2)
    return (x * yd - y * xd) / (r2 * (1.0 + cos_polar))


def solid_angle(a: float, period: PeriodReport, axis=None) -> float:
    """Oriented solid angle enclosed by the closed reduced curve."""
    _require_closed(period)
    traj = period.trajectory
    if period.K <= 0:
        raise ParameterError("solid angle needs K > 0")
    n = choose_axis(traj.states) if axis is None else _unit(axis)
    omega = traj.integrate(lambda y: solid_angle_rate(a, y, n), 0.0, period.T)
    if abs(omega) > 4 * math.pi + 1e-9:
        raise ParameterError(f"solid angle {omega} exceeds 4 pi; the polar axis is too close to the curve")
    return omega


def geometric_phase(a: float, period: PeriodReport, axis=None) -> float:
    return -solid_angle(a, period, axis)


def solid_angle_polyline(points, axis=DEFAULT_AXIS) -> float:
    """Solid angle of a closed polyline on the sphere, as a sum of signed triangles.

    Each segment contributes the spherical triangle ``(n, p_i, p_{i+1})``
    (Van Oosterom-Strackee formula), which fixes the same cap as
    :func:`solid_angle`.  Independent of the flow; used as an oracle.
    """
    n = _unit(axis)
    p = np.asarray(points, dtype=float)
    p = p / np.linalg.norm(p, axis=1, keepdims=True)
    if not np.allclose(p[0], p[-1]):
        p = np.vstack([p, p[:1]])
    u, v = p[:-1], p[1:]
    num = np.cross(u, v) @ n
    den = 1.0 + u @ n + v @ n + np.sum(u * v, axis=1)
    return float(np.sum(2.0 * np.arctan2(num, den)))


# -- reconstruction ------------------------------------------------------------------

def gauge(momentum, target, axis) -> np.ndarray:
    """Unit quaternion ``s`` with ``rotate(s, M/|M|) = target``, smooth away from ``M = -|M| axis``.

    ``s = F * R(M)``: ``R`` is the shortest rotation of ``M/|M|`` onto
    ``axis`` and ``F`` a fixed rotation of ``axis`` onto ``target``.
    """
    n = _unit(axis)
    target = _unit(target)
    m = np.asarray(momentum, dtype=float)
    u = m / np.linalg.norm(m, axis=-1, keepdims=True)
    R = minimal_rotation(u, n)
    if n @ target < -1.0 + 1e-12:
        # antipodal: half turn about a perpendicular axis
        b1, _ = _frame(n)
        F = np.concatenate([[0.0], b1])
    else:
        F = minimal_rotation(n, target)
    return quat_mul(F, R)


def chain_start(s0, axis=DEFAULT_AXIS, target=(0.0, 0.0, 1.0)) -> GroupElement:
    """Initial group element putting the momentum value at ``sqrt(K) * target``."""
    return GroupElement(gauge(np.asarray(s0, dtype=float)[:3], target, axis))


def _isotropy_angle(h: np.ndarray, L: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctan2(h[..., 1:] @ L, h[..., 0])


@dataclass
class ReconstructionReport:
    delta_theta: float
    T: float
    subgroup_residual: float
    momentum_drift: float
    axis: tuple


def holonomy_from_reconstruction(
    a: float,
    s0,
    g0: GroupElement | None = None,
    tol: float = 1e-10,
    axis=None,
    t_max: float = T_MAX,
    samples_per_step: int = 4,
    full: bool = False,
):
    """Holonomy angle measured on the reconstructed chain over one reduced period.

    ``g(T) g(0)^-1`` must lie in the isotropy subgroup ``exp(theta L)`` of the
    momentum value ``L``; the angle is tracked continuously along the chain
    so multiples of ``4 pi`` are resolved.
    """
    a = check_modulus(a)
    s0 = np.asarray(s0, dtype=float)
    if s0[3] != 1.0:
        raise ParameterError("holonomy is measured on the slice P = 1")
    if g0 is None:
        g0 = chain_start(s0, DEFAULT_AXIS if axis is None else axis)
    period = reconstruct_period(a, s0, g0, tol=tol, t_max=t_max)
    traj = period.trajectory
    n = choose_axis(traj.states) if axis is None else _unit(axis)
    q0 = g0.q
    L = rotate(q0, s0[:3])
    r0 = float(np.linalg.norm(L))
    L_hat = L / r0

    # dense sampling of the chain
    t_nodes = traj.times
    fr = np.linspace(0.0, 1.0, samples_per_step + 1)[:-1]
    t_dense = (t_nodes[:-1, None] + np.diff(t_nodes)[:, None] * fr[None, :]).ravel()
    t_dense = np.append(t_dense, period.T)
    y = traj(t_dense)
    q = y[:, 4:8]
    momentum = rotate(q, y[:, :3])
    drift = float(np.max(np.linalg.norm(momentum - L, axis=1)))
    h = quat_mul(q, quat_conj(gauge(y[:, :3], L_hat, n)))
    theta = np.unwrap(_isotropy_angle(h, L_hat), period=4 * math.pi)

    hol = quat_mul(q[-1], quat_conj(q0))
    perp = hol[1:] - (hol[1:] @ L_hat) * L_hat
    residual = float(np.linalg.norm(perp))
    if residual > SUBGROUP_TOL:
        raise MomentumLevelViolation(
            f"g(T) g(0)^-1 is {residual:.3e} away from the isotropy subgroup of the momentum"
        )
    delta = float(theta[-1] - theta[0])
    if full:
        return ReconstructionReport(delta, period.T, residual, drift, tuple(float(v) for v in n))
    return delta


# -- Delta theta(K, a) ------------------------------------------------------------------

@dataclass
class PhaseReport:
    K: float
    a: float
    T: float
    dynamic: float
    geometric: float
    delta_theta: float
    delta_theta_reconstructed: float
    discrepancy: float
    start: tuple = field(default=(), repr=False)
    axis: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return asdict(self)


def canonical_start(a: float, K: float, lobe: int = 1):
    """Point of the canonical closed curve of level ``K`` on the unstable axis.

    For a bifurcated modulus and ``K`` below the homoclinic level this is the
    outer crossing of the lobe on the ``lobe`` side; otherwise the crossing of
    the single curve with the positive half-axis.
    """
    a = check_modulus(a)
    topo = classify_level(a, K)
    if topo in (Topology.EMPTY,):
        raise EmptyLevelSet(f"K = {K!r} is below the minimum of K on the paraboloid for a = {a!r}")
    if topo is Topology.FIGURE_EIGHT:
        raise HomoclinicRegime(f"K = {K!r} is the homoclinic level for a = {a!r}")
    if topo in (Topology.POINT, Topology.POINTS):
        raise ParameterError(f"K = {K!r} is a critical level: the reduced curve is an equilibrium")
    along_m2 = a < 1.0 / SQRT3
    kfun = (lambda x: float(k_on_paraboloid(a, 0.0, x)) - K) if along_m2 else (
        lambda x: float(k_on_paraboloid(a, x, 0.0)) - K
    )
    lo = center_offset(a) if (a > SQRT3 or a < 1.0 / SQRT3) else 0.0
    hi = math.sqrt(K) * 1.01 + 1e-6
    x = brentq(kfun, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    x *= 1 if lobe >= 0 else -1
    # lobe -1 is the image under the half turn (M1, M2) -> (-M1, -M2)
    return lift(a, 0.0, x) if along_m2 else lift(a, x, 0.0)


def delta_theta(
    a: float,
    K: float,
    tol: float = 1e-10,
    lobe: int = 1,
    axis=None,
    reconstruct: bool = True,
    t_max: float = T_MAX,
) -> PhaseReport:
    """Berry-phase value of the holonomy at level ``K``, cross-checked by reconstruction."""
    a = check_modulus(a)
    s0 = canonical_start(a, K, lobe)
    period = detect_period(a, s0, tol=tol, t_max=t_max)
    n = choose_axis(period.trajectory.states) if axis is None else _unit(axis)
    dyn = dynamic_phase(a, period)
    geo = geometric_phase(a, period, n)
    total = dyn + geo
    if reconstruct:
        recon = holonomy_from_reconstruction(a, s0, chain_start(s0, n), tol=tol, axis=n, t_max=t_max)
    else:
        recon = float("nan")
    return PhaseReport(
        K=float(K),
        a=a,
        T=period.T,
        dynamic=dyn,
        geometric=geo,
        delta_theta=total,
        delta_theta_reconstructed=recon,
        discrepancy=abs(total - recon),
        start=tuple(float(v) for v in s0),
        axis=tuple(float(v) for v in n),
    )


# -- classification ------------------------------------------------------------------------

class ChainKind(str, enum.Enum):
    PERIODIC = "periodic"
    QUASI_PERIODIC = "quasi-periodic"
    HOMOCLINIC = "homoclinic"
    REEB_ORBIT = "reeb-orbit"


@dataclass
class ChainClassification:
    kind: ChainKind
    p: int | None = None
    q: int | None = None
    evidence: PhaseReport | str | None = None

    def to_dict(self) -> dict:
        ev = self.evidence.to_dict() if isinstance(self.evidence, PhaseReport) else self.evidence
        return {"kind": self.kind.value, "p": self.p, "q": self.q, "evidence": ev}


def best_rational(x: float, q_max: int) -> Fraction:
    """Best rational approximation with denominator at most ``q_max`` (continued fractions)."""
    return Fraction(x).limit_denominator(q_max)


def classify_chain(
    a: float,
    K: float,
    P_flag: int = 1,
    tol: float = 1e-6,
    q_max: int = 64,
    int_tol: float = 1e-10,
    level_tol: float = LEVEL_MATCH,
) -> ChainClassification:
    """Periodic / quasi-periodic / homoclinic / Reeb classification of the chains at ``(a, K)``.

    The periodic call is tolerance-bounded: ``|delta_theta / 2 pi - p/q| < tol``
    with ``q <= q_max``.
    """
    a = check_modulus(a)
    if P_flag == 0:
        return ChainClassification(
            ChainKind.REEB_ORBIT, evidence="P = 0: left translates of the e3 one-parameter subgroup"
        )
    k_hom = homoclinic_level(a)
    if k_hom is not None and abs(K - k_hom) <= level_tol * max(1.0, k_hom):
        return ChainClassification(
            ChainKind.HOMOCLINIC, evidence=f"K = K_hom = c(a)^2 / 9 = {k_hom!r}; figure-eight through the saddle"
        )
    topo = classify_level(a, K)
    if topo is Topology.POINT:
        return ChainClassification(
            ChainKind.REEB_ORBIT, evidence="K at the paraboloid vertex: the chain is a Hopf fibre"
        )
    return classify_report(delta_theta(a, K, tol=int_tol), tol=tol, q_max=q_max)


def classify_report(report: PhaseReport, tol: float = 1e-6, q_max: int = 64) -> ChainClassification:
    """Rational / irrational call on an already computed phase report."""
    ratio = report.delta_theta / (2 * math.pi)
    frac = best_rational(ratio, q_max)
    if abs(ratio - frac) < tol:
        return ChainClassification(ChainKind.PERIODIC, frac.numerator, frac.denominator, report)
    return ChainClassification(ChainKind.QUASI_PERIODIC, evidence=report)


def resonant_levels(
    a: float,
    K_lo: float,
    K_hi: float,
    count: int,
    q_max: int = 64,
    n_scan: int = 12,
    tol: float = 1e-10,
) -> list[tuple[float, Fraction]]:
    """Levels in ``(K_lo, K_hi)`` where ``delta_theta / 2 pi`` equals a rational ``p/q``.

    ``delta_theta`` is scanned on a grid; rationals of smallest denominator
    inside each bracket are solved for by Brent's method.  Returns at most
    ``count`` pairs ``(K, p/q)`` sorted by ``K``.
    """
    grid = np.linspace(K_lo, K_hi, n_scan)
    phase = lambda K: delta_theta(a, K, tol=tol, reconstruct=False).delta_theta / (2 * math.pi)
    vals = [phase(K) for K in grid]
    candidates = []
    for i in range(n_scan - 1):
        lo_v, hi_v = sorted((vals[i], vals[i + 1]))
        for q in range(1, q_max + 1):
            p_lo = math.floor(lo_v * q) + 1
            if p_lo / q < hi_v:
                candidates.append((q, i, Fraction(p_lo, q)))
                break
    candidates.sort(key=lambda c: (c[0], c[1]))
    out = []
    seen = set()
    for q, i, frac in candidates:
        if len(out) >= count:
            break
        if frac in seen:
            continue
        seen.add(frac)
        K = brentq(lambda k: phase(k) - float(frac), grid[i], grid[i + 1], xtol=1e-14, maxiter=100)
        out.append((float(K), frac))
    out.sort()
    return out
