"""Lie-Poisson dynamics on g* = R^3 x R and the geometry of the light cone P = 1.

On ``P = 1`` the null condition ``H = 0`` is the paraboloid
``M3 = (a M1^2 + M2^2 / a - c) / 3`` with ``c(a) = 9/8 (a + 1/a) > 0``.
Reduced solutions are the intersections of this paraboloid with the spheres
``K = M1^2 + M2^2 + M3^2``; projected to the ``(M1, M2)`` plane they are the
level sets of the even quartic ``k_on_paraboloid``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cr_structure import check_modulus
from .exceptions import DegenerateBifurcation, ParameterError
from .lie_group import ReducedState

SQRT3 = math.sqrt(3.0)
DEGENERATE_WINDOW = 1e-9
LEVEL_TOL = 1e-9


def c_of_a(a: float) -> float:
    a = check_modulus(a)
    return 9.0 / 8.0 * (a + 1.0 / a)


def vector_field(a: float, s) -> np.ndarray:
    """Right-hand side of the reduced (Lie-Poisson) equations, ``dM/dt = M x dH/dM``."""
    s = np.asarray(s, dtype=float)
    M1, M2, M3, P = np.moveaxis(s, -1, 0)
    return np.stack(
        [
            -M2 * (M3 / a + 1.5 * P),
            M1 * (a * M3 + 1.5 * P),
            M1 * M2 * (1.0 / a - a),
            np.zeros_like(M1),
        ],
        axis=-1,
    )


def hamiltonian_gradient(a: float, s) -> np.ndarray:
    """``(dH/dM1, dH/dM2, dH/dM3, dH/dP)``: the body velocity and ``dgamma/dt``."""
    s = np.asarray(s, dtype=float)
    M1, M2, M3, P = np.moveaxis(s, -1, 0)
    return np.stack(
        [a * M1, M2 / a, -1.5 * P, -1.5 * M3 - 9.0 / 8.0 * (a + 1.0 / a) * P], axis=-1
    )


def casimirs(s) -> tuple[float, float]:
    s = np.asarray(s, dtype=float)
    return float(s[0] ** 2 + s[1] ** 2 + s[2] ** 2), float(s[3])


def paraboloid_m3(a: float, M1, M2):
    c = c_of_a(a)
    return (a * np.square(M1) + np.square(M2) / a - c) / 3.0


def lift(a: float, M1: float, M2: float) -> ReducedState:
    """The point of the null paraboloid (``P = 1``) above ``(M1, M2)``."""
    return ReducedState(float(M1), float(M2), float(paraboloid_m3(a, M1, M2)), 1.0)


def k_on_paraboloid(a: float, M1, M2):
    """K restricted to the paraboloid, in expanded quartic form."""
    c = c_of_a(a)
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    q = a * M1 * M1 + M2 * M2 / a
    return (
        (1.0 - 2.0 / 9.0 * c * a) * M1 * M1
        + (1.0 - 2.0 / 9.0 * c / a) * M2 * M2
        + q * q / 9.0
        + c * c / 9.0
    )


def k_gradient(a: float, M1, M2) -> np.ndarray:
    M3 = paraboloid_m3(a, M1, M2)
    return np.stack(
        [2.0 * M1 * (1.0 + 2.0 * a * M3 / 3.0), 2.0 * M2 * (1.0 + 2.0 * M3 / (3.0 * a))],
        axis=-1,
    )


def origin_hessian(a: float) -> tuple[float, float]:
    """Coefficients ``(A, B)`` of ``M1^2`` and ``M2^2`` in K near the origin."""
    c = c_of_a(a)
    return 1.0 - 2.0 / 9.0 * c * a, 1.0 - 2.0 / 9.0 * c / a


# -- critical points -------------------------------------------------------------

class CriticalKind(str, enum.Enum):
    MINIMUM = "minimum"
    SADDLE = "saddle"
    CENTER = "center"


@dataclass(frozen=True)
class CriticalPointReport:
    location: tuple[float, float]
    kind: CriticalKind
    K_value: float

    def lifted(self, a: float) -> ReducedState:
        return lift(a, *self.location)


def is_degenerate(a: float) -> bool:
    return abs(a - SQRT3) < DEGENERATE_WINDOW or abs(a - 1.0 / SQRT3) < DEGENERATE_WINDOW


def _bisect(fun, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    flo = fun(lo)
    if flo == 0.0:
        return lo
    if flo * fun(hi) > 0.0:
        raise ParameterError("bisection interval does not bracket a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = fun(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def center_offset(a: float, tol: float = 1e-12) -> float:
    """Distance of the elliptic centres from the origin (``a > sqrt 3`` or ``a < 1/sqrt 3``).

    Located by bisection on the gradient of K along the unstable axis of the
    origin.
    """
    a = check_modulus(a)
    c = c_of_a(a)
    if a > SQRT3:
        dk = lambda x: float(k_gradient(a, x, 0.0)[0])
        hi = math.sqrt(c / a) + 1.0
    elif a < 1.0 / SQRT3:
        dk = lambda x: float(k_gradient(a, 0.0, x)[1])
        hi = math.sqrt(c * a) + 1.0
    else:
        raise ParameterError(f"no elliptic centres for a = {a!r} in [1/sqrt3, sqrt3]")
    # dk < 0 just right of the origin (saddle direction), > 0 at hi
    return _bisect(dk, 1e-300, hi, tol=tol)


def critical_points(a: float) -> list[CriticalPointReport]:
    a = check_modulus(a)
    if is_degenerate(a):
        raise DegenerateBifurcation(f"a = {a!r} is at the pitchfork bifurcation")
    k0 = c_of_a(a) ** 2 / 9.0
    A, B = origin_hessian(a)
    if A > 0 and B > 0:
        return [CriticalPointReport((0.0, 0.0), CriticalKind.MINIMUM, k0)]
    reports = [CriticalPointReport((0.0, 0.0), CriticalKind.SADDLE, k0)]
    x = center_offset(a)
    locs = [(x, 0.0), (-x, 0.0)] if a > SQRT3 else [(0.0, x), (0.0, -x)]
    for loc in locs:
        kc = float(k_on_paraboloid(a, *loc))
        reports.append(CriticalPointReport(loc, CriticalKind.CENTER, kc))
    return reports


def homoclinic_level(a: float) -> float | None:
    a = check_modulus(a)
    if a > SQRT3 or a < 1.0 / SQRT3:
        return c_of_a(a) ** 2 / 9.0
    return None


def minimum_level(a: float) -> float:
    """Absolute minimum of K on the paraboloid."""
    return min(r.K_value for r in critical_points(a))


@dataclass(frozen=True)
class BifurcationRow:
    a: float
    hessian_m1: float
    hessian_m2: float
    determinant: float
    origin_kind: str
    center_m1: float
    center_m2: float
    center_K: float


def bifurcation_row(a: float) -> BifurcationRow:
    A, B = origin_hessian(a)
    kind = "degenerate" if is_degenerate(a) else ("minimum" if A > 0 and B > 0 else "saddle")
    cm1 = cm2 = ck = float("nan")
    if kind == "saddle":
        x = center_offset(a)
        cm1, cm2 = (x, 0.0) if a > SQRT3 else (0.0, x)
        ck = float(k_on_paraboloid(a, cm1, cm2))
    return BifurcationRow(a, A, B, 4.0 * A * B, kind, cm1, cm2, ck)


def locate_bifurcations(a_lo: float, a_hi: float, step: float, tol: float = 1e-12) -> list[float]:
    """Moduli in ``[a_lo, a_hi]`` where the origin's Hessian determinant changes sign.

    The grid brackets each crossing, which is then refined by bisection on
    the vanishing Hessian coefficient.
    """
    a_lo, a_hi = check_modulus(a_lo), check_modulus(a_hi)
    if step <= 0 or a_hi <= a_lo:
        raise ParameterError("need a_lo < a_hi and step > 0")
    n = int(math.floor((a_hi - a_lo) / step + 1e-9))
    grid = a_lo + step * np.arange(n + 1)
    if grid[-1] < a_hi:
        grid = np.append(grid, a_hi)
    det = np.array([np.prod(origin_hessian(x)) for x in grid])
    roots = []
    for i in range(len(grid) - 1):
        if det[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        if det[i] * det[i + 1] < 0.0:
            lo, hi = float(grid[i]), float(grid[i + 1])
            A_lo, B_lo = origin_hessian(lo)
            A_hi, B_hi = origin_hessian(hi)
            which = 0 if A_lo * A_hi < 0 else 1
            roots.append(_bisect(lambda x: origin_hessian(x)[which], lo, hi, tol=tol))
    if det[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


# -- level sets ------------------------------------------------------------------

class Topology(str, enum.Enum):
    EMPTY = "empty"
    POINT = "point"
    POINTS = "points"
    ONE_CURVE = "one-curve"
    TWO_CURVES = "two-curves"
    FIGURE_EIGHT = "figure-eight"


@dataclass
class LevelCurveReport:
    a: float
    K: float
    topology: Topology
    curves: list[np.ndarray] = field(default_factory=list)
    grid: int = 0

    @property
    def n_components(self) -> int:
        return len(self.curves)


def classify_level(a: float, K: float, rtol: float = LEVEL_TOL) -> Topology:
    """Topology of ``{k_on_paraboloid = K}`` from the critical values of K."""
    a = check_modulus(a)
    if K < 0:
        raise ParameterError("K must be non-negative")
    if is_degenerate(a):
        # the origin is a degenerate (quartic) minimum
        kmin = c_of_a(a) ** 2 / 9.0
        if abs(K - kmin) <= rtol * max(1.0, kmin):
            return Topology.POINT
        return Topology.EMPTY if K < kmin else Topology.ONE_CURVE
    reports = critical_points(a)
    scale = rtol * max(1.0, K)
    if len(reports) == 1:
        kmin = reports[0].K_value
        if abs(K - kmin) <= scale:
            return Topology.POINT
        return Topology.EMPTY if K < kmin else Topology.ONE_CURVE
    k_sad = reports[0].K_value
    k_cen = reports[1].K_value
    if abs(K - k_cen) <= scale:
        return Topology.POINTS
    if K < k_cen:
        return Topology.EMPTY
    if abs(K - k_sad) <= scale:
        return Topology.FIGURE_EIGHT
    return Topology.TWO_CURVES if K < k_sad else Topology.ONE_CURVE


def polar_level_radii(a: float, K: float, phi) -> np.ndarray:
    """Radii ``r`` with ``k_on_paraboloid(r cos phi, r sin phi) = K``.

    In polar coordinates K is a quadratic polynomial in ``r^2``; returns an
    array ``(..., 2)`` holding the smaller and larger root (NaN where absent).
    """
    c = c_of_a(a)
    A, B = origin_hessian(a)
    phi = np.asarray(phi, dtype=float)
    cs, sn = np.cos(phi) ** 2, np.sin(phi) ** 2
    quad = A * cs + B * sn
    quart = (a * cs + sn / a) ** 2 / 9.0
    const = c * c / 9.0 - K
    disc = quad * quad - 4.0 * quart * const
    sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
    x_lo = (-quad - sq) / (2.0 * quart)
    x_hi = (-quad + sq) / (2.0 * quart)
    r_lo = np.sqrt(np.where(x_lo >= 0, x_lo, np.nan))
    r_hi = np.sqrt(np.where(x_hi >= 0, x_hi, np.nan))
    return np.stack([r_lo, r_hi], axis=-1)


def _project_to_level(a: float, K: float, pts: np.ndarray, iters: int = 3) -> np.ndarray:
    """Newton steps along the gradient; points near critical points are left alone."""
    pts = pts.copy()
    for _ in range(iters):
        g = k_gradient(a, pts[:, 0], pts[:, 1])
        g2 = np.sum(g * g, axis=1)
        ok = g2 > 1e-10
        resid = k_on_paraboloid(a, pts[:, 0], pts[:, 1]) - K
        step = np.zeros_like(pts)
        step[ok] = (resid[ok] / g2[ok])[:, None] * g[ok]
        pts -= step
    return pts


def _resample_arclength(pts: np.ndarray, n: int) -> np.ndarray:
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return pts[:1]
    t = np.linspace(0.0, s[-1], n)
    return np.column_stack([np.interp(t, s, pts[:, 0]), np.interp(t, s, pts[:, 1])])


def _trace(a: float, K: float, grid: int) -> list[np.ndarray]:
    from skimage.measure import find_contours

    radius = math.sqrt(K) * 1.02 + 1e-3  # K >= M1^2 + M2^2 on the level set
    axis = np.linspace(-radius, radius, grid)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    Z = k_on_paraboloid(a, X, Y)
    h = axis[1] - axis[0]
    curves = []
    for path in find_contours(Z, K):
        pts = -radius + h * path  # (row, col) -> (M1, M2) for 'ij' indexing
        curves.append(pts)
    return curves


def level_curve(
    a: float, K: float, grid: int = 512, n_samples: int = 400, max_grid: int = 4096
) -> LevelCurveReport:
    """Topology and sampled polylines of the level set ``k_on_paraboloid = K``.

    Curves are traced by marching squares, pulled onto the exact level with
    Newton steps and resampled uniformly in arc length.  The grid is doubled
    while the number of traced components disagrees with the topology read
    off from the critical values.
    """
    a = check_modulus(a)
    topo = classify_level(a, K)
    report = LevelCurveReport(a, float(K), topo)
    if topo is Topology.EMPTY:
        return report
    if topo in (Topology.POINT, Topology.POINTS):
        if is_degenerate(a):
            locs = [(0.0, 0.0)]
        else:
            locs = [r.location for r in critical_points(a) if r.kind is not CriticalKind.SADDLE]
        report.curves = [np.array([loc]) for loc in locs]
        return report
    expected = {Topology.ONE_CURVE: 1, Topology.TWO_CURVES: 2}.get(topo)
    g = grid
    while True:
        raw = _trace(a, K, g)
        if expected is None or len(raw) == expected or g >= max_grid:
            break
        g *= 2
    curves = []
    for pts in raw:
        pts = _project_to_level(a, K, pts)
        closed = np.allclose(pts[0], pts[-1])
        # resampling interpolates along chords; pull the samples back onto the level
        pts = _project_to_level(a, K, _resample_arclength(pts, n_samples))
        if closed:
            pts[-1] = pts[0]
        curves.append(pts)
    # deterministic order: by mean M1, then mean M2
    curves.sort(key=lambda p: (round(float(p[:, 0].mean()), 9), round(float(p[:, 1].mean()), 9)))
    report.curves = curves
    report.grid = g
    return report
