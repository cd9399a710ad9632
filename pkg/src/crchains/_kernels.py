"""Compiled Dormand-Prince 5(4) stepping for the reduced and reconstructed systems.

State layouts
-------------
mode 0 (reduced):       ``[M1, M2, M3, P]``
mode 1 (reconstructed): ``[M1, M2, M3, P, qw, qx, qy, qz, gamma]``
"""
import numpy as np
from numba import njit

# Dormand-Prince tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
B = A[6].copy()
# B - Bhat; last entry multiplies the FSAL stage
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension of order 4: y(t + s h) = y + h * sum_j k_j * (P[j] . [s, s^2, s^3, s^4])
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

STATUS_DONE = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2


@njit(cache=True)
def rhs(mode, a, cc, sign, y, out):
    M1 = y[0]
    M2 = y[1]
    M3 = y[2]
    Pm = y[3]
    out[0] = sign * (-M2 * (M3 / a + 1.5 * Pm))
    out[1] = sign * (M1 * (a * M3 + 1.5 * Pm))
    out[2] = sign * (M1 * M2 * (1.0 / a - a))
    out[3] = 0.0
    if mode == 1:
        w = y[4]
        x = y[5]
        yq = y[6]
        z = y[7]
        # q' = q * xi with xi = (a M1, M2/a, -3P/2) on e_i = q_i / 2
        v1 = 0.5 * a * M1
        v2 = 0.5 * M2 / a
        v3 = -0.75 * Pm
        out[4] = sign * (-x * v1 - yq * v2 - z * v3)
        out[5] = sign * (w * v1 + yq * v3 - z * v2)
        out[6] = sign * (w * v2 - x * v3 + z * v1)
        out[7] = sign * (w * v3 + x * v2 - yq * v1)
        out[8] = sign * (-1.5 * M3 - cc * Pm)


@njit(cache=True)
def dopri_chunk(mode, a, sign, y0, t0, t_end, rtol, atol, h0, max_steps):
    """Advance at most ``max_steps`` accepted steps from ``(t0, y0)`` towards ``t_end``.

    Returns ``(ts, ys, ks, hs, n, status, h_next)`` where ``ks[i]`` holds the
    seven stage slopes of step ``i`` (for dense output).
    """
    dim = y0.shape[0]
    cc = 9.0 / 8.0 * (a + 1.0 / a)
    ts = np.empty(max_steps + 1)
    ys = np.empty((max_steps + 1, dim))
    ks = np.empty((max_steps, 7, dim))
    hs = np.empty(max_steps)
    ts[0] = t0
    ys[0] = y0
    k = np.empty((7, dim))
    ytmp = np.empty(dim)
    ynew = np.empty(dim)
    rhs(mode, a, cc, sign, y0, k[0])
    t = t0
    y = y0.copy()
    h = h0
    n = 0
    status = STATUS_MAX_STEPS
    eps = 2.220446049250313e-16
    while n < max_steps:
        if t >= t_end:
            status = STATUS_DONE
            break
        if h < 16.0 * eps * max(1.0, abs(t)):
            status = STATUS_UNDERFLOW
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for s in range(1, 7):
            for d in range(dim):
                acc = 0.0
                for j in range(s):
                    acc += A[s, j] * k[j, d]
                ytmp[d] = y[d] + h * acc
            rhs(mode, a, cc, sign, ytmp, k[s])
        # stage 6 input is the 5th-order solution (FSAL)
        for d in range(dim):
            ynew[d] = ytmp[d]
        err = 0.0
        for d in range(dim):
            acc = 0.0
            for j in range(7):
                acc += E[j] * k[j, d]
            sc = atol + rtol * max(abs(y[d]), abs(ynew[d]))
            r = abs(h * acc) / sc
            if r > err:
                err = r
        if err <= 1.0:
            for s in range(7):
                for d in range(dim):
                    ks[n, s, d] = k[s, d]
            hs[n] = h
            t = t_end if last else t + h
            if mode == 1:
                nq = np.sqrt(ynew[4] ** 2 + ynew[5] ** 2 + ynew[6] ** 2 + ynew[7] ** 2)
                for d in range(4, 8):
                    ynew[d] /= nq
            for d in range(dim):
                y[d] = ynew[d]
            n += 1
            ts[n] = t
            ys[n] = y
            if mode == 1:
                rhs(mode, a, cc, sign, y, k[0])
            else:
                for d in range(dim):
                    k[0, d] = k[6, d]
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if not last:
                h = h * fac
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
    if t >= t_end:
        status = STATUS_DONE
    return ts[: n + 1], ys[: n + 1], ks[:n], hs[:n], n, status, h
