"""Compiled kernels for the metric family and its geodesic flow.

Every model reduces to a parameter vector

    P = [kind, c, amplitude, center_u, center_v, radius]

with ``kind`` 0 for the upper half-plane chart (u = height, v = horizontal)
and 1 for Fermi coordinates (r, theta) around the core of a hyperbolic
cylinder with ``c = core_length / 2pi``.  The metric is

    g = exp(2 phi) * (E0(u) du^2 + G0(u) dv^2)

where phi is a compactly supported bump (zero when amplitude == 0).

State layouts for the integrator:

    mode 0:  (u, v, u', v')
    mode 1:  mode 0 + (J1, J1', J2, J2')          scalar Jacobi equation
    mode 2:  mode 0 + 4x4 state transition matrix (row-major)
"""

import math

import numpy as np
from numba import njit

HALFPLANE = 0
CYLINDER = 1

MODE_GEODESIC = 0
MODE_JACOBI = 1
MODE_STM = 2

STATUS_OK = 0
STATUS_DOMAIN = 1
STATUS_MAXSTEPS = 2

# Verner 6(5) pair, nine stages; row 7 holds the propagating weights and
# stage 8 is evaluated at the new point.
_A = np.zeros((9, 9))
_A[1, 0] = 9 / 50
_A[2, :2] = [29 / 324, 25 / 324]
_A[3, :3] = [1 / 16, 0, 3 / 16]
_A[4, :4] = [79129 / 250000, 0, -261237 / 250000, 19663 / 15625]
_A[5, :5] = [1336883 / 4909125, 0, -25476 / 30875, 194159 / 185250, 8225 / 78546]
_A[6, :6] = [-2459386 / 14727375, 0, 19504 / 30875, 2377474 / 13615875,
             -6157250 / 5773131, 902 / 735]
_A[7, :7] = [2699 / 7410, 0, -252 / 1235, -1393253 / 3993990, 236875 / 72618,
             -135 / 49, 15 / 22]
_A[8, :8] = [11 / 144, 0, 0, 256 / 693, 0, 125 / 504, 125 / 528, 5 / 72]
_B = np.array([11 / 144, 0, 0, 256 / 693, 0, 125 / 504, 125 / 528, 5 / 72, 0])
_B5 = np.array([28 / 477, 0, 0, 212 / 441, -312500 / 366177, 2125 / 1764, 0,
                -2105 / 35532, 2995 / 17766])
_E = _B - _B5

# global error of the flow grows roughly linearly in time; keep the per-unit-
# time local budget well below the requested tolerance
_LOCAL_SHARE = 0.05


CYLINDER_R_MAX = 300.0


@njit(cache=True)
def wrap_angle(x):
    return x - 2.0 * math.pi * math.floor((x + math.pi) / (2.0 * math.pi))


@njit(cache=True)
def bump(P, u, v):
    """Return phi and its first and second chart derivatives."""
    amp = P[2]
    if amp == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    cu = P[3]
    cv = P[4]
    R = P[5]
    du = u - cu
    if P[0] == HALFPLANE:
        dv = v - cv
        n = du * du + dv * dv
        q = n / (cu * u)
        qu = 2.0 * du / (cu * u) - n / (cu * u * u)
        qv = 2.0 * dv / (cu * u)
        quu = 2.0 / (cu * u) - 4.0 * du / (cu * u * u) + 2.0 * n / (cu * u * u * u)
        quv = -2.0 * dv / (cu * u * u)
        qvv = 2.0 / (cu * u)
    else:
        c = P[1]
        w = wrap_angle(v - cv)
        q = du * du + c * c * w * w
        qu = 2.0 * du
        qv = 2.0 * c * c * w
        quu = 2.0
        quv = 0.0
        qvv = 2.0 * c * c
    s = 1.0 / (R * R)
    x = q * s
    if x >= 1.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    xm = x - 1.0
    b = math.exp(x / xm)
    d1 = -b / (xm * xm)
    d2 = b * (2.0 * x - 1.0) / (xm * xm * xm * xm)
    phi = amp * b
    pu = amp * d1 * qu * s
    pv = amp * d1 * qv * s
    puu = amp * (d2 * qu * qu * s * s + d1 * quu * s)
    puv = amp * (d2 * qu * qv * s * s + d1 * quv * s)
    pvv = amp * (d2 * qv * qv * s * s + d1 * qvv * s)
    return phi, pu, pv, puu, puv, pvv


@njit(cache=True)
def base_terms(P, u):
    """E0, e1 = E0'/2E0, e1', rho = G0/E0, rho', g1 = G0'/2G0, g1'."""
    if P[0] == HALFPLANE:
        iu = 1.0 / u
        return iu * iu, -iu, iu * iu, 1.0, 0.0, -iu, iu * iu
    c = P[1]
    ch = math.cosh(u)
    sh = math.sinh(u)
    return 1.0, 0.0, 0.0, c * c * ch * ch, 2.0 * c * c * ch * sh, sh / ch, 1.0 / (ch * ch)


@njit(cache=True)
def in_domain(P, u, v):
    if not (math.isfinite(u) and math.isfinite(v)):
        return False
    if P[0] == HALFPLANE:
        return u > 0.0
    # cosh(r)^2 overflows near r = 355; the Fermi chart stops well before
    return abs(u) < CYLINDER_R_MAX


@njit(cache=True)
def metric_diag(P, u, v):
    """Diagonal entries E, G of the metric."""
    E0, e1, e1p, rho, rhop, g1, g1p = base_terms(P, u)
    phi = bump(P, u, v)[0]
    f = math.exp(2.0 * phi)
    return f * E0, f * E0 * rho


@njit(cache=True)
def metric_diag_grad(P, u, v):
    """E, G and their partial derivatives (E_u, E_v, G_u, G_v)."""
    E0, e1, e1p, rho, rhop, g1, g1p = base_terms(P, u)
    phi, pu, pv, puu, puv, pvv = bump(P, u, v)
    f = math.exp(2.0 * phi)
    E = f * E0
    G = f * E0 * rho
    Eu = 2.0 * E * (pu + e1)
    Ev = 2.0 * E * pv
    Gu = 2.0 * G * (pu + g1)
    Gv = 2.0 * G * pv
    return E, G, Eu, Ev, Gu, Gv


@njit(cache=True)
def curvature(P, u, v):
    """Gaussian curvature K = exp(-2 phi) * (-1 - Laplacian_0 phi)."""
    E0, e1, e1p, rho, rhop, g1, g1p = base_terms(P, u)
    phi, pu, pv, puu, puv, pvv = bump(P, u, v)
    G0 = E0 * rho
    lap = puu / E0 + pvv / G0 + rhop / (2.0 * rho * E0) * pu
    return math.exp(-2.0 * phi) * (-1.0 - lap)


@njit(cache=True)
def christoffel(P, u, v):
    """(A1, B1, C1, A2, B2, C2) = Gamma^u_{uu,uv,vv}, Gamma^v_{uu,uv,vv}."""
    E0, e1, e1p, rho, rhop, g1, g1p = base_terms(P, u)
    phi, pu, pv, puu, puv, pvv = bump(P, u, v)
    return (pu + e1, pv, -rho * (pu + g1), -pv / rho, pu + g1, pv)


@njit(cache=True)
def _geodesic_rhs(P, y, out):
    u = y[0]
    v = y[1]
    du = y[2]
    dv = y[3]
    E0, e1, e1p, rho, rhop, g1, g1p = base_terms(P, u)
    phi, pu, pv, puu, puv, pvv = bump(P, u, v)
    A1 = pu + e1
    B1 = pv
    C1 = -rho * (pu + g1)
    A2 = -pv / rho
    B2 = pu + g1
    C2 = pv
    out[0] = du
    out[1] = dv
    out[2] = -(A1 * du * du + 2.0 * B1 * du * dv + C1 * dv * dv)
    out[3] = -(A2 * du * du + 2.0 * B2 * du * dv + C2 * dv * dv)
    return E0, e1p, rho, rhop, g1, g1p, phi, pu, pv, puu, puv, pvv, A1, B1, C1, A2, B2, C2


@njit(cache=True)
def rhs(P, y, out, mode):
    (E0, e1p, rho, rhop, g1, g1p, phi, pu, pv, puu, puv, pvv,
     A1, B1, C1, A2, B2, C2) = _geodesic_rhs(P, y, out)
    if mode == MODE_JACOBI:
        G0 = E0 * rho
        lap = puu / E0 + pvv / G0 + rhop / (2.0 * rho * E0) * pu
        K = math.exp(-2.0 * phi) * (-1.0 - lap)
        out[4] = y[5]
        out[5] = -K * y[4]
        out[6] = y[7]
        out[7] = -K * y[6]
    elif mode == MODE_STM:
        du = y[2]
        dv = y[3]
        # partial derivatives of the Christoffel symbols
        A1u = puu + e1p
        A1v = puv
        B1u = puv
        B1v = pvv
        C1u = -rhop * (pu + g1) - rho * (puu + g1p)
        C1v = -rho * puv
        A2u = -puv / rho + pv * rhop / (rho * rho)
        A2v = -pvv / rho
        B2u = puu + g1p
        B2v = puv
        C2u = puv
        C2v = pvv
        D = np.zeros((4, 4))
        D[0, 2] = 1.0
        D[1, 3] = 1.0
        D[2, 0] = -(A1u * du * du + 2.0 * B1u * du * dv + C1u * dv * dv)
        D[2, 1] = -(A1v * du * du + 2.0 * B1v * du * dv + C1v * dv * dv)
        D[2, 2] = -(2.0 * A1 * du + 2.0 * B1 * dv)
        D[2, 3] = -(2.0 * B1 * du + 2.0 * C1 * dv)
        D[3, 0] = -(A2u * du * du + 2.0 * B2u * du * dv + C2u * dv * dv)
        D[3, 1] = -(A2v * du * du + 2.0 * B2v * du * dv + C2v * dv * dv)
        D[3, 2] = -(2.0 * A2 * du + 2.0 * B2 * dv)
        D[3, 3] = -(2.0 * B2 * du + 2.0 * C2 * dv)
        for i in range(4):
            for j in range(4):
                s = 0.0
                for k in range(4):
                    s += D[i, k] * y[4 + 4 * k + j]
                out[4 + 4 * i + j] = s


@njit(cache=True)
def _error_ratio(P, y, err, tol, mode):
    E, G = metric_diag(P, y[0], y[1])
    se = math.sqrt(E)
    sg = math.sqrt(G)
    ep = math.hypot(se * err[0], sg * err[1])
    ev = math.hypot(se * err[2], sg * err[3])
    r = max(ep, ev) / tol
    n = y.shape[0]
    if n > 4:
        scale = 0.0
        for i in range(4, n):
            scale = max(scale, abs(y[i]))
        for i in range(4, n):
            r = max(r, abs(err[i]) / (tol * (abs(y[i]) + scale)))
    return r


@njit(cache=True)
def _renormalize(P, y):
    E, G = metric_diag(P, y[0], y[1])
    s = math.sqrt(E * y[2] * y[2] + G * y[3] * y[3])
    y[2] /= s
    y[3] /= s


@njit(cache=True)
def integrate(P, y0, t, tol, mode, renormalize, max_steps):
    """Adaptive Verner 6(5) integration of the selected system over time t.

    Returns (y, status, steps).  Local error is controlled per unit time in
    the metric norm for the geodesic components and relative to the matrix
    magnitude for Jacobi/STM components.
    """
    n = y0.shape[0]
    y = y0.copy()
    if t == 0.0:
        return y, STATUS_OK, 0
    direction = 1.0 if t > 0.0 else -1.0
    remaining = abs(t)
    k = np.zeros((9, n))
    ytmp = np.zeros(n)
    err = np.zeros(n)
    h = min(0.1, remaining)
    budget = tol * _LOCAL_SHARE
    steps = 0
    rhs(P, y, k[0], mode)
    if remaining < 1e-13:
        # below round-off of any error estimate; one Euler step is exact enough
        for i in range(n):
            y[i] += t * k[0, i]
        return y, STATUS_OK, 1
    while remaining > 0.0:
        if steps >= max_steps:
            return y, STATUS_MAXSTEPS, steps
        last = h >= remaining
        if last:
            h = remaining
        hs = direction * h
        inside = True
        for s in range(1, 9):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * k[j, i]
                ytmp[i] = y[i] + hs * acc
            if not in_domain(P, ytmp[0], ytmp[1]):
                inside = False
                break
            rhs(P, ytmp, k[s], mode)
        if not inside:
            h *= 0.25
            # near the chart edge the accepted steps shrink to round-off size
            if h < 1e-12:
                return y, STATUS_DOMAIN, steps
            continue
        # ytmp holds the propagated solution, k[8] its slope
        for i in range(n):
            acc = 0.0
            for j in range(9):
                acc += _E[j] * k[j, i]
            err[i] = hs * acc
        ratio = _error_ratio(P, ytmp, err, budget * h, mode)
        if ratio <= 1.0:
            y[:] = ytmp
            remaining -= h
            steps += 1
            if renormalize:
                _renormalize(P, y)
                rhs(P, y, k[0], mode)
            else:
                k[0, :] = k[8, :]
            if last:
                break
            fac = 4.0 if ratio == 0.0 else min(4.0, max(0.2, 0.9 * ratio ** (-0.2)))
            h = min(h * fac, 1.0)
        elif math.isfinite(ratio):
            h *= max(0.2, 0.9 * ratio ** (-0.2))
        else:
            h *= 0.2
        if h < 1e-14:
            return y, STATUS_DOMAIN, steps
    if not in_domain(P, y[0], y[1]):
        return y, STATUS_DOMAIN, steps
    return y, STATUS_OK, steps


@njit(cache=True)
def integrate_samples(P, y0, times, tol, mode, renormalize, max_steps):
    """States at increasing sample times (times[0] may be 0)."""
    out = np.zeros((times.shape[0], y0.shape[0]))
    y = y0.copy()
    t_prev = 0.0
    for i in range(times.shape[0]):
        y, status, steps = integrate(P, y, times[i] - t_prev, tol, mode, renormalize, max_steps)
        if status != STATUS_OK:
            return out, status
        out[i] = y
        t_prev = times[i]
    return out, STATUS_OK
