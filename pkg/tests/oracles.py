"""Independent reference computations shared by the tests."""

import itertools
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize


def brute_classes(rank, length, unoriented):
    """Reference class list built from plain string manipulation only."""
    alpha = "".join(chr(ord("a") + i) + chr(ord("A") + i) for i in range(rank))
    inv = str.maketrans(alpha, alpha.swapcase())

    def reduced(w):
        cyc = w + w[:1]
        return all(x != y.translate(inv) for x, y in zip(cyc, cyc[1:]))

    seen, out = set(), []
    for t in itertools.product(alpha, repeat=length):
        w = "".join(t)
        if not reduced(w) or any(w == w[:d] * (length // d)
                                 for d in range(1, length) if length % d == 0):
            continue
        cls = {w[i:] + w[:i] for i in range(length)}
        if unoriented:
            r = w[::-1].translate(inv)
            cls |= {r[i:] + r[:i] for i in range(length)}
        key = frozenset(cls)
        if key not in seen:
            seen.add(key)
            out.append(w)
    return len(out)


# --- metric-derived references (finite differences of the metric only) ---

FD = 1e-5


def metric_diag(model, u, v):
    g = model.metric(np.array([u, v]))
    return g[0, 0], g[1, 1]


def metric_partials(model, u, v, h=FD):
    Ep, Gp = metric_diag(model, u + h, v)
    Em, Gm = metric_diag(model, u - h, v)
    Eq, Gq = metric_diag(model, u, v + h)
    En, Gn = metric_diag(model, u, v - h)
    return ((Ep - Em) / (2 * h), (Eq - En) / (2 * h), (Gp - Gm) / (2 * h), (Gq - Gn) / (2 * h))


def gauss_curvature(model, u, v, h=1e-4):
    """K = -1/(2 sqrt(EG)) [d_u(G_u / sqrt(EG)) + d_v(E_v / sqrt(EG))] by central differences."""
    def ratio_u(a, b):
        E, G = metric_diag(model, a, b)
        return metric_partials(model, a, b)[2] / math.sqrt(E * G)

    def ratio_v(a, b):
        E, G = metric_diag(model, a, b)
        return metric_partials(model, a, b)[1] / math.sqrt(E * G)

    E, G = metric_diag(model, u, v)
    du = (ratio_u(u + h, v) - ratio_u(u - h, v)) / (2 * h)
    dv = (ratio_v(u, v + h) - ratio_v(u, v - h)) / (2 * h)
    return -(du + dv) / (2 * math.sqrt(E * G))


def geodesic_rhs(model, y):
    u, v, du, dv = y[:4]
    E, G = metric_diag(model, u, v)
    Eu, Ev, Gu, Gv = metric_partials(model, u, v)
    ddu = -(Eu * du * du + 2 * Ev * du * dv - Gu * dv * dv) / (2 * E)
    ddv = -(-Ev * du * du + 2 * Gu * du * dv + Gv * dv * dv) / (2 * G)
    return np.array([du, dv, ddu, ddv])


def reference_flow(model, y0, t, rtol=1e-12):
    sol = solve_ivp(lambda s, y: geodesic_rhs(model, y), (0.0, t), np.asarray(y0, float),
                    method="DOP853", rtol=rtol, atol=rtol)
    return sol.y[:, -1]


def reference_jacobi(model, y0, t, rtol=1e-11):
    """Geodesic plus the two fundamental Jacobi solutions via scipy.

    K comes from the model; it is checked against gauss_curvature separately,
    and nested differences here would swamp the step-size control.
    """
    def rhs(s, z):
        K = model.curvature(z[:2])
        return np.concatenate([geodesic_rhs(model, z[:4]),
                               [z[5], -K * z[4], z[7], -K * z[6]]])

    z0 = np.concatenate([np.asarray(y0, float), [1.0, 0.0, 0.0, 1.0]])
    sol = solve_ivp(rhs, (0.0, t), z0, method="DOP853", rtol=rtol, atol=rtol)
    z = sol.y[:, -1]
    return np.array([[z[4], z[6]], [z[5], z[7]]])


def connection_form(model, u, v):
    """Coefficients (w_u, w_v) with d(angle)/dt = w_u u' + w_v v' along geodesics."""
    E, G = metric_diag(model, u, v)
    _, Ev, Gu, _ = metric_partials(model, u, v)
    s = math.sqrt(E * G)
    return Ev / (2 * s), -Gu / (2 * s)


def sasaki_path_distance(model, x1, a1, x2, a2, nodes=24):
    """Length of a discretized minimal path in (u, v, angle) for the Sasaki
    metric g(dx, dx) + (d angle - w(dx))^2, endpoints fixed."""
    p0 = np.array([x1[0], x1[1], a1])
    p1 = np.array([x2[0], x2[1], a2])
    s = np.linspace(0.0, 1.0, nodes + 1)[1:-1, None]
    init = ((1 - s) * p0 + s * p1).ravel()

    def length(flat):
        pts = np.vstack([p0, flat.reshape(-1, 3), p1])
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            m = 0.5 * (a + b)
            d = b - a
            E, G = metric_diag(model, m[0], m[1])
            wu, wv = connection_form(model, m[0], m[1])
            fiber = d[2] - wu * d[0] - wv * d[1]
            total += math.sqrt(E * d[0] ** 2 + G * d[1] ** 2 + fiber ** 2)
        return total

    res = minimize(length, init, method="BFGS", options={"gtol": 1e-10})
    return res.fun
