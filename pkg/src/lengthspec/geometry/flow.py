"""Geodesic flow, Jacobi fields and geodesic segments on a model's cover chart."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import (ChartTransitionError, ConfigurationError, DegenerateOrbitError,
                      NonConvergenceError, RangeError)
from . import _kernels, hyperbolic
from .models import ChartPoint

DEFAULT_TOL = 1e-10
MAX_STEPS = 2_000_000
UNIT_SPEED_TOL = 1e-9


@dataclass(frozen=True)
class PhasePoint:
    base: ChartPoint
    velocity: tuple

    @property
    def state(self):
        return np.array([self.base.u, self.base.v, self.velocity[0], self.velocity[1]])

    @classmethod
    def from_state(cls, y, chart_id="halfplane"):
        return cls(ChartPoint(float(y[0]), float(y[1]), chart_id), (float(y[2]), float(y[3])))


def phase_point(model, x, velocity=None, angle=None):
    """Unit tangent vector at ``x`` given either a direction or a frame angle."""
    x = model.check_domain(x)
    if angle is not None:
        vel = model.unit_vector(x, angle)
    else:
        vel = np.asarray(velocity, dtype=float)
        speed = model.norm(x, vel)
        if speed == 0.0:
            raise ConfigurationError("velocity must be nonzero")
        vel = vel / speed
    return PhasePoint(ChartPoint(float(x[0]), float(x[1]), model.chart_id), (float(vel[0]), float(vel[1])))


def _check_tol(tol):
    if not 1e-13 <= tol <= 1e-6:
        raise ConfigurationError("tolerance must lie in [1e-13, 1e-6]")


def _as_state(model, xi):
    y = xi.state if isinstance(xi, PhasePoint) else np.asarray(xi, dtype=float)[:4].copy()
    model.check_domain(y[:2])
    speed = model.norm(y[:2], y[2:4])
    if abs(speed - 1.0) > UNIT_SPEED_TOL:
        raise ConfigurationError(f"phase point is not unit speed (|v| = {speed:.12g})")
    return y


def _run(model, y0, t, tol, mode, renormalize=False):
    y, status, _ = _kernels.integrate(model.params, np.ascontiguousarray(y0, dtype=float),
                                      float(t), float(tol), mode, renormalize, MAX_STEPS)
    if status == _kernels.STATUS_DOMAIN:
        raise ChartTransitionError(
            f"trajectory left the {model.chart_id} chart near ({y[0]:.6g}, {y[1]:.6g})")
    if status == _kernels.STATUS_MAXSTEPS:
        raise NonConvergenceError("integrator exceeded its step budget")
    return y


def flow_state(model, y, t, tol=DEFAULT_TOL, renormalize=False):
    """G^t on a raw state (u, v, u', v')."""
    return _run(model, np.asarray(y, dtype=float)[:4], t, tol, _kernels.MODE_GEODESIC, renormalize)


def flow_samples(model, y, times, tol=DEFAULT_TOL):
    """States at each of the increasing ``times``."""
    out, status = _kernels.integrate_samples(model.params, np.asarray(y, dtype=float)[:4].copy(),
                                             np.asarray(times, dtype=float), float(tol),
                                             _kernels.MODE_GEODESIC, False, MAX_STEPS)
    if status != _kernels.STATUS_OK:
        raise ChartTransitionError("trajectory left the chart while sampling")
    return out


def flow_stm(model, y, t, tol=DEFAULT_TOL):
    """(G^t(y), dG^t/dy) with the 4x4 derivative taken in chart coordinates."""
    z = np.zeros(20)
    z[:4] = np.asarray(y, dtype=float)[:4]
    z[4:] = np.eye(4).ravel()
    z = _run(model, z, t, tol, _kernels.MODE_STM)
    return z[:4], z[4:].reshape(4, 4)


def integrate_geodesic(model, xi, t, tol=DEFAULT_TOL, renormalize=False):
    """Flow a unit tangent vector for time ``t``.

    Renormalization of the speed after each step is off by default: the
    conserved speed is then an honest check on integration error.
    """
    _check_tol(tol)
    if not math.isfinite(t):
        raise ConfigurationError("flow time must be finite")
    y = _as_state(model, xi)
    return PhasePoint.from_state(_run(model, y, t, tol, _kernels.MODE_GEODESIC, renormalize),
                                 model.chart_id)


@dataclass(frozen=True)
class Monodromy:
    """Transverse linearized flow acting on (J, J').

    ``det`` is accumulated as a product of per-segment determinants, which
    stays accurate when the entries of ``matrix`` are exponentially large.
    """

    matrix: np.ndarray
    eigenvalues: tuple
    base_length: float
    det: float

    @classmethod
    def from_matrix(cls, matrix, base_length, det=None):
        m = np.asarray(matrix, dtype=float)
        if det is None:
            det = float(np.linalg.det(m))
        tr = float(m[0, 0] + m[1, 1])
        disc = tr * tr - 4.0 * det
        if disc < 0.0:
            if disc < -1e-9 * max(1.0, tr * tr):
                raise DegenerateOrbitError(f"monodromy has complex eigenvalues (trace {tr:.6g})")
            disc = 0.0
        big = 0.5 * (tr + math.copysign(math.sqrt(disc), tr))
        small = det / big if big != 0.0 else 0.0
        return cls(m, (float(big), float(small)), float(base_length), float(det))

    @property
    def expanding(self):
        return max(self.eigenvalues, key=abs)

    @property
    def log_expanding(self):
        return math.log(abs(self.expanding))

    def compose(self, other):
        """Monodromy of ``self`` followed by ``other``."""
        return Monodromy.from_matrix(other.matrix @ self.matrix, self.base_length + other.base_length,
                                     self.det * other.det)

    def power(self, k):
        if k < 1:
            raise ConfigurationError("iterate count must be >= 1")
        return Monodromy.from_matrix(np.linalg.matrix_power(self.matrix, k), k * self.base_length,
                                     self.det ** k)


def _jacobi_segment(model, y, t, tol):
    z = np.zeros(8)
    z[:4] = y[:4]
    z[4], z[7] = 1.0, 1.0
    z = _run(model, z, t, tol, _kernels.MODE_JACOBI)
    m = np.array([[z[4], z[6]], [z[5], z[7]]])
    return z[:4], m


def jacobi_along(model, y, t, tol=DEFAULT_TOL, segment=1.0, recenter=None, period=None):
    """(end state, Monodromy) of the Jacobi equation along the orbit of ``y``.

    The solution is built from unit-length pieces.  ``recenter`` (with
    ``period``) maps the state back by a deck transformation every period so
    long iterates stay in a bounded part of the chart.
    """
    y = np.asarray(y, dtype=float)[:4].copy()
    total = np.eye(2)
    det = 1.0
    done = 0.0
    next_stop = period if period else math.inf
    while done < t:
        h = min(segment, t - done, next_stop - done)
        if h <= 0.0:
            break
        y, m = _jacobi_segment(model, y, h, tol)
        total = m @ total
        det *= m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        done += h
        if period and recenter is not None and abs(done - next_stop) <= 1e-12 * max(1.0, done):
            y = recenter(y)
            next_stop += period
    return y, Monodromy.from_matrix(total, t, det)


def integrate_jacobi(model, xi, t, tol=DEFAULT_TOL):
    """Fundamental solution of J'' + K J = 0 along the geodesic through ``xi``."""
    _check_tol(tol)
    if not (math.isfinite(t) and t >= 0.0):
        raise ConfigurationError("flow time must be finite and non-negative")
    y = _as_state(model, xi)
    return jacobi_along(model, y, t, tol)[1]


# --- geodesic segments --------------------------------------------------

def _closed_form_connect(model, p, q):
    hp, hq = model.to_halfplane(p), model.to_halfplane(q)
    d, tp, tq = hyperbolic.segment(hp, hq)
    return float(d), model.tangent_from_halfplane(hp, tp), model.tangent_from_halfplane(hq, tq)


def connect(model, p, q, tol=1e-12, max_iter=40):
    """Geodesic segment from p to q in the cover chart.

    Returns (length, unit tangent at p, unit tangent at q).  Constant
    curvature models use closed forms; perturbed models shoot from the
    unperturbed segment with Newton's method on (initial angle, length).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if model.constant_curvature:
        return _closed_form_connect(model, p, q)
    d0, v0, _ = _closed_form_connect(model.base, p, q)
    if d0 == 0.0:
        return 0.0, np.zeros(2), np.zeros(2)
    alpha = model.frame_angle(p, v0)
    L = d0 * math.exp(0.5 * (_phi(model, p) + _phi(model, q)))
    Eq, Gq = _kernels.metric_diag(model.params, q[0], q[1])
    scale = np.array([math.sqrt(Eq), math.sqrt(Gq)])
    res_norm = math.inf
    for _ in range(max_iter):
        y0 = np.concatenate([p, model.unit_vector(p, alpha)])
        # the endpoint moves along J(L) n(L) when the initial angle turns,
        # J the Jacobi field with J(0) = 0, J'(0) = 1
        end, m = _jacobi_segment(model, y0, L, min(1e-11, max(1e-13, tol)))
        F = end[:2] - q
        res_norm = float(np.linalg.norm(scale * F))
        if res_norm <= tol * max(1.0, L):
            return L, y0[2:], end[2:]
        E, G = _kernels.metric_diag(model.params, end[0], end[1])
        normal = np.array([-math.sqrt(G / E) * end[3], math.sqrt(E / G) * end[2]])
        J = np.column_stack([m[0, 1] * normal, end[2:4]])
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while lam > 1e-3:
            if L + lam * step[1] > 0.0:
                break
            lam *= 0.5
        alpha += lam * step[0]
        L += lam * step[1]
    raise NonConvergenceError("geodesic shooting did not converge", residual=res_norm)


def _phi(model, x):
    return _kernels.bump(model.params, float(x[0]), float(x[1]))[0]


def segment_length(model, p, q):
    return connect(model, p, q)[0]


def midpoint(model, p, q):
    if model.constant_curvature:
        m = hyperbolic.midpoint(model.to_halfplane(p), model.to_halfplane(q))
        return model.from_halfplane(m)
    L, vp, _ = connect(model, p, q)
    return flow_state(model, np.concatenate([p, vp]), 0.5 * L, tol=1e-12)[:2]


def points_along(model, p, q, n):
    """``n`` points splitting the segment p -> q into equal pieces (p excluded, q included)."""
    p = np.asarray(p, dtype=float)
    if model.constant_curvature:
        hp, hq = model.to_halfplane(p), model.to_halfplane(q)
        d, tp, _ = hyperbolic.segment(hp, hq)
        pts = [hyperbolic.point_along(hp, tp, d * (i + 1) / n) for i in range(n - 1)]
        return np.array([model.from_halfplane(x) for x in pts] + [np.asarray(q, dtype=float)])
    L, vp, _ = connect(model, p, q)
    times = L * np.arange(1, n) / n
    pts = flow_samples(model, np.concatenate([p, vp]), times, tol=1e-12)[:, :2] if n > 1 else np.zeros((0, 2))
    return np.vstack([pts, np.asarray(q, dtype=float)[None, :]])


def sasaki_distance(model, xi1, xi2, max_distance=None):
    """First-order Sasaki distance sqrt(d_base^2 + d_fiber^2).

    The fiber term is the angle between the second velocity and the parallel
    transport of the first along the connecting geodesic.  In two dimensions
    parallel transport preserves the angle to the (geodesic) tangent, so no
    transport ODE is needed.  Valid for separations well inside the
    injectivity radius.
    """
    y1 = _as_state(model, xi1)
    y2 = _as_state(model, xi2)
    limit = model.injectivity_radius_lower_bound if max_distance is None else max_distance
    p, q = y1[:2], y2[:2]
    a1 = model.frame_angle(p, y1[2:])
    a2 = model.frame_angle(q, y2[2:])
    if np.array_equal(p, q):
        return abs(_kernels.wrap_angle(a2 - a1))
    d, tp, tq = connect(model, p, q)
    if d > limit:
        raise RangeError(f"base points are {d:.6g} apart, beyond the local range {limit:.6g}")
    if d == 0.0:
        return abs(_kernels.wrap_angle(a2 - a1))
    transported = model.frame_angle(q, tq) + (a1 - model.frame_angle(p, tp))
    fiber = _kernels.wrap_angle(a2 - transported)
    return math.hypot(d, fiber)


def check_unit_speed(model, xi, tol):
    y = xi.state if isinstance(xi, PhasePoint) else np.asarray(xi, dtype=float)
    return abs(model.norm(y[:2], y[2:4]) - 1.0) <= tol


__all__ = [
    "PhasePoint", "Monodromy", "phase_point", "integrate_geodesic", "integrate_jacobi",
    "flow_state", "flow_samples", "flow_stm", "jacobi_along", "connect", "midpoint",
    "points_along", "segment_length", "sasaki_distance",
]
