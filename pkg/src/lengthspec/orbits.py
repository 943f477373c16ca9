"""Closed geodesics in free-homotopy classes: curve shortening, multiple
shooting Newton refinement, monodromy and determinant weights."""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import schottky, words
from .errors import (ConfigurationError, ContractibleClassError, DegenerateOrbitError,
                     LengthSpecError, NonConvergenceError)
from .geometry import _kernels, flow, hyperbolic
from .geometry.flow import Monodromy
from .geometry.models import ChartPoint, MobiusDeck, ShiftDeck

NEWTON_MAX_ITER = 50
DEGENERATE_TOL = 1e-6


@dataclass(frozen=True)
class Loop:
    """Closed polyline in the cover chart.

    ``vertices`` holds x_0 .. x_{N-1}; the loop closes at deck(word)(x_0).
    """

    vertices: np.ndarray
    word: str
    length: float
    chart_id: str = "halfplane"

    @classmethod
    def from_vertices(cls, model, vertices, word):
        v = np.array(vertices, dtype=float).reshape(-1, 2)
        pts = np.vstack([v, model.deck(word).point(v[0])])
        length = sum(flow.segment_length(model, pts[i], pts[i + 1]) for i in range(len(v)))
        return cls(v, word, float(length), model.chart_id)

    @property
    def points(self):
        return [ChartPoint(float(u), float(v), self.chart_id) for u, v in self.vertices]

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class ClosedGeodesic:
    word: str
    length: float
    loop: Loop
    monodromy: Monodromy
    eigenvalues: tuple
    residual: float
    state: np.ndarray = field(repr=False)
    iterations: int = 0

    @property
    def expanding(self):
        return max(self.eigenvalues, key=abs)


# --- Birkhoff curve shortening ---------------------------------------------

def _midpoints(model, left, right):
    if model.constant_curvature:
        m = hyperbolic.midpoint(model.to_halfplane(left), model.to_halfplane(right))
        return model.from_halfplane(m)
    return np.array([flow.midpoint(model, a, b) for a, b in zip(left, right)])


def _even_count(model, loop):
    v = loop.vertices
    if len(v) % 2 == 0:
        return v
    closing = model.deck(loop.word).point(v[0])
    return np.vstack([v, _midpoints(model, v[-1:], closing[None, :])])


def shorten_loop(model, loop, max_iters=200, tol=1e-10, return_history=False):
    """Birkhoff shortening: alternately replace the odd and even vertices by
    midpoints of their neighbours.

    Each half-sweep replaces a broken geodesic by a straight one, so the
    length never increases.  Stops once a full sweep changes the length by
    less than ``tol`` (relative), or after ``max_iters`` sweeps.
    """
    if not words.free_reduce(loop.word):
        raise ContractibleClassError("loop is in the trivial class")
    if len(loop.vertices) < 8:
        raise ConfigurationError("curve shortening needs at least 8 vertices")
    floor = 0.1 * model.injectivity_radius_lower_bound
    deck = model.deck(loop.word)
    inv = deck.inverse()
    v = _even_count(model, loop)
    n = len(v)
    current = Loop.from_vertices(model, v, loop.word)
    history = [current.length]
    for _ in range(max_iters):
        for parity in (1, 0):
            idx = np.arange(parity, n, 2)
            ext = np.vstack([inv.point(v[-1])[None, :], v, deck.point(v[0])[None, :]])
            v = v.copy()
            v[idx] = _midpoints(model, ext[idx], ext[idx + 2])
        new = Loop.from_vertices(model, v, loop.word)
        if new.length < floor:
            raise ContractibleClassError(
                f"loop length {new.length:.3g} fell below 0.1 * injectivity radius")
        # guard against round-off making the sequence tick upwards
        if new.length > current.length:
            new = Loop(new.vertices, new.word, current.length, new.chart_id) \
                if new.length - current.length <= 1e-12 * current.length else new
        history.append(new.length)
        done = current.length - new.length <= tol * current.length
        current = new
        if done:
            break
    return (current, history) if return_history else current


# --- multiple shooting ----------------------------------------------------

def _scale(model, x):
    E, G = _kernels.metric_diag(model.params, float(x[0]), float(x[1]))
    se, sg = math.sqrt(E), math.sqrt(G)
    return np.array([se, sg, se, sg])


def _accel(model, y):
    out = np.zeros(4)
    _kernels.rhs(model.params, np.ascontiguousarray(y, dtype=float), out, _kernels.MODE_GEODESIC)
    return out


def _initial_nodes(model, v, deck):
    pts = np.vstack([v, deck.point(v[0])])
    states, taus = [], []
    for i in range(len(v)):
        d, tp, _ = flow.connect(model, pts[i], pts[i + 1])
        states.append(np.concatenate([pts[i], tp]))
        taus.append(d)
    return np.array(states), np.array(taus)


def _shooting_system(model, deck, states, taus, itol):
    M = len(states)
    F = np.zeros(4 * M + 1)
    J = np.zeros((4 * M + 1, 5 * M))
    col_scale = [1.0 / _scale(model, s[:2]) for s in states]
    for i in range(M):
        end, stm = flow.flow_stm(model, states[i], taus[i], itol)
        if i + 1 < M:
            target = states[i + 1]
            dtarget = np.eye(4)
            j = i + 1
        else:
            target = deck.state(states[0])
            dtarget = deck.jacobian(states[0])
            j = 0
        rs = _scale(model, target[:2])
        rows = slice(4 * i, 4 * i + 4)
        F[rows] = rs * (end - target)
        J[rows, 4 * i:4 * i + 4] += rs[:, None] * stm * col_scale[i][None, :]
        J[rows, 4 * j:4 * j + 4] -= rs[:, None] * dtarget * col_scale[j][None, :]
        J[rows, 4 * M + i] = rs * _accel(model, end)
    u, v, du, dv = states[0]
    E, G, Eu, Ev, Gu, Gv = _kernels.metric_diag_grad(model.params, u, v)
    F[-1] = E * du * du + G * dv * dv - 1.0
    J[-1, :4] = np.array([Eu * du * du + Gu * dv * dv, Ev * du * du + Gv * dv * dv,
                          2.0 * E * du, 2.0 * G * dv]) * col_scale[0]
    return F, J, col_scale


def refine_newton(model, loop, tol=1e-10, max_iter=NEWTON_MAX_ITER):
    """Solve the periodicity conditions by multiple shooting.

    Unknowns are the phase points at the loop vertices and the flow times
    between them; equations ask each flowed segment to land on the next node
    (the last on the deck image of the first) with unit speed at node 0.
    The system is underdetermined by the freedom to slide nodes along the
    orbit, so each Gauss-Newton step is the minimum-norm least-squares one.
    """
    if not words.free_reduce(loop.word):
        raise ContractibleClassError("loop is in the trivial class")
    deck, to_work, from_work = _working_frame(model, loop.word)
    itol = min(1e-9, max(1e-13, 0.1 * tol))
    states, taus = _initial_nodes(model, to_work.point(loop.vertices), deck)
    M = len(states)
    F, J, cs = _shooting_system(model, deck, states, taus, itol)
    res = float(np.max(np.abs(F)))
    it = 0
    while res > tol:
        if it >= max_iter:
            raise NonConvergenceError(f"Newton refinement of {loop.word!r} did not converge",
                                      residual=res, word=loop.word)
        it += 1
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        ds = step[:4 * M].reshape(M, 4) * np.array(cs)
        dt = step[4 * M:]
        lam = 1.0
        while True:
            trial_s = states + lam * ds
            trial_t = taus + lam * dt
            rt = math.inf
            if np.all(trial_t > 0.0) and all(model.params[0] != _kernels.HALFPLANE or s[0] > 0.0
                                             for s in trial_s):
                try:
                    Ft, Jt, cst = _shooting_system(model, deck, trial_s, trial_t, itol)
                    rt = float(np.max(np.abs(Ft)))
                except (ArithmeticError, ValueError, LengthSpecError):
                    pass
            if rt < res:
                break
            lam *= 0.5
            if lam < 1e-4:
                raise NonConvergenceError(f"Newton line search stalled for {loop.word!r}",
                                          residual=res, word=loop.word)
        states, taus, F, J, cs, res = trial_s, trial_t, Ft, Jt, cst, rt
    length = float(np.sum(taus))
    s0 = states[0].copy()
    s0[2:] /= model.norm(s0[:2], s0[2:])
    mono = jacobi_monodromy(model, s0, length, deck)
    _check_hyperbolic(mono, loop.word)
    new_loop = Loop(from_work.point(states[:, :2]), loop.word, length, model.chart_id)
    return ClosedGeodesic(loop.word, length, new_loop, mono, mono.eigenvalues, res,
                          from_work.state(s0), it)


def _working_frame(model, word):
    """(deck, to_work, from_work) for the Newton solve.

    On Schottky surfaces the problem is conjugated so the axis of rho(word)
    becomes the imaginary axis; floating-point resolution is then uniform
    along the lifted orbit instead of degrading near the ideal boundary.
    """
    deck = model.deck(word)
    if not isinstance(deck, MobiusDeck) or model.params[2] != 0.0:
        ident = ShiftDeck(0.0)
        return deck, ident, ident
    chart = hyperbolic.axis_chart(deck.matrix)
    chart = chart / math.sqrt(np.linalg.det(chart))
    inv = np.linalg.inv(chart)
    return MobiusDeck(inv @ deck.matrix @ chart), MobiusDeck(inv), MobiusDeck(chart)


def jacobi_monodromy(model, state, length, deck, k=1, tol=1e-11):
    inv = deck.inverse()
    return flow.jacobi_along(model, state, k * length, tol, recenter=inv.state, period=length)[1]


def _check_hyperbolic(mono, word):
    lam = abs(mono.expanding)
    if lam == 0.0 or abs(math.log(lam)) < DEGENERATE_TOL:
        raise DegenerateOrbitError(f"orbit {word!r} has a monodromy eigenvalue on the unit circle",
                                   word=word)


def poincare_map(model, geodesic, k=1):
    """Jacobi monodromy over ``k`` periods of a converged closed geodesic."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    deck = model.deck(geodesic.loop.word)
    return jacobi_monodromy(model, geodesic.state, geodesic.length, deck, k)


def det_weight(m, k=1):
    """sqrt|det(I - P^k)| = |lambda^{k/2} - lambda^{-k/2}| for a 2x2 symplectic P."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    lam = m.expanding if isinstance(m, Monodromy) else float(m)
    a = abs(lam)
    if a == 0.0 or abs(math.log(a)) < DEGENERATE_TOL:
        raise DegenerateOrbitError("monodromy eigenvalue on the unit circle")
    x = 0.5 * k * math.log(a)
    if lam < 0.0 and k % 2 == 1:
        return 2.0 * math.cosh(x)
    return 2.0 * abs(math.sinh(x))


def find_closed_geodesic(model, word, tol=1e-10, per_unit=4.0, shorten_iters=50, shorten_tol=1e-4,
                         refine_vertices=False, self_consistency=1e-7):
    """Seed on the reference axis, shorten, then refine by Newton.

    With ``refine_vertices`` the vertex count is doubled until the length
    moves by less than ``self_consistency``.
    """
    if not words.free_reduce(word):
        raise ContractibleClassError("the empty word is contractible")
    rep = schottky.best_rotation(word, model.generators)
    seed = schottky.seed_loop(rep, model.generators, model, per_unit=per_unit)
    shortened = shorten_loop(model, seed, max_iters=shorten_iters, tol=shorten_tol)
    geo = _relabel(refine_newton(model, shortened, tol), word)
    if not refine_vertices:
        return geo
    for _ in range(4):
        per_unit *= 2.0
        seed = schottky.seed_loop(rep, model.generators, model, per_unit=per_unit)
        finer = _relabel(refine_newton(
            model, shorten_loop(model, seed, max_iters=shorten_iters, tol=shorten_tol), tol), word)
        if abs(finer.length - geo.length) < self_consistency:
            return finer
        geo = finer
    raise NonConvergenceError(f"length of {word!r} not self-consistent under vertex doubling",
                              residual=abs(finer.length - geo.length), word=word)


def _relabel(geo, word):
    return dataclasses.replace(geo, word=word)


def orbit_samples(model, geodesic, count):
    """``count`` phase states equally spaced in time along one period."""
    times = geodesic.length * np.arange(count) / count
    return flow.flow_samples(model, geodesic.state, times, tol=1e-11)
