"""Surface models: metric family, charts, deck groups.

All models integrate in a chart of the universal cover.  The half-plane
and Schottky models use the upper half-plane chart ``(u, v)`` with ``u``
the height; cylinders use Fermi coordinates ``(r, theta)`` around the core
geodesic with theta unwrapped in the cover and wrapped to ``[0, 2pi)`` by
``normalize``.  Perturbed models multiply a base metric by ``exp(2 phi)``
with ``phi`` a compactly supported bump of peak value ``amplitude``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import words
from ..errors import ConfigurationError, DomainError, NotNegativelyCurvedError
from . import _kernels, hyperbolic

MAX_AMPLITUDE = 0.2


@dataclass(frozen=True)
class ChartPoint:
    u: float
    v: float
    chart_id: str = "halfplane"

    def as_array(self):
        return np.array([self.u, self.v], dtype=float)


class Deck:
    """Deck transformation of the cover chart acting on points and states."""

    def point(self, x):
        raise NotImplementedError

    def tangent(self, x, vel):
        raise NotImplementedError

    def state(self, y):
        y = np.asarray(y, dtype=float)
        return np.concatenate([self.point(y[:2]), self.tangent(y[:2], y[2:4])])

    def jacobian(self, y):
        raise NotImplementedError

    def inverse(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ShiftDeck(Deck):
    shift: float = 0.0

    def point(self, x):
        x = np.array(x, dtype=float)
        x[..., 1] += self.shift
        return x

    def tangent(self, x, vel):
        return np.array(vel, dtype=float)

    def jacobian(self, y):
        return np.eye(4)

    def inverse(self):
        return ShiftDeck(-self.shift)


@dataclass(frozen=True)
class MobiusDeck(Deck):
    matrix: np.ndarray = field(default_factory=lambda: np.eye(2))

    def point(self, x):
        return hyperbolic.mobius_apply(self.matrix, x)

    def tangent(self, x, vel):
        return hyperbolic.mobius_tangent(self.matrix, x, vel)

    def jacobian(self, y):
        return hyperbolic.mobius_state_jacobian(self.matrix, np.asarray(y, dtype=float))

    def inverse(self):
        return MobiusDeck(np.linalg.inv(self.matrix))


def word_matrix(word, generators):
    m = np.eye(2)
    for ch in word:
        g = np.asarray(generators[words.letter_index(ch)], dtype=float)
        m = m @ (np.linalg.inv(g) if ch.isupper() else g)
    return m


class MetricModel:
    """Common interface; subclasses fill in the chart and the deck group."""

    kind = "abstract"
    chart_id = "halfplane"
    n = 1
    constant_curvature = True

    @property
    def params(self):
        raise NotImplementedError

    @property
    def generators(self):
        return ()

    @property
    def rank(self):
        return len(self.generators)

    @property
    def injectivity_radius_lower_bound(self):
        raise NotImplementedError

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if not _kernels.in_domain(self.params, float(x[0]), float(x[1])):
            raise DomainError(f"point {tuple(x)} outside the {self.chart_id} chart")
        return x

    def metric(self, x):
        x = self.check_domain(x)
        E, G = _kernels.metric_diag(self.params, float(x[0]), float(x[1]))
        return np.array([[E, 0.0], [0.0, G]])

    def norm(self, x, vel):
        E, G = _kernels.metric_diag(self.params, float(x[0]), float(x[1]))
        return math.sqrt(E * vel[0] ** 2 + G * vel[1] ** 2)

    def curvature(self, x):
        x = self.check_domain(x)
        return _kernels.curvature(self.params, float(x[0]), float(x[1]))

    def frame_angle(self, x, vel):
        """Angle of ``vel`` in the orthonormal frame (d/du, d/dv) normalized."""
        E, G = _kernels.metric_diag(self.params, float(x[0]), float(x[1]))
        return math.atan2(math.sqrt(G) * vel[1], math.sqrt(E) * vel[0])

    def unit_vector(self, x, angle):
        E, G = _kernels.metric_diag(self.params, float(x[0]), float(x[1]))
        return np.array([math.cos(angle) / math.sqrt(E), math.sin(angle) / math.sqrt(G)])

    def normalize(self, x):
        return np.asarray(x, dtype=float)

    def deck(self, word):
        raise NotImplementedError

    # constant-curvature reference geometry, used for closed forms and as
    # the initial guess on perturbed models
    def to_halfplane(self, x):
        return np.asarray(x, dtype=float)

    def from_halfplane(self, x):
        return np.asarray(x, dtype=float)

    def tangent_to_halfplane(self, x, vel):
        return np.asarray(vel, dtype=float)

    def tangent_from_halfplane(self, x, vel):
        return np.asarray(vel, dtype=float)

    def perturbation_region(self):
        return None

    def to_dict(self):
        raise NotImplementedError


class HalfPlane(MetricModel):
    kind = "halfplane"

    def __eq__(self, other):
        return type(other) is HalfPlane

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return "HalfPlane()"

    @cached_property
    def params(self):
        return np.array([_kernels.HALFPLANE, 0.0, 0.0, 1.0, 0.0, 1.0])

    @property
    def injectivity_radius_lower_bound(self):
        return math.inf

    def deck(self, word):
        if words.free_reduce(word):
            raise ConfigurationError("the half-plane is simply connected; only the empty word is valid")
        return ShiftDeck(0.0)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=True)
class Cylinder(MetricModel):
    """Hyperbolic cylinder with core geodesic of length ``core_length``:
    g = dr^2 + (core_length / 2pi)^2 cosh(r)^2 dtheta^2."""

    core_length: float
    kind = "cylinder"
    chart_id = "cylinder"

    def __post_init__(self):
        if not (self.core_length > 0 and math.isfinite(self.core_length)):
            raise ConfigurationError("core_length must be positive")

    @property
    def c(self):
        return self.core_length / (2.0 * math.pi)

    @cached_property
    def params(self):
        return np.array([_kernels.CYLINDER, self.c, 0.0, 0.0, 0.0, 1.0])

    @cached_property
    def generators(self):
        h = self.core_length / 2.0
        return (np.array([[math.exp(h), 0.0], [0.0, math.exp(-h)]]),)

    @property
    def injectivity_radius_lower_bound(self):
        return self.core_length / 2.0

    def normalize(self, x):
        x = np.array(x, dtype=float)
        x[..., 1] = np.mod(x[..., 1], 2.0 * math.pi)
        return x

    def deck(self, word):
        words.validate(word, 1)
        return ShiftDeck(2.0 * math.pi * words.exponent_sum(word))

    def to_halfplane(self, x):
        x = np.asarray(x, dtype=float)
        r, th = x[..., 0], x[..., 1]
        s = np.exp(self.c * th)
        return np.stack([s / np.cosh(r), s * np.tanh(r)], axis=-1)

    def from_halfplane(self, x):
        x = np.asarray(x, dtype=float)
        y, xr = x[..., 0], x[..., 1]
        return np.stack([np.arcsinh(xr / y), np.log(np.hypot(xr, y)) / self.c], axis=-1)

    def tangent_to_halfplane(self, x, vel):
        x = np.asarray(x, dtype=float)
        vel = np.asarray(vel, dtype=float)
        r, th = x[..., 0], x[..., 1]
        s = np.exp(self.c * th)
        sech = 1.0 / np.cosh(r)
        z = s * (np.tanh(r) + 1j * sech)
        dz = s * (sech ** 2 - 1j * sech * np.tanh(r)) * vel[..., 0] + self.c * z * vel[..., 1]
        return np.stack([dz.imag, dz.real], axis=-1)

    def tangent_from_halfplane(self, x, vel):
        x = np.asarray(x, dtype=float)
        vel = np.asarray(vel, dtype=float)
        y, xr = x[..., 0], x[..., 1]
        dy, dx = vel[..., 0], vel[..., 1]
        dr = (dx / y - xr * dy / y ** 2) / np.sqrt(1.0 + (xr / y) ** 2)
        dth = (xr * dx + y * dy) / (self.c * (xr * xr + y * y))
        return np.stack([dr, dth], axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "core_length": self.core_length}


class Schottky(MetricModel):
    """Quotient of the hyperbolic plane by a real Schottky group."""

    kind = "schottky"

    def __init__(self, generators, margin=1e-6):
        mats = tuple(np.array(g, dtype=float).reshape(2, 2) for g in generators)
        hyperbolic.check_schottky(mats, margin)
        self._generators = mats
        for m in mats:
            m.setflags(write=False)

    def __eq__(self, other):
        return (type(other) is Schottky and len(other.generators) == len(self.generators)
                and all(np.array_equal(a, b) for a, b in zip(self.generators, other.generators)))

    def __hash__(self):
        return hash(tuple(m.tobytes() for m in self.generators))

    def __repr__(self):
        return f"Schottky(rank={self.rank})"

    @cached_property
    def params(self):
        return np.array([_kernels.HALFPLANE, 0.0, 0.0, 1.0, 0.0, 1.0])

    @property
    def generators(self):
        return self._generators

    @cached_property
    def injectivity_radius_lower_bound(self):
        # half the systole; the shortest classes have cyclic length <= 2
        lengths = []
        for m in (1, 2):
            for w in words.cyclically_reduced_words(self.rank, m):
                lengths.append(hyperbolic.translation_length(word_matrix(w, self.generators)))
        return 0.5 * min(lengths)

    def deck(self, word):
        words.validate(word, self.rank)
        return MobiusDeck(word_matrix(word, self.generators))

    @cached_property
    def circles(self):
        """[(center, radius, letter)] with letter mapping the disc outwards."""
        out = []
        for i, g in enumerate(self.generators):
            if self.rank == 1 and g[1, 0] == 0.0:
                continue
            out.append((*hyperbolic.isometric_circle(g), words.letter(i)))
            out.append((*hyperbolic.isometric_circle(np.linalg.inv(g)), words.letter(i, True)))
        return out

    def reduce(self, x, vel, max_steps=10000):
        """Move a cover state into the region outside all isometric circles.

        Returns (x, vel, word) where the applied deck transformation is the
        product of the letters in ``word`` (last letter applied first).
        """
        x = np.asarray(x, dtype=float)
        vel = np.asarray(vel, dtype=float)
        applied = ""
        for _ in range(max_steps):
            z = complex(x[1], x[0])
            for center, radius, ch in self.circles:
                if abs(z - center) < radius:
                    m = word_matrix(ch, self.generators)
                    x, vel = hyperbolic.mobius_apply(m, x), hyperbolic.mobius_tangent(m, x, vel)
                    applied = ch + applied
                    break
            else:
                return x, vel, applied
        raise DomainError("reduction to the fundamental domain did not terminate")

    def to_dict(self):
        return {"kind": self.kind, "generators": [g.tolist() for g in self.generators]}


class Perturbed(MetricModel):
    """Conformal compact perturbation exp(2 phi) * g_base.

    phi(p) = amplitude * exp(x / (x - 1)) for x = q(p) / radius^2 < 1 and 0
    otherwise, where q is a squared-distance proxy to ``center``: 2(cosh d - 1)
    on the half-plane and the flat Fermi-chart distance on cylinders.
    """

    kind = "perturbed"
    constant_curvature = False

    def __init__(self, base, center, radius, amplitude, validate=True):
        if not isinstance(base, (HalfPlane, Cylinder)):
            raise ConfigurationError("perturbations are supported on halfplane and cylinder bases")
        center = tuple(float(c) for c in center)
        if len(center) != 2:
            raise ConfigurationError("bump center must have two coordinates")
        if not (radius > 0 and math.isfinite(radius)):
            raise ConfigurationError("bump radius must be positive and finite")
        if not abs(amplitude) < MAX_AMPLITUDE:
            raise ConfigurationError(f"bump amplitude must lie in (-{MAX_AMPLITUDE}, {MAX_AMPLITUDE})")
        if isinstance(base, HalfPlane) and center[0] <= 0:
            raise ConfigurationError("bump center must lie in the half-plane")
        if isinstance(base, Cylinder) and radius > base.c * math.pi:
            raise ConfigurationError("bump radius must not exceed core_length / 2 on a cylinder")
        self.base = base
        self.center = center
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.chart_id = base.chart_id
        if validate:
            self._check_negative()

    def _check_negative(self, grid=48):
        (ulo, uhi), (vlo, vhi) = self.perturbation_region()
        P = self.params
        for u in np.linspace(ulo, uhi, grid):
            if self.chart_id == "halfplane" and u <= 0.0:
                continue
            for v in np.linspace(vlo, vhi, grid):
                K = _kernels.curvature(P, u, v)
                if K >= 0.0:
                    raise NotNegativelyCurvedError(
                        f"not negatively curved: K = {K:.6g} at ({u:.6g}, {v:.6g})")

    def __eq__(self, other):
        return (type(other) is Perturbed and other.base == self.base and other.center == self.center
                and other.radius == self.radius and other.amplitude == self.amplitude)

    def __hash__(self):
        return hash((self.base, self.center, self.radius, self.amplitude))

    def __repr__(self):
        return (f"Perturbed(base={self.base!r}, center={self.center}, radius={self.radius}, "
                f"amplitude={self.amplitude})")

    @cached_property
    def params(self):
        p = self.base.params.copy()
        p[2] = self.amplitude
        p[3], p[4] = self.center
        p[5] = self.radius
        return p

    @property
    def generators(self):
        return self.base.generators

    @property
    def injectivity_radius_lower_bound(self):
        return self.base.injectivity_radius_lower_bound * math.exp(-abs(self.amplitude))

    def normalize(self, x):
        return self.base.normalize(x)

    def deck(self, word):
        return self.base.deck(word)

    def to_halfplane(self, x):
        return self.base.to_halfplane(x)

    def from_halfplane(self, x):
        return self.base.from_halfplane(x)

    def tangent_to_halfplane(self, x, vel):
        return self.base.tangent_to_halfplane(x, vel)

    def tangent_from_halfplane(self, x, vel):
        return self.base.tangent_from_halfplane(x, vel)

    def perturbation_region(self):
        """Chart rectangle ((u_lo, u_hi), (v_lo, v_hi)) containing the support."""
        cu, cv = self.center
        R = self.radius
        if isinstance(self.base, Cylinder):
            return (cu - R, cu + R), (cv - R / self.base.c, cv + R / self.base.c)
        # q = |z - zc|^2 / (u uc) < R^2 bounds the height by a quadratic
        lo = cu * (1 + R * R / 2 - R * math.sqrt(1 + R * R / 4))
        hi = cu * (1 + R * R / 2 + R * math.sqrt(1 + R * R / 4))
        half = math.sqrt(R * R * cu * hi)
        return (lo, hi), (cv - half, cv + half)

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "center": list(self.center),
                "radius": self.radius, "amplitude": self.amplitude}


def model_from_dict(spec):
    """Build a model from its JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("model description needs a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "halfplane":
            return HalfPlane()
        if kind == "cylinder":
            return Cylinder(float(spec["core_length"]))
        if kind == "schottky":
            return Schottky(spec["generators"])
        if kind == "perturbed":
            return Perturbed(model_from_dict(spec["base"]), spec["center"],
                             float(spec["radius"]), float(spec["amplitude"]))
    except KeyError as exc:
        raise ConfigurationError(f"model '{kind}' is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed '{kind}' model: {exc}") from None
    raise ConfigurationError(f"unknown model kind {kind!r}")
