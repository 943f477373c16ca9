"""Closed-form geometry of the hyperbolic plane in the (u, v) half-plane chart.

Points are stored as ``(u, v)`` with ``u`` the height, so the complex
coordinate is ``z = v + 1j * u``.  Tangent vectors ``(du, dv)`` correspond
to ``dz = dv + 1j * du``.  Functions accept arrays with a trailing axis of
length 2 and broadcast over the leading axes.
"""

import numpy as np

from ..errors import ConfigurationError, NonHyperbolicError


def to_complex(x):
    x = np.asarray(x, dtype=float)
    return x[..., 1] + 1j * x[..., 0]


def from_complex(z):
    z = np.asarray(z)
    return np.stack([z.imag, z.real], axis=-1)


def distance(p, q):
    """Hyperbolic distance, accurate for nearby points."""
    z1 = to_complex(p)
    z2 = to_complex(q)
    return 2.0 * np.arcsinh(np.abs(z1 - z2) / (2.0 * np.sqrt(z1.imag * z2.imag)))


def _hyperboloid(z):
    x, y = z.real, z.imag
    r2 = x * x + y * y
    return np.stack([(r2 + 1) / (2 * y), (r2 - 1) / (2 * y), x / y], axis=-1)


def midpoint(p, q):
    """Midpoint of the geodesic segment from p to q."""
    X = _hyperboloid(to_complex(p)) + _hyperboloid(to_complex(q))
    norm = np.sqrt(X[..., 0] ** 2 - X[..., 1] ** 2 - X[..., 2] ** 2)
    X = X / norm[..., None]
    y = 1.0 / (X[..., 0] - X[..., 1])
    return np.stack([y, X[..., 2] * y], axis=-1)


def unit_tangent(p, q):
    """Unit tangent at p of the geodesic towards q, as (du, dv)."""
    z = to_complex(p)
    w = to_complex(q)
    phi = (w - z) / (w - np.conj(z))
    dz = 1j * z.imag * phi / np.abs(phi)
    return np.stack([dz.imag, dz.real], axis=-1)


def segment(p, q):
    """(length, unit tangent at p, unit tangent at q) of the segment p -> q."""
    d = distance(p, q)
    return d, unit_tangent(p, q), -unit_tangent(q, p)


def point_along(p, direction, s):
    """exp_p(s * direction) for a unit tangent ``direction`` at p."""
    z = complex(p[1], p[0])
    dz = complex(direction[1], direction[0])
    # Cayley-type coordinates centred at z: a unit-speed ray from 0 in the disc
    e = dz / (1j * z.imag)
    r = np.tanh(np.asarray(s, dtype=float) / 2.0)
    zeta = r * e
    w = (z - np.conj(z) * zeta) / (1.0 - zeta)
    return from_complex(w)


def mobius_apply(m, x):
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    z = to_complex(x)
    return from_complex((a * z + b) / (c * z + d))


def mobius_tangent(m, x, vel):
    """Push a tangent vector forward by z -> (az + b)/(cz + d), det = 1."""
    c, d = m[1][0], m[1][1]
    z = to_complex(x)
    dz = np.asarray(vel)[..., 1] + 1j * np.asarray(vel)[..., 0]
    w = dz / (c * z + d) ** 2
    return np.stack([w.imag, w.real], axis=-1)


def mobius_state_jacobian(m, y):
    """4x4 derivative of (u, v, du, dv) -> deck image, for det(m) = 1."""
    c, d = m[1][0], m[1][1]
    z = complex(y[1], y[0])
    dz = complex(y[3], y[2])
    f1 = 1.0 / (c * z + d) ** 2
    f2 = -2.0 * c / (c * z + d) ** 3 * dz

    def block(w):
        return np.array([[w.real, w.imag], [-w.imag, w.real]])

    J = np.zeros((4, 4))
    J[:2, :2] = block(f1)
    J[2:, :2] = block(f2)
    J[2:, 2:] = block(f1)
    return J


def translation_length(m):
    tr = abs(m[0][0] + m[1][1])
    if tr <= 2.0:
        raise NonHyperbolicError(f"|trace| = {tr:.6g} <= 2")
    return 2.0 * np.arccosh(tr / 2.0)


def fixed_points(m):
    """(repelling, attracting) boundary fixed points; None stands for infinity."""
    a, b, c, d = (float(m[0][0]), float(m[0][1]), float(m[1][0]), float(m[1][1]))
    tr = a + d
    if abs(tr) <= 2.0:
        raise NonHyperbolicError(f"|trace| = {abs(tr):.6g} <= 2")
    if c == 0.0:
        # z -> (a z + b)/d: fixes infinity and b/(d - a)
        finite = b / (d - a)
        if abs(a) > abs(d):
            return finite, None
        return None, finite
    disc = np.sqrt(tr * tr - 4.0)
    roots = ((a - d) + disc) / (2.0 * c), ((a - d) - disc) / (2.0 * c)
    # derivative at a fixed point is 1/(c x + d)^2; attracting when |c x + d| > 1
    if abs(c * roots[0] + d) > 1.0:
        return roots[1], roots[0]
    return roots[0], roots[1]


def axis_chart(m):
    """Mobius map sending 0, infinity, i to the repelling fixed point, the
    attracting fixed point and the apex of the axis of m."""
    rep, att = fixed_points(m)
    if rep is None:
        # axis is the vertical line over att, traversed downwards
        return np.array([[att, -1.0], [1.0, 0.0]])
    if att is None:
        return np.array([[1.0, rep], [0.0, 1.0]])
    if att > rep:
        return np.array([[att, rep], [1.0, 1.0]]) / np.sqrt(att - rep)
    return np.array([[att, -rep], [1.0, -1.0]]) / np.sqrt(rep - att)


def isometric_circle(m):
    """(center, radius) of {|cz + d| = 1}."""
    c, d = float(m[1][0]), float(m[1][1])
    if c == 0.0:
        raise ConfigurationError("generator fixes infinity; isometric circle undefined")
    return -d / c, 1.0 / abs(c)


def check_schottky(generators, margin=1e-6):
    """Validate a real Schottky system by disjoint isometric circles.

    Rank-one systems only need a hyperbolic generator.
    """
    mats = [np.asarray(g, dtype=float) for g in generators]
    if not mats:
        raise ConfigurationError("Schottky validation failed: no generators")
    for g in mats:
        if g.shape != (2, 2):
            raise ConfigurationError("Schottky validation failed: generators must be 2x2")
        if abs(np.linalg.det(g) - 1.0) > 1e-12:
            raise ConfigurationError("Schottky validation failed: det != 1")
        if abs(np.trace(g)) <= 2.0:
            raise ConfigurationError("Schottky validation failed: non-hyperbolic generator")
    if len(mats) == 1:
        return
    circles = []
    for g in mats:
        try:
            circles.append(isometric_circle(g))
            circles.append(isometric_circle(np.linalg.inv(g)))
        except ConfigurationError as exc:
            raise ConfigurationError(f"Schottky validation failed: {exc}") from None
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            (c1, r1), (c2, r2) = circles[i], circles[j]
            if abs(c1 - c2) <= r1 + r2 + margin:
                raise ConfigurationError(
                    "Schottky validation failed: isometric circles "
                    f"{i} and {j} are not disjoint")
