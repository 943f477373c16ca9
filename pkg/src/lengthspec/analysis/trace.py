"""Geodesic side of the wave trace formula paired with a test function."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DataError, IncompleteHorizonError
from ..spectrum import _multiplicity


@dataclass(frozen=True)
class TestFunction:
    """Bump exp(1/(y^2 - 1)) / exp(-1) with y = 2(t - center)/width.

    Supported on (center - width/2, center + width/2), peak value 1 at the
    center.
    """

    __test__ = False  # not a pytest class

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigurationError("test function width must be positive")
        if self.center - 0.5 * self.width <= 0:
            raise ConfigurationError("test function support must lie in t > 0")

    @property
    def support(self):
        return (self.center - 0.5 * self.width, self.center + 0.5 * self.width)

    def __call__(self, t):
        y = 2.0 * (np.asarray(t, dtype=float) - self.center) / self.width
        inside = np.abs(y) < 1.0
        out = np.zeros_like(y)
        out[inside] = np.exp(1.0 / (y[inside] ** 2 - 1.0) + 1.0)
        return out if out.ndim else float(out)


def dynamical_trace(spec, phi, support=None):
    """sum over stored orbits of l_p * phi(k l_p) / sqrt|det(I - P^k)|.

    ``phi`` is a :class:`TestFunction` or any callable with an explicit
    ``support`` (a, b).
    """
    a, b = support if support is not None else phi.support
    if b > spec.max_length * (1.0 + 1e-12):
        raise IncompleteHorizonError(
            f"test function support ends at {b:.6g}, beyond the horizon {spec.max_length:.6g}")
    total = 0.0
    for e in spec.entries:
        if not a < e.total_length < b:
            continue
        m = _multiplicity(e, spec.convention)
        if m == 0:
            continue
        if e.weight is None:
            raise DataError(f"orbit {e.word!r} (k={e.k}) has no weight")
        total += m * e.primitive_length * float(phi(e.total_length)) / e.weight
    return total


def trace_terms(spec, phi):
    """[(word, k, term)] contributions, for term-by-term inspection."""
    a, b = phi.support
    return [(e.word, e.k, e.primitive_length * float(phi(e.total_length)) / e.weight)
            for e in spec.entries if a < e.total_length < b and e.weight is not None]
