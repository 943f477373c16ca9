"""Metric and curvature evaluation, and pinching bounds -k1^2 <= K <= -k2^2."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import ConfigurationError, DomainError, NotNegativelyCurvedError
from . import _kernels
from .models import ChartPoint, Cylinder

DEFAULT_MARGIN = 1e-3


def _coords(model, p):
    if isinstance(p, ChartPoint):
        if p.chart_id != model.chart_id:
            raise DomainError(f"point is in chart {p.chart_id!r}, model uses {model.chart_id!r}")
        return np.array([p.u, p.v])
    return np.asarray(p, dtype=float)


def metric_at(model, p):
    return model.metric(_coords(model, p))


def curvature_at(model, p):
    return model.curvature(_coords(model, p))


@dataclass(frozen=True)
class CurvatureBounds:
    k1: float
    k2: float
    sample_count: int
    margin: float
    k_min: float = -1.0
    k_max: float = -1.0


def _default_region(model):
    region = model.perturbation_region()
    if region is not None:
        return region
    if isinstance(model, Cylinder):
        return (-3.0, 3.0), (0.0, 2.0 * math.pi)
    return (0.1, 10.0), (-5.0, 5.0)


def _contains(outer, inner):
    return all(o[0] <= i[0] + 1e-12 and i[1] <= o[1] + 1e-12 for o, i in zip(outer, inner))


def curvature_bounds(model, region=None, grid=64, margin=DEFAULT_MARGIN):
    """Pinching constants from a sampled grid over a chart rectangle.

    Outside the perturbation support the curvature is exactly -1, so the
    sampled extrema are clamped with -1.  Grid extrema are polished by a
    bounded local optimizer before the multiplicative margin is applied.
    Constant-curvature models are checked on the grid and return (1, 1)
    with zero margin since there is nothing to miss between samples.
    """
    if grid < 16:
        raise ConfigurationError("curvature grid needs at least 16 points per axis")
    if region is None:
        region = _default_region(model)
    region = tuple(tuple(float(x) for x in axis) for axis in region)
    if any(lo >= hi for lo, hi in region):
        raise ConfigurationError("curvature region must have positive extent")
    support = model.perturbation_region()
    if support is not None and not _contains(region, support):
        raise ConfigurationError("curvature region must contain the perturbation support")
    (ulo, uhi), (vlo, vhi) = region
    if model.chart_id == "halfplane" and ulo <= 0.0:
        raise ConfigurationError("half-plane region must have u > 0")

    P = model.params
    us = np.linspace(ulo, uhi, grid)
    vs = np.linspace(vlo, vhi, grid)
    K = np.array([[_kernels.curvature(P, u, v) for v in vs] for u in us])
    if np.any(K >= 0.0):
        i, j = np.unravel_index(np.argmax(K), K.shape)
        raise NotNegativelyCurvedError(
            f"not negatively curved: K = {K[i, j]:.6g} at ({us[i]:.6g}, {vs[j]:.6g})")
    count = K.size

    if model.constant_curvature:
        return CurvatureBounds(1.0, 1.0, count, 0.0, float(K.min()), float(K.max()))

    def polish(sign, idx):
        i, j = idx
        x0 = np.array([us[i], vs[j]])
        res = minimize(lambda x: sign * _kernels.curvature(P, x[0], x[1]), x0,
                       method="L-BFGS-B", bounds=[(ulo, uhi), (vlo, vhi)])
        return sign * float(res.fun) if res.success else sign * np.inf

    k_lo = min(float(K.min()), polish(1.0, np.unravel_index(np.argmin(K), K.shape)))
    k_hi = max(float(K.max()), polish(-1.0, np.unravel_index(np.argmax(K), K.shape)))
    if k_hi >= 0.0:
        raise NotNegativelyCurvedError(f"not negatively curved: K reaches {k_hi:.6g}")
    k_lo = min(k_lo, -1.0)
    k_hi = max(k_hi, -1.0)
    k1 = math.sqrt(-k_lo) * (1.0 + margin)
    k2 = math.sqrt(-k_hi) / (1.0 + margin)
    return CurvatureBounds(k1, k2, count, margin, k_lo, k_hi)
