"""Surface models, curvature, and the geodesic and Jacobi flows."""

from .curvature import CurvatureBounds, curvature_at, curvature_bounds, metric_at
from .flow import (Monodromy, PhasePoint, connect, integrate_geodesic, integrate_jacobi,
                   midpoint, phase_point, sasaki_distance)
from .models import (ChartPoint, Cylinder, HalfPlane, MetricModel, Perturbed, Schottky,
                     model_from_dict)

__all__ = [
    "ChartPoint", "CurvatureBounds", "Cylinder", "HalfPlane", "MetricModel", "Monodromy",
    "Perturbed", "PhasePoint", "Schottky", "connect", "curvature_at", "curvature_bounds",
    "integrate_geodesic", "integrate_jacobi", "metric_at", "midpoint", "model_from_dict",
    "phase_point", "sasaki_distance",
]
