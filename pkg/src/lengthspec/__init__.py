"""Closed-geodesic length spectra on negatively curved surfaces."""

from . import analysis, geometry, orbits, schottky, spectrum, words
from .errors import LengthSpecError
from .geometry import (ChartPoint, Cylinder, HalfPlane, MetricModel, Perturbed, PhasePoint,
                       Schottky, curvature_bounds)
from .orbits import ClosedGeodesic, find_closed_geodesic
from .spectrum import CountingConvention, LengthSpectrum, SpectrumEntry

__version__ = "0.1.0"

__all__ = [
    "ChartPoint", "ClosedGeodesic", "CountingConvention", "Cylinder", "HalfPlane",
    "LengthSpecError", "LengthSpectrum", "MetricModel", "Perturbed", "PhasePoint", "Schottky",
    "SpectrumEntry", "analysis", "curvature_bounds", "find_closed_geodesic", "geometry",
    "orbits", "schottky", "spectrum", "words",
]
