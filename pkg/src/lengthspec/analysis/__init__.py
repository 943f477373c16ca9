from .corollary import CorollaryReport, corollary_arithmetic
from .growth import (EntropyEstimate, POTResult, PressureEstimate, estimate_entropy,
                     estimate_pressure, pot_ratio)
from .separation import SeparationReport, separation_check
from .trace import TestFunction, dynamical_trace, trace_terms
from .zeta import ZetaValue, weighted_zeta, zeta

__all__ = [
    "CorollaryReport", "EntropyEstimate", "POTResult", "PressureEstimate", "SeparationReport",
    "TestFunction", "ZetaValue", "corollary_arithmetic", "dynamical_trace", "estimate_entropy",
    "estimate_pressure", "pot_ratio", "separation_check", "trace_terms", "weighted_zeta", "zeta",
]
