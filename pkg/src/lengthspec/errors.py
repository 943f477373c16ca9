"""Exception hierarchy.

The CLI maps these onto exit codes: configuration problems exit 1,
numerical non-convergence exits 2, incomplete-horizon requests exit 3.
"""


class LengthSpecError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(LengthSpecError, ValueError):
    """Invalid model description or run configuration."""


class NotNegativelyCurvedError(ConfigurationError):
    """A sampled Gaussian curvature was not strictly negative."""


class DomainError(LengthSpecError, ValueError):
    """A point lies outside the chart domain."""


class ChartTransitionError(LengthSpecError):
    """A trajectory left the chart atlas of its model."""


class RangeError(LengthSpecError, ValueError):
    """Inputs are too far apart for a local formula to apply."""


class NonHyperbolicError(LengthSpecError, ValueError):
    """A group element that should be hyperbolic has |trace| <= 2."""


class ContractibleClassError(LengthSpecError, ValueError):
    """The requested free-homotopy class is trivial."""


class NonConvergenceError(LengthSpecError, RuntimeError):
    """An iterative solver failed; ``residual`` holds its last residual."""

    def __init__(self, message, residual=float("nan"), word=None):
        super().__init__(message)
        self.residual = residual
        self.word = word


class DegenerateOrbitError(NonConvergenceError):
    """A monodromy eigenvalue sits on the unit circle."""


class IncompleteHorizonError(LengthSpecError, ValueError):
    """A query reaches beyond the completeness horizon of a spectrum."""


class ParseError(LengthSpecError, ValueError):
    """Malformed spectrum or config file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(LengthSpecError, ValueError):
    """Spectrum data lacks a field required by an analysis."""


class DegenerateEstimateError(LengthSpecError, ValueError):
    """Too little data for a growth-rate fit."""


class BinningError(LengthSpecError, ValueError):
    """A pressure bin is empty even after merging."""

    def __init__(self, message, suggested_eps=None):
        super().__init__(message)
        self.suggested_eps = suggested_eps


class IncompleteInputError(LengthSpecError, ValueError):
    """Orbit data required by a check is missing."""
