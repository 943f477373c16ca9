"""Threshold classification linking entropy and pinching to point spectrum."""

from dataclasses import dataclass

from ..errors import ConfigurationError

POINT_SPECTRUM = "implies point spectrum"
EMPTY = "implies empty point spectrum"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CorollaryReport:
    verdict: str
    h: float
    k1: float
    k2: float
    n: int
    upper_threshold: float
    lower_threshold: float
    s0_lower_bound: float = None

    @property
    def summary(self):
        if self.verdict == POINT_SPECTRUM:
            return f"{self.verdict}, s0 >= {self.s0_lower_bound:.6g}"
        return self.verdict

    def to_record(self):
        return {"verdict": self.verdict, "summary": self.summary, "h": self.h, "k1": self.k1,
                "k2": self.k2, "n": self.n, "upper_threshold": self.upper_threshold,
                "lower_threshold": self.lower_threshold, "s0_lower_bound": self.s0_lower_bound}


def corollary_arithmetic(h, k1, k2, n=1):
    """h > n k1 / 2 forces an eigenvalue with s0 >= h + n (1 - k1) / 2;
    h <= n k2 / 2 rules eigenvalues out; anything between is undecided."""
    if not k2 <= 1.0 <= k1:
        raise ConfigurationError("pinching constants must satisfy k2 <= 1 <= k1")
    if k2 <= 0 or h < 0 or n < 1:
        raise ConfigurationError("need k2 > 0, h >= 0 and n >= 1")
    upper = n * k1 / 2.0
    lower = n * k2 / 2.0
    if h > upper:
        return CorollaryReport(POINT_SPECTRUM, h, k1, k2, n, upper, lower,
                               h + n * (1.0 - k1) / 2.0)
    if h <= lower:
        return CorollaryReport(EMPTY, h, k1, k2, n, upper, lower)
    return CorollaryReport(INCONCLUSIVE, h, k1, k2, n, upper, lower)
