"""Growth-rate estimates from periodic-orbit counts: entropy, pressure and
the prime-orbit ratio."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BinningError, DegenerateEstimateError, IncompleteHorizonError
from ..spectrum import _multiplicity, counting_function

MIN_STEPS = 20


@dataclass(frozen=True)
class EntropyEstimate:
    h: float
    window: tuple
    stderr: float
    convention: str
    intercept: float = 0.0
    steps: int = 0
    degenerate: bool = False

    def to_record(self):
        return {"h": self.h, "stderr": self.stderr, "window": list(self.window),
                "convention": self.convention, "steps": self.steps, "degenerate": self.degenerate}


@dataclass(frozen=True)
class PressureEstimate:
    p: float
    potential_id: str
    window: tuple
    stderr: float
    epsilon: float
    convention: str = "primitive-only/unoriented"

    def to_record(self):
        return {"pressure": self.p, "potential": self.potential_id, "stderr": self.stderr,
                "window": list(self.window), "epsilon": self.epsilon, "convention": self.convention}


def _ols(x, y):
    """Slope, intercept and the slope's standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    xm = x.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xm)
    resid = y - (slope * x + intercept)
    dof = max(n - 2, 1)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    return slope, intercept, stderr


def default_window(spec):
    return (0.5 * spec.max_length, spec.max_length)


def _check_window(spec, window):
    lo, hi = (float(w) for w in window)
    if not 0.0 < lo < hi:
        raise DegenerateEstimateError(f"invalid window ({lo}, {hi})")
    if hi > spec.max_length * (1.0 + 1e-12):
        raise IncompleteHorizonError(
            f"window end {hi:.6g} exceeds the completeness horizon {spec.max_length:.6g}")
    return lo, min(hi, spec.max_length)


def _included(spec, convention):
    return [e for e in spec.entries if e.k == 1 or convention.iterates]


def estimate_entropy(spec, window=None, convention=None):
    """Least-squares slope of log(T N(T)) against T over ``window``.

    The factor T removes the 1/T prefactor of the prime orbit asymptotic.
    A spectrum with a single primitive class (a cylinder) has zero entropy
    and is reported as such; a regression there would only measure the
    polynomial prefactor.
    """
    convention = spec.convention if convention is None else convention
    lo, hi = _check_window(spec, window or default_window(spec))
    prim = {e.word for e in spec.entries if e.k == 1}
    if not prim:
        raise DegenerateEstimateError("fewer than two orbits: no growth rate to fit")
    if len(prim) == 1:
        return EntropyEstimate(0.0, (lo, hi), 0.0, convention.label, degenerate=True)
    lengths = np.array([e.total_length for e in _included(spec, convention)])
    steps = len(np.unique(lengths[(lengths > lo) & (lengths <= hi)]))
    if steps < MIN_STEPS:
        raise DegenerateEstimateError(
            f"only {steps} counting steps in ({lo:.6g}, {hi:.6g}]; need {MIN_STEPS}")
    T = np.linspace(lo, hi, int(min(max(steps, MIN_STEPS), 400)))
    N = counting_function(spec, T, convention)
    if np.any(N == 0):
        raise DegenerateEstimateError("N(T) vanishes inside the window")
    slope, intercept, stderr = _ols(T, np.log(T * N))
    return EntropyEstimate(slope, (lo, hi), stderr, convention.label, intercept, steps)


def _potential(potential):
    """(identifier, function of an entry giving its orbit integral)."""
    if isinstance(potential, (int, float)):
        potential = ("constant", float(potential))
    if potential == "zero" or potential is None:
        return "zero", lambda e: 0.0
    if potential == "srb_half":
        return "srb_half", lambda e: -0.5 * e.k * e.log_expanding
    if isinstance(potential, tuple) and potential[0] == "constant":
        c = float(potential[1])
        return f"constant({c!r})", lambda e: c * e.total_length
    raise ValueError(f"unknown potential {potential!r}")


def estimate_pressure(spec, potential="zero", window=None, epsilon=0.5, convention=None):
    """Pressure as growth rate of sum(exp(orbit integral)) over length bins.

    The log of a bin sum splits into log(count) + log(mean of exp(orbit
    integral)).  The count part grows at the entropy, which is taken from
    :func:`estimate_entropy`; the mean part is regressed over bins of width
    ``epsilon`` tiling the window from its right end, an empty bin being
    merged into its left neighbour.  Fitting the count through log(T N(T))
    avoids the 1 - 1/(hT) bias that a raw bin count picks up from the
    derivative of exp(hT)/(hT).
    """
    convention = spec.convention if convention is None else convention
    pid, integral = _potential(potential)
    lo, hi = _check_window(spec, window or default_window(spec))
    if epsilon <= 0:
        raise BinningError("epsilon must be positive", suggested_eps=0.5)
    entropy = estimate_entropy(spec, (lo, hi), convention)
    entries = [e for e in _included(spec, convention)
               if lo - epsilon < e.total_length <= hi and _multiplicity(e, convention) > 0]
    if not entries:
        raise BinningError("no orbits in the pressure window", suggested_eps=hi - lo)
    lengths = np.array([e.total_length for e in entries])
    vals = np.array([integral(e) for e in entries])
    mult = np.array([_multiplicity(e, convention) for e in entries], dtype=float)
    edges = hi - epsilon * np.arange(1, int(math.floor((hi - lo) / epsilon + 1e-9)) + 1)
    xs, ys = [], []
    right = hi
    for left in edges:
        sel = (lengths > left) & (lengths <= right)
        if not np.any(sel):
            continue  # empty: widen this bin to the left
        w = mult[sel]
        v = vals[sel]
        vmax = v.max()
        xs.append(float(np.sum(w * lengths[sel]) / np.sum(w)))
        ys.append(vmax + math.log(float(np.sum(w * np.exp(v - vmax)) / np.sum(w))))
        right = left
    if len(xs) < 3:
        width = hi - lo
        if len(edges) < 3:
            # the window itself holds fewer than three bins
            suggestion = width / 4.0
        else:
            # orbits too sparse: widen bins, but keep three inside the window
            suggestion = min(max(2.0 * epsilon, 4.0 * width / len(entries)), width / 3.0)
        raise BinningError(f"only {len(xs)} non-empty bins of width {epsilon}",
                           suggested_eps=suggestion)
    if np.ptp(ys) == 0.0:
        slope, stderr = 0.0, 0.0
    else:
        slope, _, stderr = _ols(xs, ys)
    return PressureEstimate(entropy.h + slope, pid, (lo, hi), math.hypot(entropy.stderr, stderr),
                            epsilon, convention.label)


@dataclass(frozen=True)
class POTResult:
    h: float
    rows: tuple
    vacuous: bool
    convention: str

    def to_record(self):
        return {"h": self.h, "vacuous": self.vacuous, "convention": self.convention,
                "rows": [list(r) for r in self.rows]}


def pot_ratio(spec, h, T_values, convention=None):
    """Rows (T, h T N(T) / exp(hT)), which tend to 1 under the prime orbit
    theorem N(T) ~ exp(hT)/(hT).

    With h <= 0 or at most one primitive orbit the asymptotic is vacuous;
    the flag is set and ratios are NaN.
    """
    convention = spec.convention if convention is None else convention
    T_values = [float(t) for t in T_values]
    N = counting_function(spec, T_values, convention)
    prim = {e.word for e in spec.entries if e.k == 1}
    vacuous = h <= 0 or len(prim) <= 1
    rows = tuple((T, float("nan") if vacuous else h * T * int(n) / math.exp(h * T))
                 for T, n in zip(T_values, N))
    return POTResult(float(h), rows, vacuous, convention.label)
