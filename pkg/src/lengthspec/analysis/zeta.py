"""Truncated dynamical zeta functions over a stored length spectrum."""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DataError, DegenerateEstimateError
from ..spectrum import _multiplicity
from .growth import estimate_entropy

DEFAULT_GAP = 0.1


@dataclass(frozen=True)
class ZetaValue:
    s: complex
    value: complex
    truncation_T: float
    k_max: int
    tail_bound: float
    convergent: bool
    h_hat: float
    weighted: bool = False

    def to_record(self):
        return {"s": [self.s.real, self.s.imag], "value": [self.value.real, self.value.imag],
                "truncation_T": self.truncation_T, "k_max": self.k_max,
                "tail_bound": self.tail_bound, "tail_bound_kind": "heuristic",
                "convergent": self.convergent, "h_hat": self.h_hat, "weighted": self.weighted}


def _h_hat(spec, h_hat):
    if h_hat is not None:
        return float(h_hat)
    try:
        return max(0.0, estimate_entropy(spec).h)
    except DegenerateEstimateError:
        return 0.0


def _primitives(spec, T):
    prim = [e for e in spec.entries if e.k == 1 and e.total_length <= T]
    mult = np.array([_multiplicity(e, spec.convention) for e in prim], dtype=float)
    keep = mult > 0
    return [e for e, k in zip(prim, keep) if k], mult[keep]


def _bin_constant(lengths, mult, h, T):
    """Smallest C with (orbits in (n-1, n]) <= C exp(h n) for unit bins below T."""
    if len(lengths) == 0:
        return 0.0
    n = np.ceil(lengths).astype(int)
    counts = np.bincount(n, weights=mult)
    bins = np.arange(len(counts))
    ok = (counts > 0) & (bins <= math.ceil(T))
    return float(np.max(counts[ok] * np.exp(-h * bins[ok])))


def _tail(lengths, mult, sigma, h, T, k_max, C, extra=1.0):
    """Heuristic bound on |log Z - log Z_T,k_max| for Re(s) = sigma > h.

    Beyond T the number of orbits per unit length is taken <= C exp(h(T+1));
    each contributes at most -log(1 - exp(-sigma l)) <= exp(-sigma l)/(1 - exp(-sigma T)).
    """
    gap = sigma - h
    beyond = C * math.exp(h) * math.exp(-gap * T) / (
        (1.0 - math.exp(-gap)) * (1.0 - math.exp(-sigma * T)))
    x = np.exp(-sigma * lengths)
    kept = float(np.sum(mult * x ** (k_max + 1) / ((k_max + 1) * (1.0 - x))))
    return extra * (beyond + kept)


def _finish(s, log_sum, T, k_max, h, tail_log, convergent, weighted):
    value = cmath.exp(log_sum)
    if convergent and math.isfinite(tail_log):
        bound = abs(value) * math.expm1(tail_log)
    else:
        bound = math.inf
    return ZetaValue(s, value, T, k_max, bound, convergent, h, weighted)


def zeta(spec, s, k_max=200, h_hat=None, truncation_T=None, gap=DEFAULT_GAP):
    """Z(s) = exp(sum_p sum_{k <= k_max} exp(-k s l_p) / k) over primitives
    with l_p <= truncation_T.

    The sum is still reported when Re(s) <= h_hat, flagged non-convergent;
    the tail bound is finite only for Re(s) > h_hat + gap.
    """
    s = complex(s)
    if k_max < 1:
        raise ConfigurationError("k_max must be >= 1")
    T = spec.max_length if truncation_T is None else min(float(truncation_T), spec.max_length)
    h = _h_hat(spec, h_hat)
    prim, mult = _primitives(spec, T)
    lengths = np.array([e.primitive_length for e in prim])
    k = np.arange(1, k_max + 1)
    terms = np.exp(-np.outer(lengths, k) * s) / k
    log_sum = complex(np.sum(mult[:, None] * terms)) if len(prim) else 0j
    sigma = s.real
    convergent = sigma > h
    tail = math.inf
    if sigma > h + gap and sigma > 0:
        C = _bin_constant(lengths, mult, h, T)
        tail = _tail(lengths, mult, sigma, h, T, k_max, C)
    return _finish(s, log_sum, T, k_max, h, tail, convergent, False)


def _weight(entry_by_key, prim, k):
    e = entry_by_key.get((prim.word, k))
    if e is not None and e.weight is not None:
        return e.weight
    if prim.weight is None:
        raise DataError(f"orbit {prim.word!r} has no weight")
    return prim.iterate(k).weight


def weighted_zeta(spec, s, k_max=200, h_hat=None, truncation_T=None, unit_weights=False,
                  gap=DEFAULT_GAP):
    """exp(sum_p sum_k exp(-k s l_p) / (k sqrt|det(I - P_p^k)|)).

    Weights of iterates missing from the spectrum follow from the primitive
    eigenvalue.  ``unit_weights`` replaces every weight by 1.
    """
    if unit_weights:
        z = zeta(spec, s, k_max, h_hat, truncation_T, gap)
        return ZetaValue(z.s, z.value, z.truncation_T, z.k_max, z.tail_bound, z.convergent,
                         z.h_hat, True)
    s = complex(s)
    if k_max < 1:
        raise ConfigurationError("k_max must be >= 1")
    T = spec.max_length if truncation_T is None else min(float(truncation_T), spec.max_length)
    h = _h_hat(spec, h_hat)
    prim, mult = _primitives(spec, T)
    by_key = {(e.word, e.k): e for e in spec.entries}
    total = 0j
    rates = []
    for e, m in zip(prim, mult):
        l = e.primitive_length
        acc = 0j
        for k in range(1, k_max + 1):
            term = cmath.exp(-k * s * l) / (k * _weight(by_key, e, k))
            acc += term
            if abs(term) < 1e-300:
                break
        total += m * acc
        rates.append(e.log_expanding / l)
    # weights grow at least like exp(k c l / 2) with c the slowest observed
    # expansion rate, which shifts the convergence abscissa by c / 2
    c = min(rates) if rates else 0.0
    sigma = s.real + 0.5 * c
    convergent = sigma > h
    tail = math.inf
    if sigma > h + gap and sigma > 0 and len(prim):
        lengths = np.array([e.primitive_length for e in prim])
        C = _bin_constant(lengths, mult, h, T)
        extra = 1.0 / (1.0 - math.exp(-c * float(lengths.min()))) if c > 0 else math.inf
        tail = _tail(lengths, mult, sigma, h, T, k_max, C, extra)
    elif not len(prim):
        tail = 0.0 if sigma > h + gap else math.inf
    return _finish(s, total, T, k_max, h, tail, convergent, True)
