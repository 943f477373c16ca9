"""Pairwise phase-space separation of closed orbits in a length window."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import words
from ..errors import ConfigurationError, IncompleteInputError, RangeError
from ..geometry import flow, hyperbolic
from ..orbits import orbit_samples

CANDIDATES = 32


@dataclass(frozen=True)
class SeparationReport:
    T: float
    delta: float
    B: float
    threshold: float
    pairs: tuple
    min_distance: float
    samples: int

    @property
    def margin(self):
        return self.min_distance - self.threshold

    @property
    def passed(self):
        return self.min_distance > self.threshold

    @property
    def vacuous(self):
        return not self.pairs

    def to_record(self):
        return {"T": self.T, "delta": self.delta, "B": self.B, "threshold": self.threshold,
                "min_distance": self.min_distance if math.isfinite(self.min_distance) else None,
                "margin": self.margin if math.isfinite(self.margin) else None,
                "passed": self.passed, "vacuous": self.vacuous, "pair_count": len(self.pairs),
                "samples": self.samples}


def _image_words(rank):
    out = [""]
    letters = words.alphabet(rank)
    for n in (1, 2):
        for t in itertools.product(letters, repeat=n):
            w = "".join(t)
            if words.is_reduced(w):
                out.append(w)
    return out


def _fundamental(model, ys):
    if hasattr(model, "reduce"):
        out = []
        for y in ys:
            x, v, _ = model.reduce(y[:2], y[2:])
            out.append(np.concatenate([x, v]))
        return np.array(out)
    ys = np.array(ys, dtype=float)
    ys[:, :2] = model.normalize(ys[:, :2])
    return ys


def _images(model, ys):
    rank = model.rank
    if rank == 0:
        return ys
    out = []
    for w in _image_words(rank):
        if not w:
            out.append(ys)
            continue
        deck = model.deck(w)
        out.append(np.concatenate([deck.point(ys[:, :2]), deck.tangent(ys[:, :2], ys[:, 2:])],
                                  axis=1))
    return np.concatenate(out)


def _amplitude(model):
    return abs(model.params[2])


def _pair_distance(model, ya, yb_images, scale, limit):
    """Minimum sampled Sasaki distance between two orbit sample sets.

    Reference-metric base distances prune the search; the nearest
    candidates get the full distance and the rest are bounded below by
    their base distance times ``scale``.
    """
    pa = model.to_halfplane(ya[:, :2])
    pb = model.to_halfplane(yb_images[:, :2])
    d = hyperbolic.distance(pa[:, None, :], pb[None, :, :])
    flat = d.ravel()
    k = min(CANDIDATES, flat.size)
    idx = np.argpartition(flat, k - 1)[:k] if k < flat.size else np.arange(flat.size)
    best = math.inf
    for n in idx:
        i, j = np.unravel_index(n, d.shape)
        try:
            best = min(best, flow.sasaki_distance(model, ya[i], yb_images[j], max_distance=limit))
        except RangeError:
            best = min(best, scale * flat[n])
    rest = np.delete(flat, idx)
    if rest.size:
        best = min(best, scale * float(rest.min()))
    return best


def separation_check(orbits, model, T, delta, B, samples=64, expected=None):
    """Check that distinct orbits with length in [T - delta, T] stay more
    than 2 exp(-B T) apart in the unit tangent bundle.

    Orbit samples are moved into a fundamental domain and compared against
    the images of the other orbit under deck words of length <= 2.
    ``expected`` optionally lists words that must be present.
    """
    if not (B > 0 and delta > 0):
        raise ConfigurationError("B and delta must be positive")
    if samples < 4:
        raise ConfigurationError("need at least 4 samples per orbit")
    window = [g for g in orbits if T - delta <= g.length <= T]
    if expected is not None:
        missing = sorted(set(expected) - {g.word for g in window})
        if missing:
            raise IncompleteInputError(f"orbits missing from the window: {', '.join(missing)}")
    for g in window:
        if g.state is None or not np.all(np.isfinite(g.state)):
            raise IncompleteInputError(f"orbit {g.word!r} has no phase state")

    threshold = 2.0 * math.exp(-B * T)
    scale = math.exp(-_amplitude(model))
    limit = 0.5 * model.injectivity_radius_lower_bound
    reduced = [_fundamental(model, orbit_samples(model, g, samples)) for g in window]
    images = [_images(model, ys) for ys in reduced]
    pairs = []
    for i, j in itertools.combinations(range(len(window)), 2):
        dist = _pair_distance(model, reduced[i], images[j], scale, limit)
        pairs.append((window[i].word, window[j].word, dist))
    low = min((p[2] for p in pairs), default=math.inf)
    return SeparationReport(float(T), float(delta), float(B), threshold, tuple(pairs), low,
                            samples)
