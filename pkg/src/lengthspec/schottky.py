"""Exact constant-curvature oracle for Schottky groups.

Conjugacy classes of the free group are enumerated as canonical words; the
length of the closed geodesic in a class is the translation length of the
corresponding Mobius transformation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import words
from .errors import ConfigurationError, ContractibleClassError, NonHyperbolicError
from .geometry import hyperbolic
from .geometry.models import word_matrix


@dataclass(frozen=True)
class MobiusGenerator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise ConfigurationError("generator must have determinant 1")
        if abs(np.trace(m)) <= 2.0:
            raise NonHyperbolicError("generator must be hyperbolic (|trace| > 2)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pairing(cls, center, radius):
        """Hyperbolic element mapping the outside of C(-center, radius) onto
        the inside of C(center, radius); translation length 2 acosh(center/radius)."""
        p, R = float(center), float(radius)
        if not p > R > 0:
            raise ConfigurationError("pairing needs center > radius > 0")
        return cls(np.array([[p / R, (p * p - R * R) / R], [1.0 / R, p / R]]))

    def conjugate(self, m):
        m = np.asarray(m, dtype=float)
        return MobiusGenerator(m @ self.matrix @ np.linalg.inv(m))


def _matrices(generators):
    return [g.matrix if isinstance(g, MobiusGenerator) else np.asarray(g, dtype=float)
            for g in generators]


def symmetric_pair(length, radius=3.0):
    """Rank-2 generators (a, b) with equal translation length ``length``.

    ``a`` pairs circles centred at +-p; ``b`` is ``a`` conjugated by the
    rotation z -> -1/z, so all four isometric circles are disjoint as long
    as p - radius > 1.
    """
    p = radius * math.cosh(length / 2.0)
    if p - radius <= 1.0:
        raise ConfigurationError("radius too small for disjoint circles at this length")
    a = MobiusGenerator.pairing(p, radius)
    b = a.conjugate(np.array([[0.0, -1.0], [1.0, 0.0]]))
    return a, b


def enumerate_classes(generators, max_word_length, unoriented=True, validate=True):
    """Canonical representatives of primitive conjugacy classes, ordered by
    word length and then lexicographically (a < A < b < B ...)."""
    if max_word_length < 1:
        raise ConfigurationError("max_word_length must be >= 1")
    mats = _matrices(generators)
    if validate:
        hyperbolic.check_schottky(mats)
    return canonical_classes(len(mats), max_word_length, unoriented)


def canonical_classes(rank, max_word_length, unoriented=True):
    out = []
    for m in range(1, max_word_length + 1):
        for w in words.cyclically_reduced_words(rank, m):
            if words.is_primitive(w) and words.canonical(w, unoriented) == w:
                out.append(w)
    return out


def exact_length(word, generators):
    """Translation length 2 acosh(|tr rho(w)| / 2) of the class of ``word``.

    The trace is taken on the cyclically reduced core, which is conjugate to
    ``word`` and avoids cancellation in long conjugated products.
    """
    core = words.cyclic_reduce(word)
    if not core:
        raise ContractibleClassError("the empty word has no closed geodesic")
    mats = _matrices(generators)
    words.validate(word, len(mats))
    return float(hyperbolic.translation_length(word_matrix(core, mats)))


def _reduced_word_traces(mats, length):
    """|trace| of every cyclically reduced word of the given length (vectorized)."""
    letters = []
    for g in mats:
        letters += [g, np.linalg.inv(g)]
    letters = np.array(letters)
    n = len(letters)
    inv = np.arange(n) ^ 1
    first = np.arange(n)
    last = np.arange(n)
    prod = letters.copy()
    for _ in range(length - 1):
        nxt = np.arange(n)
        ok = last[:, None] != inv[nxt][None, :]
        i, j = np.nonzero(ok)
        prod = np.einsum("kab,kbc->kac", prod[i], letters[j])
        first, last = first[i], nxt[j]
    cyc = last != inv[first]
    return np.abs(prod[cyc, 0, 0] + prod[cyc, 1, 1])


def horizon(generators, max_word_length, amplitude=0.0):
    """Length below which every class is represented by a word of length
    <= ``max_word_length``.

    Taken as the shortest translation length among cyclically reduced words
    of lengths m + 1 and m + 2, shrunk by a relative 1e-9 and, on perturbed
    metrics, by 2 * |amplitude| * (m + 1).
    """
    mats = _matrices(generators)
    m = int(max_word_length)
    best = math.inf
    for length in (m + 1, m + 2):
        tr = _reduced_word_traces(mats, length)
        best = min(best, 2.0 * math.acosh(float(tr.min()) / 2.0))
    return best * (1.0 - 1e-9) - 2.0 * abs(amplitude) * (m + 1)


def class_lengths(generators, max_word_length, unoriented=True):
    """[(word, exact length)] for every primitive class up to the word bound."""
    mats = _matrices(generators)
    return [(w, exact_length(w, mats))
            for w in enumerate_classes(mats, max_word_length, unoriented)]


def best_rotation(word, generators):
    """Cyclic rotation of ``word`` whose axis has the largest Euclidean size
    in the half-plane chart.  All rotations name the same class; a large
    axis keeps the lifted orbit away from the boundary and its round-off."""
    mats = _matrices(generators)
    w = words.cyclic_reduce(word)
    if w != word or len(mats) == 1:
        return word

    def size(r):
        rep, att = hyperbolic.fixed_points(word_matrix(r, mats))
        return math.inf if rep is None or att is None else abs(att - rep)

    return max(words.rotations(w), key=size)


def seed_loop(word, generators, model, per_unit=4.0, min_vertices=8):
    """Closed polyline on the axis of rho(word), in the model's cover chart.

    Vertices are equally spaced along the axis by hyperbolic arclength of the
    constant-curvature reference metric; the closing vertex is the deck image
    of the first.
    """
    from .orbits import Loop

    if not words.free_reduce(word):
        raise ContractibleClassError("the empty word is contractible")
    mats = _matrices(generators) if generators is not None else list(model.generators)
    words.validate(word, len(mats))
    g = word_matrix(word, mats)
    ell = hyperbolic.translation_length(g)
    chart = hyperbolic.axis_chart(g)
    n = max(int(min_vertices), int(math.ceil(per_unit * ell)))
    n += n % 2
    # centre the fundamental segment on the apex of the axis, keeping the
    # loop away from the boundary where chart round-off grows
    s = ell * (np.arange(n) / n - 0.5)
    axis = hyperbolic.from_complex(1j * np.exp(s))
    pts = hyperbolic.mobius_apply(chart, axis)
    return Loop.from_vertices(model, model.from_halfplane(pts), word)
