"""Length spectra: entries, counting functions, persistence."""

import bisect
import csv
import io
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np
from scipy.special import lambertw

from . import words
from .errors import (ConfigurationError, DataError, IncompleteHorizonError, ParseError)

HEADER = ["word", "primitive_length", "k", "total_length", "weight", "residual"]
DEFAULT_DEDUPE = 1e-6
_LABEL = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class CountingConvention:
    iterates: bool = False
    oriented: bool = False

    @property
    def label(self):
        return ("with-iterates" if self.iterates else "primitive-only") + "/" + (
            "oriented" if self.oriented else "unoriented")

    @classmethod
    def parse(cls, text):
        try:
            it, ori = text.strip().split("/")
        except ValueError:
            raise ConfigurationError(f"bad counting convention {text!r}") from None
        if it not in ("with-iterates", "primitive-only") or ori not in ("oriented", "unoriented"):
            raise ConfigurationError(f"bad counting convention {text!r}")
        return cls(it == "with-iterates", ori == "oriented")

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class SpectrumEntry:
    word: str
    primitive_length: float
    k: int = 1
    total_length: float = None
    weight: float = None
    residual: float = 0.0
    oriented: bool = False

    def __post_init__(self):
        if not self.word or not _LABEL.match(self.word):
            raise ConfigurationError(f"invalid class label {self.word!r}")
        if not (self.primitive_length > 0 and math.isfinite(self.primitive_length)):
            raise ConfigurationError("primitive_length must be positive")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigurationError("iterate index k must be a positive integer")
        object.__setattr__(self, "k", int(self.k))
        total = self.k * self.primitive_length
        if self.total_length is None:
            object.__setattr__(self, "total_length", total)
        elif abs(self.total_length - total) > 1e-12 * total:
            raise ConfigurationError("total_length must equal k * primitive_length")
        if self.weight is not None and not (self.weight > 0 and math.isfinite(self.weight)):
            raise ConfigurationError("weight must be positive")

    @property
    def log_expanding(self):
        """log of the expanding eigenvalue of the primitive orbit, recovered
        from weight = 2 sinh(k log(lambda) / 2)."""
        if self.weight is None:
            raise DataError(f"entry {self.word!r} has no weight")
        return 2.0 * math.asinh(0.5 * self.weight) / self.k

    def iterate(self, k):
        """Entry for the k-th iterate of this primitive orbit."""
        w = None
        if self.weight is not None:
            w = 2.0 * math.sinh(0.5 * k * self.log_expanding)
        return SpectrumEntry(self.word, self.primitive_length, k, k * self.primitive_length, w,
                             self.residual, self.oriented)


def _key(e):
    return (e.total_length, e.word, e.k)


@dataclass(frozen=True)
class LengthSpectrum:
    entries: tuple = ()
    max_length: float = 0.0
    dedupe_tolerance: float = DEFAULT_DEDUPE
    convention: CountingConvention = field(default_factory=CountingConvention)
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=_key)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def primitives(self):
        return [e for e in self.entries if e.k == 1]

    def insert(self, entry):
        return insert(self, entry)

    def count(self, T, convention=None):
        return count(self, T, convention)

    def with_convention(self, convention):
        return replace(self, convention=convention)

    def near_collisions(self):
        """Pairs of primitive entries closer than the dedupe tolerance; they
        are kept because their words differ."""
        prim = self.primitives
        return [(a.word, b.word) for a, b in zip(prim, prim[1:])
                if b.total_length - a.total_length < self.dedupe_tolerance]


def insert(spec, entry):
    """Sorted insert; an entry with the same (word, k) is replaced when the
    new residual is smaller."""
    entries = list(spec.entries)
    for i, e in enumerate(entries):
        if e.word == entry.word and e.k == entry.k:
            if entry.residual < e.residual:
                entries.pop(i)
                break
            return spec
    keys = [_key(e) for e in entries]
    entries.insert(bisect.bisect_right(keys, _key(entry)), entry)
    return replace(spec, entries=tuple(entries))


def _multiplicity(entry, convention):
    if convention.oriented == entry.oriented:
        return 1
    if convention.oriented:
        return 2
    # oriented data counted without orientation: one of each inverse pair
    return 1 if words.canonical(entry.word, True) == entry.word or not _is_word(entry.word) else 0


def _is_word(label):
    return all(ch.lower() in words.LETTERS for ch in label)


def count(spec, T, convention=None):
    """N(T) = #{closed geodesics of length <= T} under the counting convention."""
    convention = spec.convention if convention is None else convention
    if T > spec.max_length:
        raise IncompleteHorizonError(
            f"T = {T:.6g} exceeds the completeness horizon {spec.max_length:.6g}")
    n = 0
    for e in spec.entries:
        if e.total_length > T:
            break
        if e.k == 1 or convention.iterates:
            n += _multiplicity(e, convention)
    return n


def counting_function(spec, T_values, convention=None):
    convention = spec.convention if convention is None else convention
    T_values = np.asarray(T_values, dtype=float)
    if T_values.size and T_values.max() > spec.max_length:
        raise IncompleteHorizonError(
            f"T = {T_values.max():.6g} exceeds the completeness horizon {spec.max_length:.6g}")
    lengths, mult = [], []
    for e in spec.entries:
        if e.k == 1 or convention.iterates:
            lengths.append(e.total_length)
            mult.append(_multiplicity(e, convention))
    cum = np.concatenate([[0], np.cumsum(mult)])
    return cum[np.searchsorted(np.asarray(lengths), T_values, side="right")]


def merge(*spectra):
    """Union of partial spectra keyed by (word, k), best residual winning.

    Associative and independent of argument order: the horizon is the
    smallest one and ties in residual fall back to the smaller weight text.
    """
    if not spectra:
        return LengthSpectrum()
    best = {}
    for s in spectra:
        for e in s.entries:
            key = (e.word, e.k)
            cur = best.get(key)
            if cur is None or (e.residual, repr(e.weight)) < (cur.residual, repr(cur.weight)):
                best[key] = e
    first = spectra[0]
    meta = {k: v for k, v in first.metadata.items()
            if all(s.metadata.get(k) == v for s in spectra)}
    return LengthSpectrum(tuple(best.values()), min(s.max_length for s in spectra),
                          min(s.dedupe_tolerance for s in spectra), first.convention, meta)


def from_primitives(records, max_length, convention=None, oriented=False,
                    dedupe_tolerance=DEFAULT_DEDUPE, metadata=None):
    """Spectrum from primitive records (word, length, log_expanding, residual).

    Iterates are added while k * length stays within ``max_length``; their
    weights follow from the primitive eigenvalue.  ``log_expanding`` may be
    None when no weight is known.
    """
    entries = []
    for word, length, log_lam, residual in records:
        if length > max_length:
            continue
        w = None if log_lam is None else 2.0 * math.sinh(0.5 * log_lam)
        base = SpectrumEntry(word, float(length), 1, None, w, float(residual), oriented)
        entries.append(base)
        k = 2
        while k * length <= max_length:
            entries.append(base.iterate(k))
            k += 1
    return LengthSpectrum(tuple(entries), float(max_length), dedupe_tolerance,
                          convention or CountingConvention(), dict(metadata or {}))


def synthetic_pot(h, max_length, label="syn"):
    """Spectrum whose primitive count is N(T) = round(exp(hT) / (hT)) for
    T >= 1/h, where that expression increases.

    The n-th length solves exp(hT) / (hT) = n - 1/2 on the branch x = hT > 1,
    i.e. x = -W_{-1}(-1/(n - 1/2)).  Orbits counted at T = 1/h are placed
    there.  Weights are those of constant curvature, 2 sinh(l/2).
    """
    if h <= 0:
        raise ConfigurationError("synthetic entropy must be positive")
    t0 = 1.0 / h
    n0 = int(round(math.e))
    lengths = [t0] * n0
    n = n0 + 1
    while True:
        x = -lambertw(-1.0 / (n - 0.5), -1).real
        T = x / h
        if T > max_length:
            break
        lengths.append(T)
        n += 1
    width = len(str(len(lengths)))
    records = [(f"{label}{i:0{width}d}", L, L, 0.0) for i, L in enumerate(lengths)]
    return from_primitives(records, max_length, metadata={"source": f"synthetic h={h!r}"})


# --- persistence ----------------------------------------------------------

def _fmt(x):
    return "" if x is None else format(float(x), ".17g")


def dumps(spec, timestamp=None):
    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    out = io.StringIO()
    out.write(f"# created: {stamp}\n")
    meta = dict(spec.metadata)
    meta.update({
        "max_length": _fmt(spec.max_length),
        "dedupe_tolerance": _fmt(spec.dedupe_tolerance),
        "convention": spec.convention.label,
        "classes": "oriented" if any(e.oriented for e in spec.entries) else "unoriented",
    })
    for key in sorted(meta):
        out.write(f"# {key}: {meta[key]}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(HEADER)
    for e in spec.entries:
        w.writerow([e.word, _fmt(e.primitive_length), e.k, _fmt(e.total_length),
                    _fmt(e.weight), _fmt(e.residual)])
    return out.getvalue()


def save(spec, path, timestamp=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps(spec, timestamp))


def _number(text, name, lineno):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"{name} is not a number: {text!r}", lineno) from None
    if not math.isfinite(x):
        raise ParseError(f"{name} must be finite", lineno)
    return x


def loads(text):
    meta = {}
    entries = []
    header_seen = False
    oriented = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if header_seen:
                raise ParseError("metadata after the header", lineno)
            key, sep, value = line[1:].partition(":")
            if not sep:
                raise ParseError("metadata lines must be '# key: value'", lineno)
            meta[key.strip()] = value.strip()
            continue
        row = next(csv.reader([line]))
        if not header_seen:
            if row != HEADER:
                raise ParseError(f"expected header {','.join(HEADER)}", lineno)
            header_seen = True
            oriented = meta.get("classes", "unoriented") == "oriented"
            continue
        if len(row) != len(HEADER):
            raise ParseError(f"expected {len(HEADER)} fields, found {len(row)}", lineno)
        word, pl, k, tl, wt, res = row
        if not word or not _LABEL.match(word):
            raise ParseError(f"invalid word {word!r}", lineno)
        pl = _number(pl, "primitive_length", lineno)
        if not k.isdigit() or int(k) < 1:
            raise ParseError(f"k must be a positive integer, got {k!r}", lineno)
        tl = _number(tl, "total_length", lineno)
        wt = None if wt == "" else _number(wt, "weight", lineno)
        res = _number(res, "residual", lineno) if res else 0.0
        if pl <= 0:
            raise ParseError("primitive_length must be positive", lineno)
        if wt is not None and wt <= 0:
            raise ParseError("weight must be positive", lineno)
        if res < 0:
            raise ParseError("residual must be non-negative", lineno)
        if abs(tl - int(k) * pl) > 1e-12 * tl:
            raise ParseError("total_length differs from k * primitive_length", lineno)
        entries.append(SpectrumEntry(word, pl, int(k), tl, wt, res, oriented))
    if not header_seen:
        raise ParseError("missing header line")
    if "max_length" not in meta:
        raise ParseError("missing '# max_length:' metadata")
    try:
        max_length = float(meta.pop("max_length"))
        dedupe = float(meta.pop("dedupe_tolerance", DEFAULT_DEDUPE))
        convention = CountingConvention.parse(meta.pop("convention", "primitive-only/unoriented"))
    except (ValueError, ConfigurationError) as exc:
        raise ParseError(f"bad metadata: {exc}") from None
    meta.pop("created", None)
    meta.pop("classes", None)
    seen = set()
    for e in entries:
        if (e.word, e.k) in seen:
            raise ParseError(f"duplicate entry {e.word!r} k={e.k}")
        seen.add((e.word, e.k))
    return LengthSpectrum(tuple(entries), max_length, dedupe, convention, meta)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
