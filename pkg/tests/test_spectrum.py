import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lengthspec import schottky, spectrum
from lengthspec.errors import ConfigurationError, IncompleteHorizonError, ParseError
from lengthspec.spectrum import CountingConvention, LengthSpectrum, SpectrumEntry

GOLDEN = Path(__file__).parent / "data" / "cylinder_spectrum.csv"
WITH_IT = CountingConvention(iterates=True)
PRIM = CountingConvention(iterates=False)


def entry(word, length, k=1):
    return SpectrumEntry(word, length, k, weight=2 * math.sinh(k * length / 2))


def test_insert_into_empty():
    assert len(spectrum.insert(LengthSpectrum(max_length=10.0), entry("a", 2.0))) == 1


def test_insert_same_word_twice():
    s = spectrum.insert(LengthSpectrum(max_length=10.0), entry("a", 2.0))
    s = spectrum.insert(s, SpectrumEntry("a", 2.0, weight=2.0, residual=1e-3))
    assert len(s) == 1
    assert s.entries[0].residual == 0.0


def test_insert_replaces_worse_residual():
    s = spectrum.insert(LengthSpectrum(max_length=10.0),
                        SpectrumEntry("a", 2.0, weight=2.0, residual=1e-3))
    s = spectrum.insert(s, SpectrumEntry("a", 2.0, weight=2.5, residual=1e-9))
    assert len(s) == 1 and s.entries[0].weight == 2.5


@settings(max_examples=20)
@given(st.lists(st.floats(0.1, 50.0), min_size=100, max_size=100))
def test_insert_keeps_sorted_order(lengths):
    s = LengthSpectrum(max_length=100.0)
    for i, L in enumerate(lengths):
        s = spectrum.insert(s, entry(f"w{i}", L))
    assert [e.total_length for e in s.entries] == sorted(lengths)


def test_cylinder_counts(cylinder_spectrum):
    assert spectrum.count(cylinder_spectrum, 7, WITH_IT) == 3
    assert spectrum.count(cylinder_spectrum, 7, PRIM) == 1
    assert spectrum.count(LengthSpectrum(max_length=10.0), 5) == 0


def test_count_is_right_continuous(cylinder_spectrum):
    assert spectrum.count(cylinder_spectrum, 2.0) == 1
    assert spectrum.count(cylinder_spectrum, np.nextafter(2.0, 0)) == 0


def test_count_beyond_horizon(cylinder_spectrum):
    with pytest.raises(IncompleteHorizonError):
        spectrum.count(cylinder_spectrum, 21.0)


def test_oriented_counting_doubles(exact_spectrum):
    uno = spectrum.count(exact_spectrum, 10.0)
    ori = spectrum.count(exact_spectrum, 10.0, CountingConvention(oriented=True))
    assert ori == 2 * uno


def test_oriented_data_counted_unoriented(pair):
    T = schottky.horizon(pair, 5)
    recs = [(w, l, l, 0.0) for w, l in
            [(w, schottky.exact_length(w, pair))
             for w in schottky.enumerate_classes(pair, 5, unoriented=False)]]
    ori = spectrum.from_primitives(recs, T, oriented=True)
    uno = spectrum.from_primitives([(w, l, l, 0.0) for w, l in schottky.class_lengths(pair, 5)],
                                   T)
    for t in (3.0, 6.0, T):
        assert spectrum.count(ori, t, CountingConvention()) == spectrum.count(uno, t)


@settings(max_examples=30)
@given(st.lists(st.floats(0.0, 16.0), min_size=1, max_size=30))
def test_counting_function_monotone_integer(exact_spectrum, T):
    T = sorted(T)
    N = spectrum.counting_function(exact_spectrum, T)
    assert np.all(np.diff(N) >= 0)
    assert N.dtype.kind == "i"
    assert spectrum.count(exact_spectrum, 0.0) == 0
    assert list(N) == [spectrum.count(exact_spectrum, t) for t in T]


def test_with_iterates_count_is_floor_sum(exact_spectrum):
    prims = [e.primitive_length for e in exact_spectrum.primitives]
    for T in (4.0, 9.5, 15.0, exact_spectrum.max_length):
        assert spectrum.count(exact_spectrum, T, WITH_IT) == sum(
            math.floor(T / l) for l in prims if l <= T)


def test_round_trip_is_bit_faithful(tmp_path, exact_spectrum):
    path = tmp_path / "s.csv"
    spectrum.save(exact_spectrum, path)
    back = spectrum.load(path)
    assert back == exact_spectrum
    for a, b in zip(back.entries, exact_spectrum.entries):
        assert a.total_length == b.total_length and a.weight == b.weight


def test_dumps_header_and_determinism(exact_spectrum):
    a = spectrum.dumps(exact_spectrum, timestamp="x").splitlines()
    b = spectrum.dumps(exact_spectrum, timestamp="y").splitlines()
    assert a[1:] == b[1:]
    assert "word,primitive_length,k,total_length,weight,residual" in a


def test_golden_cylinder_file():
    s = spectrum.load(GOLDEN)
    assert spectrum.count(s, 7) == 3
    assert s.convention == WITH_IT


def _csv(rows, meta="# max_length: 10\n"):
    return meta + "word,primitive_length,k,total_length,weight,residual\n" + rows


@pytest.mark.parametrize("rows,line", [
    ("a,2,1,2,-1,0\n", 3),
    ("a,2,1,2,2.35,0\nb,x,1,2,1,0\n", 4),
    ("a,2,1,3,2.35,0\n", 3),
    ("a,2,0,0,2.35,0\n", 3),
    ("a b,2,1,2,2.35,0\n", 3),
    ("a,2,1,2,2.35\n", 3),
    ("a,2,1,2,2.35,-1\n", 3),
])
def test_parse_errors_carry_line_numbers(rows, line):
    with pytest.raises(ParseError, match=f"line {line}:"):
        spectrum.loads(_csv(rows))


def test_parse_structure_errors():
    with pytest.raises(ParseError):
        spectrum.loads("# max_length: 10\nword,length\n")
    with pytest.raises(ParseError, match="max_length"):
        spectrum.loads(_csv("a,2,1,2,2.35,0\n", meta=""))
    with pytest.raises(ParseError, match="duplicate"):
        spectrum.loads(_csv("a,2,1,2,2.35,0\na,2,1,2,2.35,0\n"))
    with pytest.raises(ParseError, match="missing header"):
        spectrum.loads("# max_length: 3\n")


def test_entry_validation():
    with pytest.raises(ConfigurationError):
        SpectrumEntry("a", 2.0, 2, total_length=3.0)
    with pytest.raises(ConfigurationError):
        SpectrumEntry("a", 2.0, weight=0.0)
    with pytest.raises(ConfigurationError):
        SpectrumEntry("a", -1.0)


def test_weight_recovers_eigenvalue():
    e = SpectrumEntry("a", 2.0, weight=2 * math.sinh(1.3))
    assert e.log_expanding == pytest.approx(2.6, rel=1e-14)
    assert e.iterate(3).weight == pytest.approx(2 * math.sinh(3 * 1.3), rel=1e-13)


def test_from_primitives_adds_iterates(cylinder_spectrum):
    assert [e.k for e in cylinder_spectrum.entries] == list(range(1, 11))
    assert cylinder_spectrum.entries[1].weight == pytest.approx(2 * math.sinh(2.0))


def test_merge_is_order_independent(exact_spectrum):
    parts = [LengthSpectrum(tuple(exact_spectrum.entries[i::3]), exact_spectrum.max_length)
             for i in range(3)]
    a = spectrum.merge(*parts)
    b = spectrum.merge(parts[2], parts[0], parts[1])
    c = spectrum.merge(spectrum.merge(parts[0], parts[1]), parts[2])
    assert a.entries == b.entries == c.entries == exact_spectrum.entries


def test_near_collisions_flag_distinct_words():
    s = LengthSpectrum((entry("a", 2.0), entry("b", 2.0 + 1e-9)), 10.0)
    assert len(s.near_collisions()) == 1


def test_synthetic_counts_match_generator_formula(synthetic):
    h = 0.5
    for T in np.linspace(1 / h + 0.01, 20.0, 60):
        assert spectrum.count(synthetic, T) == round(math.exp(h * T) / (h * T))


def test_convention_labels():
    for label in ("primitive-only/unoriented", "with-iterates/oriented"):
        assert CountingConvention.parse(label).label == label
    with pytest.raises(ConfigurationError):
        CountingConvention.parse("all")
