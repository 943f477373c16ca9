import math
import sys

import pytest

from lengthspec import schottky, spectrum
from lengthspec.geometry import Cylinder, HalfPlane, Perturbed, Schottky


@pytest.fixture(scope="session")
def pair():
    a, b = schottky.symmetric_pair(2.0, 3.0)
    return [a.matrix, b.matrix]


@pytest.fixture(scope="session")
def schottky_model(pair):
    return Schottky(pair)


@pytest.fixture(scope="session")
def schottky_geodesics(schottky_model, pair):
    from lengthspec.orbits import find_closed_geodesic

    return [find_closed_geodesic(schottky_model, w) for w in schottky.enumerate_classes(pair, 6)]


@pytest.fixture(scope="session")
def exact_spectrum(pair):
    """Constant-curvature spectrum complete below the word-length-8 horizon."""
    T = schottky.horizon(pair, 8)
    recs = [(w, l, l, 0.0) for w, l in schottky.class_lengths(pair, 8)]
    return spectrum.from_primitives(recs, T)


@pytest.fixture(scope="session")
def cylinder_spectrum():
    return spectrum.from_primitives([("a", 2.0, 2.0, 0.0)], 20.0)


@pytest.fixture(scope="session")
def synthetic():
    return spectrum.synthetic_pot(0.5, 20.0)


@pytest.fixture
def halfplane():
    return HalfPlane()


@pytest.fixture
def cylinder():
    return Cylinder(2.0)


@pytest.fixture(scope="session")
def bumped_halfplane():
    return Perturbed(HalfPlane(), (1.0, 0.0), 1.0, 0.1)


@pytest.fixture(scope="session")
def bumped_cylinder():
    return Perturbed(Cylinder(2.0), (0.3, math.pi), 0.9, 0.05)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
