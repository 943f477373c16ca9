import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lengthspec import schottky
from lengthspec.errors import (ConfigurationError, ContractibleClassError,
                               DegenerateOrbitError, NonConvergenceError)
from lengthspec.geometry import Cylinder, HalfPlane, Perturbed, curvature_bounds, flow
from lengthspec.orbits import (Loop, det_weight, find_closed_geodesic, poincare_map,
                               refine_newton, shorten_loop)


@pytest.fixture(scope="module")
def bumped_orbit(bumped_cylinder):
    return find_closed_geodesic(bumped_cylinder, "a")


def wavy_core(model, amp=0.3, n=32):
    th = 2 * math.pi * np.arange(n) / n
    return Loop.from_vertices(model, np.stack([amp * np.sin(3 * th), th], axis=1), "a")


def test_loop_length_is_sum_of_segments(cylinder):
    loop = wavy_core(cylinder)
    pts = np.vstack([loop.vertices, cylinder.deck("a").point(loop.vertices[0])])
    total = sum(flow.segment_length(cylinder, p, q) for p, q in zip(pts[:-1], pts[1:]))
    assert loop.length == pytest.approx(total, abs=1e-9)


def test_core_circle_is_stationary(cylinder):
    seed = schottky.seed_loop("a", cylinder.generators, cylinder, per_unit=8)
    assert shorten_loop(cylinder, seed, tol=1e-12).length == pytest.approx(2.0, abs=1e-10)


def test_wavy_core_shortens_to_core(cylinder):
    short, history = shorten_loop(cylinder, wavy_core(cylinder), max_iters=2000, tol=1e-14,
                                  return_history=True)
    assert short.length == pytest.approx(2.0, abs=1e-6)
    assert all(b <= a for a, b in zip(history, history[1:]))


def test_contractible_loop_rejected():
    hp = HalfPlane()
    t = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    v = np.stack([1 + 0.3 * np.sin(t), 0.3 * np.cos(t)], axis=1)
    with pytest.raises(ContractibleClassError):
        shorten_loop(hp, Loop.from_vertices(hp, v, ""))


def test_shrinking_loop_detected(cylinder):
    # a small circle drawn with the deck word of the core still closes up
    # only if it wraps; a trivially-closed polygon must hit the length floor
    t = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    v = np.stack([0.5 + 0.05 * np.sin(t), 1.0 + 0.05 * np.cos(t)], axis=1)
    with pytest.raises(ContractibleClassError):
        shorten_loop(cylinder, Loop.from_vertices(cylinder, v, ""))


def test_too_few_vertices(cylinder):
    v = np.stack([np.zeros(4), np.arange(4) * math.pi / 2], axis=1)
    with pytest.raises(ConfigurationError):
        shorten_loop(cylinder, Loop.from_vertices(cylinder, v, "a"))


def test_cylinder_orbit(cylinder):
    geo = find_closed_geodesic(cylinder, "a")
    assert geo.length == pytest.approx(2.0, abs=1e-8)
    assert sorted(geo.eigenvalues) == pytest.approx([math.exp(-2), math.exp(2)], rel=1e-8)
    assert geo.residual <= 1e-10


def test_schottky_ab_matches_exact(schottky_model, pair):
    geo = find_closed_geodesic(schottky_model, "ab")
    assert geo.length == pytest.approx(schottky.exact_length("ab", pair), rel=1e-6)
    assert geo.residual <= 1e-10


def test_newton_failure_carries_residual(cylinder):
    with pytest.raises(NonConvergenceError) as info:
        refine_newton(cylinder, wavy_core(cylinder), tol=1e-10, max_iter=1)
    assert info.value.residual > 1e-10


def test_all_short_words_match_exact_lengths(schottky_geodesics, pair):
    for geo in schottky_geodesics:
        assert geo.length == pytest.approx(schottky.exact_length(geo.word, pair), rel=1e-6)


def test_monodromies_are_symplectic_and_hyperbolic(schottky_geodesics):
    for geo in schottky_geodesics:
        lam1, lam2 = geo.eigenvalues
        assert abs(geo.monodromy.det - 1) <= 1e-8
        assert lam1 * lam2 == pytest.approx(1.0, abs=1e-8)
        assert abs(geo.expanding) > 1.0
        # constant curvature: lambda_u = e^l
        assert math.log(abs(geo.expanding)) == pytest.approx(geo.length, rel=1e-7)


def test_unit_length_poincare_map():
    geo = find_closed_geodesic(Cylinder(1.0), "a")
    m = poincare_map(Cylinder(1.0), geo, 1)
    assert sorted(m.eigenvalues) == pytest.approx([1 / math.e, math.e], rel=1e-8)


def test_perturbed_length_and_discretization(bumped_cylinder, bumped_orbit):
    amp = bumped_cylinder.amplitude
    assert 2 * math.exp(-amp) <= bumped_orbit.length <= 2 * math.exp(amp)
    assert abs(bumped_orbit.length - 2.0) > 1e-6
    finer = find_closed_geodesic(bumped_cylinder, "a", per_unit=8)
    assert finer.length == pytest.approx(bumped_orbit.length, abs=1e-6)
    checked = find_closed_geodesic(bumped_cylinder, "a", refine_vertices=True)
    assert checked.length == pytest.approx(bumped_orbit.length, abs=1e-6)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_perturbed_poincare_band(bumped_cylinder, bumped_orbit, k):
    b = curvature_bounds(bumped_cylinder)
    m = poincare_map(bumped_cylinder, bumped_orbit, k)
    kl = k * bumped_orbit.length
    assert abs(m.det - 1) <= 1e-8
    assert math.exp(b.k2 * kl) <= abs(m.expanding) <= math.exp(b.k1 * kl)
    w = det_weight(m, 1)
    assert math.exp(b.k2 * kl / 2) * math.sqrt(1 - math.exp(-b.k2 * kl)) ** 2 <= w
    assert w <= math.exp(b.k1 * kl / 2)


@pytest.mark.parametrize("k", [2, 3])
def test_iterate_consistency(bumped_cylinder, bumped_orbit, k):
    direct = det_weight(poincare_map(bumped_cylinder, bumped_orbit, k), 1)
    assert det_weight(bumped_orbit.monodromy, k) == pytest.approx(direct, rel=1e-6)
    np.testing.assert_allclose(np.linalg.matrix_power(bumped_orbit.monodromy.matrix, k),
                               poincare_map(bumped_cylinder, bumped_orbit, k).matrix, rtol=1e-6)


def test_det_weight_constant_curvature():
    assert det_weight(math.e, 1) == pytest.approx(2 * math.sinh(0.5), abs=1e-12)
    assert det_weight(math.e, 1) == pytest.approx(1.042191, abs=1e-6)
    assert det_weight(math.e, 2) == pytest.approx(2.350402, abs=1e-6)


def test_det_weight_matches_determinant_formula():
    for lam in (1.5, 7.0, -3.0):
        P = np.diag([lam, 1 / lam])
        assert det_weight(lam, 1) == pytest.approx(
            math.sqrt(abs(np.linalg.det(np.eye(2) - P))), rel=1e-12)


def test_det_weight_rejects_unit_circle():
    with pytest.raises(DegenerateOrbitError):
        det_weight(1.0 + 1e-9, 1)


@settings(max_examples=50)
@given(st.floats(1e-3, 30.0), st.integers(1, 6))
def test_det_weight_identity(log_lam, k):
    lam = math.exp(log_lam)
    assert det_weight(lam, k) == pytest.approx(
        abs(lam ** (k / 2) - lam ** (-k / 2)), rel=1e-10)
