import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from steerlab.canonical import CanonicalState, canonicalize
from steerlab.criterion import (
    AXIAL,
    CERTIFIED,
    COVERING_CONSTANT,
    GRID,
    INCONCLUSIVE,
    SPECTRAL,
    VIOLATED,
    assemblage,
    covering_radius,
    criterion_value_at,
    eig_form_value,
    evaluate_criterion,
    fibonacci_sphere,
    grid_values,
    lipschitz_constant,
    local_ascent,
    steered_axis,
    steered_eigs,
    steered_state,
)
from steerlab.family import family_canonical, family_state, unsteerable_ab_condition
from steerlab.qubit import bloch_vector, eigvals_hermitian, werner

from conftest import certified_states, random_direction, random_state


def _hull_covering_radius(points):
    """Largest geodesic distance from a sphere point to the nearest lattice point.

    The farthest points are the radial projections of the circumcentres of the
    convex hull facets; their angular distance to the facet vertices bounds
    the covering radius from above and attains it.
    """
    hull = ConvexHull(points)
    worst = 0.0
    for simplex in hull.simplices:
        a, b, c = points[simplex]
        normal = np.cross(b - a, c - a)
        normal /= np.linalg.norm(normal)
        if normal @ a < 0:
            normal = -normal
        worst = max(worst, math.acos(min(1.0, float(normal @ a))))
    return worst


@pytest.mark.parametrize("n", [100, 500, 2000, 20000])
def test_covering_radius_is_sound(n):
    pts = fibonacci_sphere(n)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    exact = _hull_covering_radius(pts)
    assert exact <= covering_radius(n)
    assert covering_radius(n) == pytest.approx(COVERING_CONSTANT / math.sqrt(n))


def test_steered_state_matches_partial_trace(rng):
    # oracle: Bob's conditional states computed from the full density matrix
    for _ in range(10):
        rho = random_state(rng)
        rec = canonicalize(rho)
        state = rec.canonical
        dirs = random_direction(rng, 5)
        for x, (plus, minus) in zip(dirs, assemblage(state.matrix(), dirs)):
            assert np.allclose(plus, steered_state(state, x), atol=1e-12)
            assert np.allclose(plus + minus, np.eye(2) / 2, atol=1e-12)
            e = steered_eigs(state, x)
            assert np.allclose(eigvals_hermitian(plus), [e.alpha, e.beta], atol=1e-12)
            v = bloch_vector(plus)
            if np.linalg.norm(v) > 1e-9:
                assert np.allclose(v / np.linalg.norm(v), steered_axis(state, x))


def test_eig_form_matches_criterion(rng):
    # (alpha + beta)^2 - 2 beta = [(a.x)^2 + 2|Tx| - 1] / 4 for every direction
    states = [canonicalize(random_state(rng)).canonical for _ in range(100)]
    for state in states:
        for x in random_direction(rng, 100):
            lhs = eig_form_value(steered_eigs(state, x))
            assert lhs == pytest.approx((criterion_value_at(state, x) - 1) / 4, abs=1e-14)


def test_werner_steered_state_values():
    state = canonicalize(werner(0.5)).canonical
    e = steered_eigs(state, [0, 0, 1])
    assert (e.alpha, e.beta) == pytest.approx((3 / 8, 1 / 8))


def test_werner_closed_forms():
    for p in (0.3, 0.5, 0.7):
        rep = evaluate_criterion(canonicalize(werner(p)).canonical)
        assert rep.max_value == pytest.approx(2 * p, abs=1e-12)
        assert rep.method == AXIAL
        assert rep.verdict == (CERTIFIED if p <= 0.5 else VIOLATED)


def test_spectral_method_for_unequal_t():
    state = CanonicalState(np.zeros(3), [0.45, -0.3, 0.2])
    rep = evaluate_criterion(state)
    assert rep.method == SPECTRAL
    assert rep.max_value == pytest.approx(0.9)
    assert rep.verdict == CERTIFIED
    grid = evaluate_criterion(state, method="grid", grid_n=5000)
    assert grid.max_value == pytest.approx(0.9, abs=1e-9)


def test_axial_agrees_with_grid():
    for p in (0.55, 0.7, 0.85, 0.95):
        for chi in (0.2, 0.5, 0.7):
            state = family_canonical(p, chi)
            axial = evaluate_criterion(state)
            grid = evaluate_criterion(state, method="grid", grid_n=5000)
            assert axial.method == AXIAL and grid.method == GRID
            assert grid.max_value <= axial.max_value + 1e-12
            assert grid.max_value == pytest.approx(axial.max_value, abs=1e-8)
            assert grid.certified_upper_bound >= axial.max_value


def test_grid_verdicts_never_contradict_closed_form():
    for p in np.linspace(0.05, 0.98, 12):
        for chi in np.linspace(0.05, math.pi / 4, 6):
            state = canonicalize(family_state(p, chi)).canonical
            rep = evaluate_criterion(state, method="grid", grid_n=2000, refine_iters=50)
            truth = unsteerable_ab_condition(p, chi)
            if rep.verdict == CERTIFIED:
                assert truth
            elif rep.verdict == VIOLATED:
                assert not truth or abs(rep.max_value - 1) < 1e-6


def test_inconclusive_near_boundary():
    # a point just inside the boundary: the coarse grid bound cannot settle it
    state = CanonicalState([0, 0, 0.3], [0.45, 0.4, 0.1])
    rep = evaluate_criterion(state, grid_n=100, refine_iters=0)
    assert rep.max_value < 1 < rep.certified_upper_bound
    assert rep.verdict == INCONCLUSIVE


def test_grid_upper_bound_dominates_true_max(rng):
    for state in certified_states(rng, 10, noise=0.3):
        fine = evaluate_criterion(state, method="grid", grid_n=50000)
        for n in (200, 1000):
            coarse = evaluate_criterion(state, method="grid", grid_n=n, refine_iters=0)
            assert coarse.certified_upper_bound >= fine.max_value - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_lipschitz_bound(seed):
    rng = np.random.default_rng(seed)
    state = canonicalize(random_state(rng)).canonical
    L = lipschitz_constant(state.a, state.T)
    x, y = random_direction(rng, 2)
    dist = math.acos(float(np.clip(x @ y, -1, 1)))
    assert abs(criterion_value_at(state, x) - criterion_value_at(state, y)) <= L * dist + 1e-12


def test_local_ascent_reaches_axis_maximum():
    state = CanonicalState(np.zeros(3), [0.2, 0.1, 0.6])
    f, x = local_ascent([0.3, 0.4, 0.5], state.a, state.T)
    assert f == pytest.approx(1.2, abs=1e-10)
    assert abs(x[2]) == pytest.approx(1.0, abs=1e-5)


def test_grid_values_threads_agree():
    state = CanonicalState([0.1, 0.2, 0.3], [0.4, -0.3, 0.2])
    dirs = fibonacci_sphere(30000)
    assert np.array_equal(grid_values(dirs, state.a, state.T, 1), grid_values(dirs, state.a, state.T, 4))


def test_deterministic_report():
    state = CanonicalState([0.1, 0.2, 0.3], [0.4, -0.3, 0.2])
    r1 = evaluate_criterion(state, grid_n=3000)
    r2 = evaluate_criterion(state, grid_n=3000, threads=3)
    assert r1.to_dict() == r2.to_dict()


def test_argument_checks():
    state = CanonicalState(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        evaluate_criterion(state, grid_n=10)
    with pytest.raises(ValueError):
        evaluate_criterion(state, method="newton")
    with pytest.raises(ValueError):
        criterion_value_at(state, [0, 0, 0])


def test_zero_correlation_axis_convention():
    state = CanonicalState([0, 0, 0.2], np.zeros(3))
    assert np.allclose(steered_axis(state, [1, 0, 0]), [0, 0, 1])
