# functionals_test.py

import json
import math

import numpy as np
import pytest

from geometry_errors import OrientationError
from functionals import (
    REPORT_COLUMNS,
    area,
    enclosed_volume,
    functional_report,
    gradient_T,
    gradient_W,
    helfrich_energy,
    isoperimetric_ratio,
    l2_inner,
    normal_variation,
    optimal_spontaneous_curvature,
    total_gauss_curvature,
    total_mean_curvature_ratio,
    willmore_energy,
)
from surface_mesh import build_icosphere, build_torus, compute_curvatures

SPHERE_T = 4.0 * math.sqrt(math.pi)
CENTRAL_STEP = 1e-4


@pytest.fixture(scope='module')
def sphere():
    mesh = build_icosphere(5)
    return mesh, compute_curvatures(mesh)


@pytest.fixture(scope='module')
def clifford():
    mesh = build_torus(math.sqrt(2.0), 1.0, 128, 128)
    return mesh, compute_curvatures(mesh)


@pytest.fixture(scope='module')
def coarse_torus():
    mesh = build_torus(math.sqrt(2.0), 1.0, 64, 64)
    return mesh, compute_curvatures(mesh)


def test_round_sphere_values(sphere):
    mesh, curv = sphere
    report = functional_report(mesh, curv)
    assert report.W == pytest.approx(4.0 * math.pi, rel=5e-3)
    assert report.T == pytest.approx(SPHERE_T, rel=5e-3)
    assert report.A == pytest.approx(4.0 * math.pi, rel=3e-3)
    assert report.V == pytest.approx(4.0 * math.pi / 3.0, rel=5e-3)
    assert report.iso == pytest.approx((36.0 * math.pi) ** (1.0 / 3.0), rel=1e-2)


def test_willmore_dominates_quarter_T_squared(sphere, clifford):
    for mesh, curv in (sphere, clifford):
        assert willmore_energy(curv) >= total_mean_curvature_ratio(curv) ** 2 / 4.0 - 1e-10


def test_clifford_torus_values(clifford):
    mesh, curv = clifford
    assert willmore_energy(curv) == pytest.approx(2.0 * math.pi ** 2, rel=1e-2)
    assert enclosed_volume(mesh) == pytest.approx(2.0 * math.pi ** 2 * math.sqrt(2.0), rel=1e-2)
    assert total_gauss_curvature(curv) == pytest.approx(0.0, abs=1e-8)


def test_functionals_are_scale_invariant(coarse_torus):
    mesh, curv = coarse_torus
    big = mesh.scaled(3.0)
    big_curv = compute_curvatures(big)
    assert willmore_energy(big_curv) == pytest.approx(willmore_energy(curv), rel=1e-10)
    assert total_mean_curvature_ratio(big_curv) == pytest.approx(total_mean_curvature_ratio(curv), rel=1e-10)
    assert isoperimetric_ratio(big) == pytest.approx(isoperimetric_ratio(mesh), rel=1e-10)
    assert area(big) == pytest.approx(9.0 * area(mesh), rel=1e-12)


def test_flipping_orientation_negates_T(sphere):
    mesh, curv = sphere
    flipped = mesh.flipped()
    flipped_curv = compute_curvatures(flipped)
    assert total_mean_curvature_ratio(flipped_curv) == pytest.approx(-total_mean_curvature_ratio(curv), rel=1e-12)
    assert willmore_energy(flipped_curv) == pytest.approx(willmore_energy(curv), rel=1e-12)
    assert enclosed_volume(flipped) < 0
    with pytest.raises(OrientationError):
        isoperimetric_ratio(flipped)
    assert math.isnan(functional_report(flipped, flipped_curv).iso)


def test_helfrich_energy_on_sphere(sphere):
    _, curv = sphere
    assert helfrich_energy(curv, 0.0) == pytest.approx(willmore_energy(curv), rel=1e-12)
    assert helfrich_energy(curv, 0.0) == pytest.approx(4.0 * math.pi, rel=5e-3)
    assert helfrich_energy(curv, 1.0) == pytest.approx(0.0, abs=0.05)
    assert helfrich_energy(curv, 2.0) == pytest.approx(4.0 * math.pi, rel=2e-2)


def test_optimal_spontaneous_curvature_identity(sphere, coarse_torus):
    for _, curv in (sphere, coarse_torus):
        c0, energy = optimal_spontaneous_curvature(curv)
        T = total_mean_curvature_ratio(curv)
        assert energy == pytest.approx(willmore_energy(curv) - T ** 2 / 4.0, abs=1e-10)
        assert helfrich_energy(curv, c0 + 0.1) > energy
        assert helfrich_energy(curv, c0 - 0.1) > energy


def test_report_serializations(sphere):
    mesh, curv = sphere
    report = functional_report(mesh, curv)
    assert list(report.to_row()) == REPORT_COLUMNS
    assert len(report.to_csv_row().split(',')) == len(REPORT_COLUMNS)
    payload = json.loads(report.to_json())
    assert payload['W'] == pytest.approx(report.W, rel=1e-11)
    assert payload['total_mean_curvature'] == pytest.approx(report.total_mean_curvature, rel=1e-11)


def test_gradient_of_T_is_small_on_sphere_and_not_on_torus(sphere, coarse_torus):
    _, sphere_curv = sphere
    _, torus_curv = coarse_torus
    assert np.max(np.abs(gradient_T(sphere_curv))) <= 0.05
    assert np.max(np.abs(gradient_T(torus_curv))) > 0.1


def test_gradients_scale_with_inverse_cube(coarse_torus):
    mesh, curv = coarse_torus
    big_curv = compute_curvatures(mesh.scaled(2.0))
    np.testing.assert_allclose(gradient_T(big_curv), gradient_T(curv) / 8.0, rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(gradient_W(big_curv), gradient_W(curv) / 8.0, rtol=1e-8, atol=1e-12)


def _tube_angle(mesh, major_R):
    return np.arctan2(mesh.vertices[:, 2], np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]) - major_R)


def _directional_error(mesh, functional, gradient, xi):
    curv = compute_curvatures(mesh)
    plus = functional(compute_curvatures(normal_variation(mesh, curv, xi, CENTRAL_STEP)))
    minus = functional(compute_curvatures(normal_variation(mesh, curv, xi, -CENTRAL_STEP)))
    finite_difference = (plus - minus) / (2.0 * CENTRAL_STEP)
    predicted = l2_inner(curv, gradient(curv), xi)
    assert abs(predicted) > 1e-3
    return abs(finite_difference - predicted) / abs(predicted)


def test_gradient_of_T_converges_to_directional_derivative():
    errors = []
    for n in (32, 64, 128, 256):
        mesh = build_torus(math.sqrt(2.0), 1.0, n, n)
        errors.append(_directional_error(mesh, total_mean_curvature_ratio, gradient_T,
                                         np.cos(_tube_angle(mesh, math.sqrt(2.0)))))
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] <= 1e-3


def test_gradient_of_W_predicts_directional_derivative():
    mesh = build_torus(3.0, 1.0, 128, 128)
    error = _directional_error(mesh, willmore_energy, gradient_W, np.cos(_tube_angle(mesh, 3.0)))
    assert error < 1e-2


def test_inward_variation_of_sphere_shrinks_area(sphere):
    mesh, curv = sphere
    moved = normal_variation(mesh, curv, np.ones(mesh.n_vertices), 0.1)
    np.testing.assert_allclose(np.linalg.norm(moved.vertices, axis=1), 0.9, atol=1e-3)
    assert area(moved) < area(mesh)
