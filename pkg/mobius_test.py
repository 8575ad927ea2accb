# mobius_test.py

import math

import numpy as np
import pytest

from functionals import enclosed_volume, total_mean_curvature_ratio
from geometry_errors import InversionCenterError, ParameterError, PoleError, UnreachableTargetError
from mobius import (
    E3,
    SPHERE_T,
    SweepSettings,
    best_fit_sphere,
    blow_down_sweep,
    blow_up_sweep,
    fit_decay_exponent,
    image_sphere,
    invert_points,
    match_T_by_inversion,
    run_rows,
    sphere_inversion,
    stereographic_T,
    willmore_invariance_check,
)
from settings import default_config
from surface_mesh import build_icosphere, build_torus, compute_curvatures


@pytest.fixture(scope='module')
def sphere():
    return build_icosphere(3)


@pytest.fixture(scope='module')
def torus():
    return build_torus(2.0, 1.0, 32, 32)


@pytest.fixture(scope='module')
def clifford():
    return build_torus(math.sqrt(2.0), 1.0, 64, 64)


@pytest.fixture(scope='module')
def egg():
    # Wider at the top than at the bottom, so no central symmetry.
    sphere = build_icosphere(3)
    v = sphere.vertices
    return sphere.with_vertices(v * np.stack([1.0 + 0.3 * v[:, 2], 1.0 + 0.3 * v[:, 2], np.ones(len(v))], axis=1))


def test_inversion_is_an_involution():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(50, 3))
    a = np.array([0.3, -0.2, 5.0])
    np.testing.assert_allclose(invert_points(invert_points(points, a), a), points, rtol=1e-10, atol=1e-12)


def test_stereographic_map_is_its_own_inverse():
    rng = np.random.default_rng(5)
    points = rng.normal(size=(40, 3))
    np.testing.assert_allclose(stereographic_T(stereographic_T(points)), points, rtol=1e-9, atol=1e-12)
    with pytest.raises(PoleError):
        stereographic_T(E3)


@pytest.mark.parametrize("sigma", [0.25, 0.5, 2.0])
def test_image_sphere_matches_mapped_points(sigma):
    rng = np.random.default_rng(11)
    directions = rng.normal(size=(30, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    image = stereographic_T(sigma * directions)
    zeta, rho = image_sphere(sigma)
    distances = np.linalg.norm(image - np.array([0.0, 0.0, zeta]), axis=1)
    np.testing.assert_allclose(distances, rho, rtol=1e-10)


def test_image_sphere_rejects_unit_sigma():
    with pytest.raises(PoleError):
        image_sphere(1.0)


def test_inversion_of_sphere_is_a_sphere(sphere):
    image = sphere_inversion(sphere, [3.0, 0.0, 0.0])
    assert enclosed_volume(image) > 0
    _, radius, residual = best_fit_sphere(image.vertices)
    # |x - a| ranges over [2, 4], so the image radius is (1/2 - 1/4)/2.
    assert radius == pytest.approx(0.125, rel=1e-9)
    assert residual < 1e-9


def test_inversion_center_on_surface_is_rejected(sphere):
    with pytest.raises(InversionCenterError):
        sphere_inversion(sphere, sphere.vertices[0])


def test_willmore_energy_is_nearly_invariant(sphere):
    W_before, W_after, gap = willmore_invariance_check(build_icosphere(4), [3.0, 0.0, 0.0])
    assert W_before == pytest.approx(4.0 * math.pi, rel=1e-2)
    assert gap < 3e-2


def test_torus_willmore_gap_shrinks_under_refinement():
    a = [0.0, 0.0, 4.0]
    _, _, coarse = willmore_invariance_check(build_torus(math.sqrt(2.0), 1.0, 32, 32), a)
    assert coarse <= 2e-2
    _, _, fine = willmore_invariance_check(build_torus(math.sqrt(2.0), 1.0, 64, 64), a)
    assert fine < coarse


def test_blow_down_of_sphere_stays_at_sphere_value(sphere):
    series = blow_down_sweep(sphere, [1.0, 0.0, 0.0], [4.0, 8.0, 16.0])
    assert series.ok_rows().all()
    np.testing.assert_allclose(series.T, SPHERE_T, rtol=2e-2)
    frame = series.to_frame()
    assert list(frame.columns) == ['param', 'T', 'W', 'error_flag']
    assert len(frame) == 3


def test_blow_down_of_torus_returns_to_its_T(torus):
    radii = [8.0, 16.0, 32.0, 64.0]
    series = blow_down_sweep(torus, [1.0, 0.0, 0.0], radii, jobs=2)
    assert series.ok_rows().all()
    gaps = np.abs(np.asarray(series.T) - series.reference_T)
    assert np.all(np.diff(gaps) < 0)
    # Central symmetry cancels the 1/|a| term, leaving 1/|a|^2.
    assert series.exponent == pytest.approx(2.0, abs=0.3)


def test_blow_down_decays_like_inverse_distance_without_symmetry(egg):
    series = blow_down_sweep(egg, E3, [8.0, 16.0, 32.0, 64.0])
    assert series.ok_rows().all()
    assert series.exponent == pytest.approx(1.0, abs=0.3)


def test_blow_down_rejects_unsorted_radii(sphere):
    with pytest.raises(ParameterError):
        blow_down_sweep(sphere, [1.0, 0.0, 0.0], [8.0, 4.0])


def test_blow_up_of_sphere_keeps_sphere_value(sphere):
    series = blow_up_sweep(sphere, 0, [0.5, 0.25], SweepSettings.from_config(default_config()))
    assert series.ok_rows().all()
    assert series.kind == 'blowup'
    np.testing.assert_allclose(series.T, SPHERE_T, rtol=5e-2)


def test_blow_up_of_torus_approaches_sphere_value(clifford):
    series = blow_up_sweep(clifford, 0, [0.5, 0.25, 0.125, 0.0625])
    assert series.ok_rows().all()
    assert series.T[-1] == pytest.approx(SPHERE_T, rel=5e-2)
    assert abs(series.T[-1] - SPHERE_T) < abs(series.T[0] - SPHERE_T)


def test_blow_up_preconditions(sphere):
    with pytest.raises(ParameterError):
        blow_up_sweep(sphere, 0, [0.1, 0.2])
    with pytest.raises(ParameterError):
        blow_up_sweep(sphere, sphere.n_vertices, [0.2, 0.1])


def test_match_rejects_targets_outside_the_reachable_range(torus):
    with pytest.raises(UnreachableTargetError):
        match_T_by_inversion(torus, SPHERE_T - 0.5)
    with pytest.raises(UnreachableTargetError):
        match_T_by_inversion(torus, 100.0)


def test_match_hits_target_on_the_mesh_it_was_given(clifford):
    T0 = total_mean_curvature_ratio(compute_curvatures(clifford))
    target = T0 + 0.5 * (SPHERE_T - T0)
    settings = SweepSettings()
    center = match_T_by_inversion(clifford, target, settings=settings)
    image_T = total_mean_curvature_ratio(compute_curvatures(sphere_inversion(clifford, center.a)))
    assert abs(image_T - target) <= settings.match_tolerance * abs(SPHERE_T - T0)
    assert center.achieved_T == pytest.approx(image_T, abs=1e-9)
    assert center.iterations <= settings.match_max_iterations
    assert center.clearance > 0


def test_fit_decay_exponent_recovers_power_law():
    x = np.array([1e-1, 1e-2, 1e-3])
    assert fit_decay_exponent(x, 3.0 * x ** 2) == pytest.approx(2.0, rel=1e-10)
    assert fit_decay_exponent([1.0], [1.0]) is None
    assert fit_decay_exponent(x, 1e-20 * x ** 2) is None
    assert fit_decay_exponent(x, 1e-20 * x ** 2, floor=0.0) == pytest.approx(2.0, rel=1e-10)


def test_run_rows_keeps_order_with_threads():
    assert run_rows([3, 1, 2], lambda x: x * 10, jobs=3, label='rows', show_progress=False) == [30, 10, 20]


def test_sweep_settings_read_config():
    config = default_config()
    config.set('mobius', 'match_scan_points', '10')
    settings = SweepSettings.from_config(config)
    assert settings.match_scan_points == 10
    assert settings.hard_clearance == pytest.approx(1e-9)
