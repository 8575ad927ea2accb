# biharmonic_gluing_test.py

import math

import numpy as np
import pytest

from biharmonic_gluing import (
    GRID_COLUMNS,
    SCALING_COLUMNS,
    AnnulusBoundaryData,
    ConnectedSumParams,
    annulus_grid_frame,
    biharmonic_annulus,
    choose_t_ratio,
    connected_sum_report,
    connected_sum_scaling,
    cutoff,
    frobenius,
    glued_graph_region,
    laplacian_terms,
    middle_boundary_data,
    mirror_case_two,
    normalize_orientation,
    trace_free,
)
from geometry_errors import IllConditionedError, OrientationError, ParameterError
from settings import default_config

P = np.array([[1.5, 0.0], [0.0, -0.5]])
Q = np.array([[2.0, 0.0], [0.0, 0.0]])


def make_params(alpha=1e-3, **overrides):
    return ConnectedSumParams.from_config(P, Q, alpha, default_config(), **overrides)


@pytest.fixture(scope='module')
def region():
    return glued_graph_region(make_params())


def test_laplacian_term_algebra():
    assert laplacian_terms({(2, 0): 1.0}, 2) == {}
    assert laplacian_terms({(0, 1): 1.0}, 0) == {}
    assert laplacian_terms({(2, 0): 1.0}, 0) == {(0, 0): 4.0}
    assert laplacian_terms({(2, 1): 1.0}, 0) == {(0, 1): 4.0, (0, 0): 4.0}
    assert laplacian_terms({(4, 0): 1.0}, 2) == {(2, 0): 12.0}


def test_annulus_solution_meets_boundary_data_and_is_biharmonic():
    bc = AnnulusBoundaryData(radial=(0.1, -0.2, 0.3, 0.05), cos2=(0.0, 0.4, -0.1, 0.2), sin2=(0.2, 0.0, 0.0, -0.3))
    solution = biharmonic_annulus(0.3, bc)
    assert solution.boundary_mismatch(bc) < 1e-10
    rng = np.random.default_rng(0)
    r = rng.uniform(0.3, 1.0, 50)
    theta = rng.uniform(0.0, 2.0 * math.pi, 50)
    np.testing.assert_allclose(solution.bilaplacian(r, theta), 0.0, atol=1e-12)
    assert solution.radial_laplacian_integral() == pytest.approx(solution.laplacian_flux_integral(), rel=1e-9)
    assert set(solution.to_dict()['conditions']) == {'radial', 'cos2', 'sin2'}


def test_annulus_preconditions():
    bc = AnnulusBoundaryData()
    with pytest.raises(ParameterError):
        biharmonic_annulus(1.2, bc)
    with pytest.raises(ParameterError):
        biharmonic_annulus(0.0, bc)
    with pytest.raises(IllConditionedError):
        biharmonic_annulus(0.3, bc, condition_limit=1.0)
    with pytest.raises(ParameterError):
        biharmonic_annulus(0.3, AnnulusBoundaryData(radial=(0.0, float('nan'), 0.0, 0.0)))


def test_cutoff_ramp():
    alpha = 1e-2
    root = math.sqrt(alpha)
    assert cutoff(0.2 * root, alpha) == 0.0
    assert cutoff(0.8 * root, alpha) == 1.0
    assert cutoff(0.5 * root, alpha) == pytest.approx(0.5)
    values = cutoff(np.linspace(0.0, root, 101), alpha)
    assert np.all(np.diff(values) >= 0)


def test_params_validation():
    make_params().validate()
    with pytest.raises(ParameterError):
        make_params(alpha=0.05).validate()
    with pytest.raises(ParameterError):
        make_params(gamma=1.5).validate()
    with pytest.raises(ParameterError):
        make_params(graph_radius=1e-3).validate()
    with pytest.raises(ParameterError):
        ConnectedSumParams(np.array([[1.0, 0.5], [0.0, 1.0]]), Q, 1e-3, 4.0, 0.3)
    flipped = ConnectedSumParams(P, np.diag([0.0, 2.0]), 1e-3, 4.0, 0.3)
    with pytest.raises(OrientationError):
        flipped.validate()
    flipped.validate(require_orientation=False)


def test_params_properties():
    params = make_params()
    np.testing.assert_allclose(params.P0, np.diag([1.0, -1.0]))
    np.testing.assert_allclose(params.Q0, np.diag([1.0, -1.0]))
    assert params.e == pytest.approx(1.0)
    assert params.beta == pytest.approx(4e-3)
    assert params.frobenius == pytest.approx(2.0)
    assert params.strip_width == pytest.approx(math.sqrt(1e-3))


def test_normalize_orientation_aligns_trace_free_parts():
    rng = np.random.default_rng(4)
    for _ in range(5):
        A = rng.normal(size=(2, 2))
        B = rng.normal(size=(2, 2))
        P_random, Q_random = A + A.T, B + B.T
        rotated, _ = normalize_orientation(P_random, Q_random)
        P0, Q0 = trace_free(P_random), trace_free(rotated)
        assert frobenius(P0, Q0) == pytest.approx(np.linalg.norm(P0) * np.linalg.norm(Q0), rel=1e-10)
        assert np.trace(rotated) == pytest.approx(np.trace(Q_random), rel=1e-10, abs=1e-12)
    with pytest.raises(OrientationError):
        normalize_orientation(np.eye(2), Q)


def test_mirror_keeps_trace_free_part_and_flips_trace():
    mirrored, intH = mirror_case_two(P, 3.0)
    np.testing.assert_allclose(trace_free(mirrored), trace_free(P), atol=1e-12)
    assert np.trace(mirrored) == pytest.approx(-np.trace(P))
    assert intH == -3.0


def test_choose_t_ratio_makes_energy_term_negative():
    t = choose_t_ratio(P, Q, margin=2.0)
    params = ConnectedSumParams(P, Q, 1e-3, t, 0.3)
    report = connected_sum_report(params, 8.0 * math.pi, 4.0 * math.pi)
    assert report.energy_coefficient == pytest.approx(-frobenius(params.P0, params.P0))
    assert report.energy_decreases


def test_connected_sum_report_values():
    params = make_params()
    report = connected_sum_report(params, 8.0 * math.pi, area_f2=4.0 * math.pi)
    assert report.energy_coefficient == pytest.approx(2.0 - 4.0 * 2.0)
    assert report.delta_W == pytest.approx(math.pi * 1e-6 * -6.0)
    assert report.delta_T == pytest.approx(1e-3 * 4e-3 * 8.0 * math.pi / math.sqrt(4.0 * math.pi))
    assert report.to_dict()['energy_decreases'] is True

    mirrored = connected_sum_report(params, 8.0 * math.pi, area_f2=4.0 * math.pi, case=2)
    assert mirrored.delta_T == pytest.approx(-report.delta_T)
    assert mirrored.delta_W == pytest.approx(report.delta_W)

    with pytest.raises(ParameterError):
        connected_sum_report(params, 1.0, case=3)
    with pytest.raises(ParameterError):
        connected_sum_report(params, 1.0, area_f2=0.0)


def test_middle_boundary_data_matches_both_graphs():
    params = make_params()
    bc = middle_boundary_data(params)
    assert bc.radial == pytest.approx((0.0, 0.0, 0.5 * params.beta, params.beta))
    assert bc.cos2 == pytest.approx((0.5e-3, 0.0, 0.5 * params.beta, params.beta))
    assert bc.sin2 == pytest.approx((0.0, 0.0, 0.0, 0.0))


def test_glued_region_laplacian_integrals(region):
    params = region.params
    alpha, root = params.alpha, params.strip_width
    assert region.middle_gap == pytest.approx(0.0, abs=1e-10)
    assert region.middle_coefficient_integral == pytest.approx(region.middle_integral, rel=1e-9)
    expected_outer = region.two_beta_pi_e * (2.0 * root + alpha)
    expected_inner = 0.5 * math.pi * alpha ** 2 / (params.gamma - root)
    assert region.removed_gap == pytest.approx(expected_outer, rel=1e-6)
    assert region.strip_sum == pytest.approx(expected_outer + expected_inner, rel=1e-6)


def test_glued_region_geometry(region):
    assert region.graph_ratio_max <= 2.5
    assert region.middle_W > 0
    assert region.report.W > 0
    assert math.isnan(region.report.V)
    assert region.w.shape == (len(region.r), len(region.theta))
    assert set(region.segments) == {'inner', 'inner_strip', 'middle', 'outer_strip', 'outer'}
    frame = annulus_grid_frame(region)
    assert list(frame.columns) == GRID_COLUMNS
    assert len(frame) == region.w.size


def test_glued_region_rejects_unbounded_error_graphs():
    with pytest.raises(ParameterError):
        glued_graph_region(make_params(), psi_err=lambda x, y: np.ones_like(x))


def test_connected_sum_scaling_exponents():
    summary = connected_sum_scaling(make_params(), [1e-2, 1e-3, 1e-4], config=default_config())
    assert list(summary.frame.columns) == SCALING_COLUMNS
    assert len(summary.frame) == 3
    assert summary.exponents['strip_sum'] == pytest.approx(1.5, abs=0.1)
    assert summary.exponents['removed_gap'] == pytest.approx(1.5, abs=0.1)
    assert summary.exponents['middle_W'] == pytest.approx(2.0, abs=0.2)
    assert 'middle_gap' not in summary.exponents


def test_grid_energy_change_scales_like_alpha_squared():
    alphas = [1e-7, 1e-8, 1e-9]
    summary = connected_sum_scaling(make_params(), alphas, config=default_config())
    # strip energies are O(alpha^2.5) and fade at these scales
    assert summary.exponents['delta_W'] == pytest.approx(2.0, abs=0.3)
    assert np.all(np.isfinite(summary.frame['delta_W']))
    np.testing.assert_allclose(summary.frame['predicted_delta_W'], -6.0 * math.pi * np.array(alphas) ** 2, rtol=1e-12)
