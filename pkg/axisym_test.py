# axisym_test.py

import math

import numpy as np
import pytest

from axisym import (
    ProfileCurve,
    axisym_functionals,
    both_integral_identities,
    check_sixpi_bound,
    check_theta_window_theorem,
    make_capsule_curve,
    make_hump_stack_curve,
    make_slope_counterexample_curve,
    make_sphere_curve,
    read_profile,
    run_theta_window_suite,
    validate_profile,
    write_profile,
)
from geometry_errors import InvalidGeometryError, InvalidProfileError, ParameterError, ParametrizationError


def hump_stack_intH(n, R, rho=1.0):
    # shell pi R + (4n + 3) rho plus n humps of (3 pi - 8) rho - pi R, times 2 pi
    return 2.0 * math.pi * (math.pi * R + 3.0 * rho + n * ((3.0 * math.pi - 4.0) * rho - math.pi * R))


def test_round_sphere_profile():
    report = axisym_functionals(make_sphere_curve(1.0))
    assert report.intH == pytest.approx(8.0 * math.pi, rel=1e-6)
    assert report.A == pytest.approx(4.0 * math.pi, rel=1e-6)
    assert report.W == pytest.approx(4.0 * math.pi, rel=1e-6)
    assert report.T == pytest.approx(4.0 * math.sqrt(math.pi), rel=1e-6)
    assert report.min_theta == pytest.approx(0.0)
    assert report.max_theta == pytest.approx(math.pi)


def test_functionals_are_scale_invariant():
    curve = make_capsule_curve(1.0, 2.0)
    small = axisym_functionals(curve)
    big = axisym_functionals(curve.scaled(3.0))
    assert big.W == pytest.approx(small.W, rel=1e-9)
    assert big.T == pytest.approx(small.T, rel=1e-9)
    assert big.A == pytest.approx(9.0 * small.A, rel=1e-9)


def test_capsule_values():
    report = axisym_functionals(make_capsule_curve(1.0, 2.0))
    assert report.W == pytest.approx(5.0 * math.pi, rel=1e-3)
    assert report.intH == pytest.approx(12.0 * math.pi, rel=1e-3)
    assert report.A == pytest.approx(8.0 * math.pi, rel=1e-3)


def test_integral_identities_agree():
    identity = both_integral_identities(make_sphere_curve(1.0))
    assert identity.closed
    assert identity.gap < 1e-4
    assert identity.cos_integral == pytest.approx(0.0, abs=1e-6)
    assert identity.sin_integral == pytest.approx(identity.height_gain, rel=1e-6)


@pytest.mark.parametrize("n,R", [(1, 5.0), (2, 5.0), (3, 10.0)])
def test_hump_stack_total_mean_curvature(n, R):
    report = axisym_functionals(make_hump_stack_curve(n, R))
    assert report.intH == pytest.approx(hump_stack_intH(n, R), rel=1e-3)
    assert report.max_theta == pytest.approx(2.0 * math.pi)


def test_short_hump_stack_uses_smaller_arcs():
    curve = make_hump_stack_curve(2, 2.5)
    report = axisym_functionals(curve)
    assert report.intH == pytest.approx(hump_stack_intH(2, 2.5, rho=2.5 / 4.0), rel=1e-3)
    assert np.max(curve.gamma1) == pytest.approx(2.5 + 2.5 / 4.0, rel=1e-6)


def test_hump_stack_slope_approaches_minus_R_pi():
    R = 30.0
    counts = np.array([10, 20, 30, 40])
    intH = np.array([axisym_functionals(make_hump_stack_curve(int(n), R)).intH for n in counts])
    slope, _ = np.polyfit(counts, intH / (2.0 * math.pi), 1)
    assert abs(slope / (-R * math.pi) - 1.0) <= 0.1


def test_many_humps_have_negative_mean_curvature_and_cost_six_pi():
    curve = make_hump_stack_curve(20, 8.0)
    report = axisym_functionals(curve)
    assert report.intH < 0
    assert report.W >= 6.0 * math.pi
    assert check_sixpi_bound(curve, report).applicable


def test_hump_stack_drives_T_negative():
    reports = [axisym_functionals(make_hump_stack_curve(n, 10.0)) for n in (1, 2, 4)]
    assert reports[0].intH > reports[1].intH > reports[2].intH
    assert reports[2].T < 0
    verdict = check_theta_window_theorem(make_hump_stack_curve(2, 10.0), reports[1])
    assert not verdict.window_holds
    assert verdict.holds is None


def test_hump_stack_preconditions():
    with pytest.raises(ParameterError):
        make_hump_stack_curve(0, 5.0)
    with pytest.raises(InvalidGeometryError):
        make_hump_stack_curve(1, 2.0)
    with pytest.raises(InvalidGeometryError):
        make_hump_stack_curve(1, 5.0, arc_radius=2.0)


def test_slope_counterexample_leaves_window_and_turns_negative():
    eps = 0.2
    curve = make_slope_counterexample_curve(eps, 0.01)
    report = axisym_functionals(curve)
    assert report.min_theta == pytest.approx(-math.pi / 2.0 - eps)
    assert report.max_theta == pytest.approx(1.5 * math.pi + eps)
    assert report.intH < 0
    assert not check_theta_window_theorem(curve, report).window_holds
    assert curve.gamma2[-1] == pytest.approx(0.01)


def test_slope_counterexample_at_wider_angle_costs_six_pi():
    curve = make_slope_counterexample_curve(0.3, 0.01)
    report = axisym_functionals(curve)
    assert report.intH < 0
    assert report.W >= 6.0 * math.pi
    verdict = check_sixpi_bound(curve, report)
    assert verdict.applicable and verdict.holds


def test_slope_counterexample_preconditions():
    with pytest.raises(ParameterError):
        make_slope_counterexample_curve(0.6, 0.01)
    with pytest.raises(ParameterError):
        make_slope_counterexample_curve(0.2, 0.1)


def test_window_theorem_on_sphere():
    curve = make_sphere_curve(1.0, samples=2001)
    verdict = check_theta_window_theorem(curve)
    assert verdict.window_holds
    assert verdict.holds is True
    assert not check_sixpi_bound(curve).applicable


def test_random_suite_finds_no_violations():
    frame, violations = run_theta_window_suite(count=20, seed=3, knots=6)
    assert violations == 0
    assert len(frame) == 20
    ok = frame['error_flag'] == ''
    assert ok.any()
    assert (frame.loc[ok, 'intH'] >= -1e-6 * np.sqrt(frame.loc[ok, 'A'])).all()


def test_thousand_random_curves_respect_the_window_bound():
    frame, violations = run_theta_window_suite(count=1000, seed=0)
    assert len(frame) == 1000
    assert violations == 0
    ok = frame['error_flag'] == ''
    assert ok.sum() > 900
    assert (frame.loc[ok, 'intH'] >= -1e-6 * np.sqrt(frame.loc[ok, 'A'])).all()


def test_random_suite_rows_reproduce_individually():
    first, _ = run_theta_window_suite(count=4, seed=11, knots=6)
    second, _ = run_theta_window_suite(count=4, seed=11, knots=6)
    np.testing.assert_array_equal(first['intH'].to_numpy(), second['intH'].to_numpy())


def test_profile_file_round_trip(tmp_path):
    curve = make_capsule_curve(1.0, 1.0)
    path = write_profile(curve, tmp_path / 'capsule.csv')
    loaded = read_profile(path)
    np.testing.assert_allclose(loaded.gamma1, curve.gamma1, rtol=1e-11, atol=1e-12)
    assert axisym_functionals(loaded).W == pytest.approx(axisym_functionals(curve).W, rel=1e-9)


def test_malformed_profiles_are_rejected():
    with pytest.raises(InvalidProfileError):
        ProfileCurve(np.arange(3.0), np.zeros(3), np.zeros(4), np.zeros(3))
    with pytest.raises(ParametrizationError):
        ProfileCurve(np.array([0.0, 2.0, 1.0]), np.zeros(3), np.zeros(3), np.zeros(3))

    s = np.linspace(0.0, 1.0, 11)
    wrong_speed = ProfileCurve(s, 2.0 * s, np.zeros(11), np.zeros(11), np.zeros(11))
    with pytest.raises(ParametrizationError):
        validate_profile(wrong_speed, require_closed=False)

    shifted = ProfileCurve(s, s, np.zeros(11), np.full(11, 0.0), np.zeros(11))
    with pytest.raises(InvalidProfileError):
        validate_profile(shifted)
