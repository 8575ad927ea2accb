# main_test.py

import argparse
import json
import math
from pathlib import Path

import numpy as np
import pytest

from main import main, parse_grid, parse_matrix
from constructions import predicted_gamma_energy
from optimizer import BETA0_COLUMNS, TRACE_COLUMNS, perturbed_sphere
from surface_mesh import build_icosphere, build_torus, read_obj, validate, write_obj
from table_io import read_table

CONFIG = str(Path(__file__).parent / 'config.ini')


def run(tmp_path, *argv):
    return main(['--config', CONFIG, '--output-dir', str(tmp_path), '--quiet', *argv])


@pytest.fixture
def sphere_obj(tmp_path):
    return str(write_obj(build_icosphere(3), tmp_path / 'sphere.obj'))


def test_parse_grid_forms():
    assert parse_grid('7.2,7.6') == [7.2, 7.6]
    assert parse_grid('1:3:3') == [1.0, 2.0, 3.0]
    assert parse_grid('8:32:geom') == [8.0, 16.0, 32.0]
    assert parse_grid('1:100:3:geom') == pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(argparse.ArgumentTypeError):
        parse_grid('1:2:x')
    with pytest.raises(argparse.ArgumentTypeError):
        parse_grid('4:2:geom')


def test_parse_matrix_is_symmetric():
    np.testing.assert_array_equal(parse_matrix('1,2,3'), [[1.0, 2.0], [2.0, 3.0]])
    with pytest.raises(argparse.ArgumentTypeError):
        parse_matrix('1,2')


def test_eval_sphere(tmp_path, sphere_obj, capsys):
    assert run(tmp_path, 'eval', sphere_obj) == 0
    assert "W = " in capsys.readouterr().out
    frame = read_table(tmp_path / 'sphere_report.csv')
    assert list(frame.columns) == ['W', 'T', 'A', 'V', 'iso', 'intH']
    assert frame['W'][0] == pytest.approx(4.0 * math.pi, rel=2e-2)


def test_eval_open_mesh_fails_validation(tmp_path, capsys):
    path = tmp_path / 'triangle.obj'
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", encoding='utf-8')
    assert run(tmp_path, 'eval', str(path)) == 3
    diagnostics = json.loads(capsys.readouterr().err)
    assert diagnostics['is_closed'] is False


def test_eval_unreadable_mesh(tmp_path):
    broken = tmp_path / 'broken.obj'
    broken.write_text("v 0 0\nf 1 2 3\n", encoding='utf-8')
    assert run(tmp_path, 'eval', str(broken)) == 2
    assert run(tmp_path, 'eval', str(tmp_path / 'missing.obj')) == 2


def test_bad_config_file(tmp_path, sphere_obj):
    config = tmp_path / 'bad.ini'
    config.write_text("not an ini file\n", encoding='utf-8')
    assert main(['--config', str(config), 'eval', sphere_obj]) == 2


def test_construct_sphere_writes_mesh_and_report(tmp_path):
    assert run(tmp_path, 'construct', 'sphere', '--subdivisions', '2') == 0
    assert (tmp_path / 'sphere.obj').exists()
    payload = json.loads((tmp_path / 'sphere_report.json').read_text(encoding='utf-8'))
    assert payload['kind'] == 'sphere'
    assert payload['predicted_W'] == pytest.approx(4.0 * math.pi)


def test_construct_bridge_below_threshold(tmp_path):
    assert run(tmp_path, 'construct', 'gamma', '--t', '0.3') == 4


def test_construct_glue(tmp_path):
    assert run(tmp_path, 'construct', 'glue', '--alpha', '1e-3') == 0
    payload = json.loads((tmp_path / 'glue_report.json').read_text(encoding='utf-8'))
    assert payload['connected_sum']['energy_decreases'] is True
    assert (tmp_path / 'glue_annulus.csv').exists()


def test_flow_without_convergence_keeps_its_trace(tmp_path):
    mesh_path = str(write_obj(perturbed_sphere(2, noise=0.03, seed=0), tmp_path / 'seed.obj'))
    assert run(tmp_path, 'flow', mesh_path, '--R', '7.5', '--max-iters', '1') == 5
    trace = read_table(tmp_path / 'flow_trace.csv')
    assert list(trace.columns) == TRACE_COLUMNS
    assert (tmp_path / 'flow_final.obj').exists()


def test_flow_rejects_unknown_json_keys(tmp_path, sphere_obj):
    flow_config = tmp_path / 'flow.json'
    flow_config.write_text(json.dumps({'speed': 1}), encoding='utf-8')
    assert run(tmp_path, 'flow', sphere_obj, '--flow-config', str(flow_config)) == 2


def test_sweep_needs_a_mesh(tmp_path):
    assert run(tmp_path, 'sweep', 'blowdown') == 4


def test_theta_window_sweep(tmp_path):
    assert run(tmp_path, 'sweep', 'theta-window', '--count', '20', '--seed', '3') == 0
    frame = read_table(tmp_path / 'sweep_theta-window.csv')
    assert len(frame) == 20
    assert {'intH', 'A', 'W', 'T'} <= set(frame.columns)


@pytest.fixture
def torus_obj(tmp_path):
    return str(write_obj(build_torus(math.sqrt(2.0), 1.0, 32, 32), tmp_path / 'torus.obj'))


def test_construct_sigma_with_a_handle(tmp_path):
    assert run(tmp_path, 'construct', 'sigma', '--t', '3', '--genus', '1', '--variant', '2') == 0
    payload = json.loads((tmp_path / 'sigma_report.json').read_text(encoding='utf-8'))
    assert payload['genus'] == 1
    assert payload['variant'] == 2
    assert payload['reference_T'] == pytest.approx(math.sqrt(32.0 * math.pi))
    assert validate(read_obj(tmp_path / 'sigma.obj')).genus == 1


def test_construct_humps_has_negative_total_mean_curvature(tmp_path):
    assert run(tmp_path, 'construct', 'humps', '--n', '20', '--R', '8') == 0
    payload = json.loads((tmp_path / 'humps_report.json').read_text(encoding='utf-8'))
    assert payload['profile']['intH'] < 0
    assert payload['profile']['W'] >= 6.0 * math.pi
    assert (tmp_path / 'humps_profile.csv').exists()


def test_construct_bridge_reports_predicted_energy(tmp_path):
    assert run(tmp_path, 'construct', 'bridge', '--t', '2') == 0
    payload = json.loads((tmp_path / 'bridge_report.json').read_text(encoding='utf-8'))
    assert payload['kind'] == 'bridge'
    assert payload['predicted_W'] == pytest.approx(predicted_gamma_energy(2.0))


def test_sweep_blowdown_on_a_torus(tmp_path, torus_obj, capsys):
    assert run(tmp_path, 'sweep', 'blowdown', '--mesh', torus_obj, '--radii', '8,16,32') == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary['kind'] == 'blowdown'
    frame = read_table(tmp_path / 'sweep_blowdown.csv')
    assert list(frame.columns) == ['param', 'T', 'W', 'error_flag']
    assert len(frame) == 3
    assert np.all(np.isfinite(frame['W']))


def test_sweep_blowup_on_a_torus(tmp_path, torus_obj):
    assert run(tmp_path, 'sweep', 'blowup', '--mesh', torus_obj, '--t-values', '0.5,0.25') == 0
    frame = read_table(tmp_path / 'sweep_blowup.csv')
    assert len(frame) == 2
    assert sorted(frame['param'].tolist()) == [0.25, 0.5]


def test_sweep_beta0_writes_a_table(tmp_path):
    assert run(tmp_path, 'sweep', 'beta0', '--grid', '7.2', '--seeds', '1') == 0
    frame = read_table(tmp_path / 'sweep_beta0.csv')
    assert list(frame.columns) == BETA0_COLUMNS
    assert frame['best_W'][0] >= frame['W_floor'][0] - 1e-8


def test_flow_rejects_a_nonpositive_step(tmp_path, sphere_obj):
    config = tmp_path / 'bad_step.ini'
    config.write_text("[flow]\nstep = 0\n", encoding='utf-8')
    assert main(['--config', str(config), '--output-dir', str(tmp_path), '--quiet', 'flow', sphere_obj]) == 4


def test_sweep_output_does_not_depend_on_jobs(tmp_path, torus_obj):
    serial, threaded = tmp_path / 'serial', tmp_path / 'threaded'
    for directory, jobs in ((serial, '1'), (threaded, '2')):
        assert run(directory, 'sweep', 'blowdown', '--mesh', torus_obj, '--radii', '8,16,32,64', '--jobs', jobs) == 0
    assert (serial / 'sweep_blowdown.csv').read_bytes() == (threaded / 'sweep_blowdown.csv').read_bytes()
