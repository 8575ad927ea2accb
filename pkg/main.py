# main.py

import argparse
import configparser
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from axisym import (
    axisym_functionals,
    make_hump_stack_curve,
    make_slope_counterexample_curve,
    read_profile,
    run_theta_window_suite,
    write_profile,
)
from biharmonic_gluing import (
    ConnectedSumParams,
    SCALING_COLUMNS,
    annulus_grid_frame,
    connected_sum_report,
    connected_sum_scaling,
    glued_graph_region,
)
from constructions import (
    BumpProfile,
    PatchHost,
    bump_graph_surface,
    build_gamma_t,
    build_sigma_g,
    catenoid_bridge_params,
    predicted_gamma_energy,
    predicted_sigma_energy,
    solve_T_for_target,
)
from functionals import REPORT_COLUMNS, FunctionalReport, functional_report
from geometry_errors import GeometryError, MeshValidationError, NonConvergenceError, PreconditionError
from mobius import SweepSettings, blow_down_sweep, blow_up_sweep
from optimizer import BETA0_COLUMNS, TRACE_COLUMNS, FlowConfig, estimate_beta0, run_flow
from settings import get_float, get_int, get_str, load_config, output_directory
from surface_mesh import TriangleMesh, build_icosphere, build_torus, read_obj, revolve_profile, validate, write_obj
from table_io import to_json_text, write_json, write_table

# Module level logger
log = logging.getLogger(__name__)

SPHERE_T = 4.0 * math.sqrt(math.pi)
BRIDGE_T = math.sqrt(32.0 * math.pi)


def parse_grid(text: str) -> List[float]:
    """
    Comma list ("7.2,7.6"), linear range ("a:b:N"), geometric range
    ("a:b:N:geom") or doubling range ("a:b:geom").
    """
    try:
        if ':' not in text:
            return [float(v) for v in text.split(',') if v.strip()]
        parts = text.split(':')
        start, stop = float(parts[0]), float(parts[1])
        if len(parts) == 3 and parts[2] == 'geom':
            if start <= 0 or stop <= start:
                raise ValueError("doubling range needs 0 < start < stop")
            count = int(math.floor(math.log2(stop / start) + 1e-9)) + 1
            return [start * 2 ** k for k in range(count)]
        count = int(parts[2])
        if count < 1:
            raise ValueError("range needs at least one point")
        if len(parts) == 4 and parts[3] == 'geom':
            return [float(v) for v in np.geomspace(start, stop, count)]
        if len(parts) == 3:
            return [float(v) for v in np.linspace(start, stop, count)]
        raise ValueError("unknown range form")
    except (ValueError, IndexError) as e:
        raise argparse.ArgumentTypeError(f"Bad grid '{text}': {e}")


def parse_matrix(text: str) -> np.ndarray:
    """'a,b,c' is the symmetric 2x2 matrix [[a, b], [b, c]]."""
    try:
        a, b, c = (float(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Bad matrix '{text}': expected three numbers a,b,c.")
    return np.array([[a, b], [b, c]])


def _output_path(args: argparse.Namespace, config: configparser.ConfigParser, name: str) -> Path:
    base = Path(args.output_dir) if getattr(args, 'output_dir', None) else output_directory(config)
    return base / name


def _print_report(report: FunctionalReport) -> None:
    for key, value in report.to_row().items():
        print(f"{key:>5} = {value:.12g}")


def _load_mesh(path: str, config: configparser.ConfigParser) -> TriangleMesh:
    mesh = read_obj(path)
    diagnostics = validate(mesh, get_float(config, 'mesh', 'degenerate_tolerance'))
    if not diagnostics.passes:
        raise MeshValidationError(f"Mesh '{Path(path).name}' failed validation.", diagnostics)
    return mesh


# --- Subcommands ---

def cmd_eval(args: argparse.Namespace, config: configparser.ConfigParser) -> Dict[str, Any]:
    path = Path(args.path)
    log.info(f"--- Evaluating '{path.name}' ---")
    if path.suffix.lower() == '.csv':
        curve = read_profile(path)
        report = axisym_functionals(curve, get_float(config, 'axisym', 'unit_speed_tolerance'))
        row = report.to_dict()
        for key, value in row.items():
            print(f"{key:>9} = {value:.12g}")
    else:
        mesh = _load_mesh(str(path), config)
        report = functional_report(mesh)
        _print_report(report)
        row = report.to_row()
    write_table(pd.DataFrame([row]), _output_path(args, config, f"{path.stem}_report.csv"), REPORT_COLUMNS, config)
    log.info(f"✅ Evaluated '{path.name}'.")
    return row


def _construct_mesh(args: argparse.Namespace, config: configparser.ConfigParser):
    """Returns (mesh, report extras, optional profile curve) for the requested kind."""
    kind = args.kind
    n_phi = args.n_phi or get_int(config, 'constructions', 'n_phi')
    if kind in ('gamma', 'bridge'):
        mesh = build_gamma_t(args.t, n_phi=n_phi)
        extras = {'params': catenoid_bridge_params(args.t).to_dict(),
                  'predicted_W': predicted_gamma_energy(args.t), 'reference_T': SPHERE_T * math.sqrt(2.0)}
        return mesh, extras, None
    if kind == 'sigma':
        mesh = build_sigma_g(args.t, g=args.genus, variant=args.variant, eps_handle=args.eps, config=config)
        extras = {'params': catenoid_bridge_params(args.t).to_dict(),
                  'predicted_W': predicted_sigma_energy(args.t, args.genus),
                  'reference_T': BRIDGE_T if args.variant == 2 else 0.0,
                  'genus': args.genus, 'variant': args.variant}
        return mesh, extras, None
    if kind == 'bump':
        host, u = PatchHost.from_config(config), BumpProfile.from_config(config)
        if args.target is not None:
            solution = solve_T_for_target(host, u, args.target, config)
            extras = {'n': solution.n, 't_amp': solution.t_amp, 'target_T': solution.target_T,
                      'achieved_T': solution.achieved_T, 'evaluations': solution.evaluations}
            return solution.mesh, extras, None
        mesh = bump_graph_surface(host.mesh_for(args.n), u, args.n, args.t_amp)
        return mesh, {'n': args.n, 't_amp': args.t_amp}, None
    if kind in ('humps', 'slope'):
        if kind == 'humps':
            curve = make_hump_stack_curve(args.n, args.R, config)
        else:
            curve = make_slope_counterexample_curve(args.eps or 0.1, args.delta, config)
        mesh = revolve_profile(curve, n_phi)
        return mesh, {'profile': axisym_functionals(curve).to_dict()}, curve
    if kind == 'sphere':
        mesh = build_icosphere(args.subdivisions, max_subdivisions=get_int(config, 'mesh', 'max_subdivisions'))
        return mesh, {'predicted_W': 4.0 * math.pi, 'reference_T': SPHERE_T}, None
    if kind == 'torus':
        mesh = build_torus(args.major, args.minor, args.n_u, args.n_v)
        return mesh, {'predicted_W': 2.0 * math.pi ** 2 if abs(args.major - math.sqrt(2.0) * args.minor) < 1e-12 else None}, None
    raise PreconditionError(f"Unknown construction '{kind}'.")


def _construct_glue(args: argparse.Namespace, config: configparser.ConfigParser) -> Dict[str, Any]:
    params = ConnectedSumParams.from_config(args.P, args.Q, args.alpha, config, t_ratio=args.t_ratio, gamma=args.gamma)
    region = glued_graph_region(params, config=config)
    report = connected_sum_report(params, args.inverted_intH, args.area_f2, case=args.case)
    write_table(annulus_grid_frame(region), _output_path(args, config, 'glue_annulus.csv'), ['r', 'theta', 'w'], config)
    payload = {'kind': 'glue', 'region': region.report.to_dict(), 'integrals': region.summary(),
               'middle_coefficient_integral': region.middle_coefficient_integral,
               'two_beta_pi_e': region.two_beta_pi_e, 'connected_sum': report.to_dict()}
    write_json(payload, _output_path(args, config, 'glue_report.json'))
    return payload


def cmd_construct(args: argparse.Namespace, config: configparser.ConfigParser) -> Dict[str, Any]:
    log.info(f"--- Constructing '{args.kind}' ---")
    if args.kind == 'glue':
        payload = _construct_glue(args, config)
        log.info("✅ Glued region written.")
        return payload
    mesh, extras, curve = _construct_mesh(args, config)
    report = functional_report(mesh)
    obj_path = _output_path(args, config, f"{args.kind}.obj")
    write_obj(mesh, obj_path)
    if curve is not None:
        write_profile(curve, _output_path(args, config, f"{args.kind}_profile.csv"), config)
    payload = {'kind': args.kind, 'discrete': report.to_dict(), **extras}
    write_json(payload, _output_path(args, config, f"{args.kind}_report.json"))
    _print_report(report)
    log.info(f"✅ Wrote '{obj_path.name}' ({mesh.n_vertices} vertices).")
    return payload


def _flow_config(args: argparse.Namespace, config: configparser.ConfigParser) -> FlowConfig:
    overrides = {'target_R': args.R, 'max_iters': args.max_iters, 'step': args.step}
    if args.flow_config:
        return FlowConfig.from_json(args.flow_config, config, **overrides)
    return FlowConfig.from_config(config, **overrides)


def cmd_flow(args: argparse.Namespace, config: configparser.ConfigParser) -> Dict[str, Any]:
    cfg = _flow_config(args, config)
    mesh = _load_mesh(args.mesh, config)
    trace_path = _output_path(args, config, 'flow_trace.csv')
    mesh_path = _output_path(args, config, 'flow_final.obj')
    try:
        final_mesh, trace = run_flow(mesh, cfg, show_progress=not args.quiet)
    except NonConvergenceError as e:
        if e.trace is not None:
            write_table(e.trace.to_frame(), trace_path, TRACE_COLUMNS, config)
        if e.mesh is not None:
            write_obj(e.mesh, mesh_path)
        raise
    write_table(trace.to_frame(), trace_path, TRACE_COLUMNS, config)
    write_obj(final_mesh, mesh_path)
    final = trace.final
    if not trace.converged:
        raise NonConvergenceError(
            f"Flow did not reach residual {cfg.residual_tolerance} in {cfg.max_iters} iterations.", trace, final_mesh)
    print(f"W = {final.W:.12g}\nT = {final.T:.12g}\nlambda = {final.lam:.12g}\nresidual = {final.residual:.12g}")
    return {'W': final.W, 'T': final.T, 'lambda': final.lam, 'residual': final.residual}


def _require_rows(succeeded: int, label: str) -> None:
    if succeeded == 0:
        raise PreconditionError(f"No row of the {label} sweep succeeded.")


def cmd_sweep(args: argparse.Namespace, config: configparser.ConfigParser) -> Dict[str, Any]:
    kind = args.kind
    jobs = args.jobs
    show = not args.quiet
    out = _output_path(args, config, f"sweep_{kind}.csv")
    summary: Dict[str, Any] = {'kind': kind}
    if kind in ('blowdown', 'blowup'):
        if not args.mesh:
            raise PreconditionError(f"sweep {kind} needs --mesh.")
        mesh = _load_mesh(args.mesh, config)
        settings = SweepSettings.from_config(config)
        if kind == 'blowdown':
            radii = args.radii or parse_grid('8:256:geom')
            series = blow_down_sweep(mesh, args.direction, radii, settings, jobs, show)
        else:
            t_values = args.t_values or parse_grid('0.5:0.0625:4:geom')
            series = blow_up_sweep(mesh, args.vertex, t_values, settings, jobs, show)
        write_table(series.to_frame(), out, ['param', 'T', 'W', 'error_flag'], config)
        _require_rows(int(np.count_nonzero(series.ok_rows())), kind)
        summary.update({'exponent': series.exponent, 'reference_T': series.reference_T})
    elif kind == 'beta0':
        grid = args.grid or parse_grid('7.2,7.6,8.0,8.5')
        table = estimate_beta0(grid, args.seeds, config, genus=args.genus, jobs=jobs, show_progress=show)
        write_table(table.frame, out, BETA0_COLUMNS, config)
        _require_rows(int((~table.frame['error_flag']).sum()), kind)
        summary.update({'monotone': table.monotone, 'below_8pi': table.below_8pi})
    elif kind == 'strips':
        alphas = args.alphas or parse_grid('1e-2,1e-3,1e-4')
        params = ConnectedSumParams.from_config(args.P, args.Q, alphas[0], config, t_ratio=args.t_ratio,
                                                gamma=args.gamma)
        scaling = connected_sum_scaling(params, alphas, config=config, show_progress=show)
        write_table(scaling.frame, out, SCALING_COLUMNS, config)
        summary['exponents'] = scaling.exponents
    elif kind == 'theta-window':
        frame, violations = run_theta_window_suite(args.count, args.seed, config=config, show_progress=show)
        write_table(frame, out, ['seed', 'index', 'intH', 'A', 'W', 'T'], config)
        _require_rows(int((frame['error_flag'] == '').sum()), kind)
        summary['violations'] = violations
    else:
        raise PreconditionError(f"Unknown sweep '{kind}'.")
    print(to_json_text(summary))
    return summary


# --- Entry point ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='willmore-ratio-lab',
                                     description='Willmore energy and total mean curvature ratio experiments.')
    parser.add_argument('--config', default='config.ini', help='INI configuration file')
    parser.add_argument('--output-dir', help='directory for OBJ, CSV and JSON outputs')
    parser.add_argument('--verbose', action='store_true')
    parser.add_argument('--quiet', action='store_true', help='hide progress bars')
    sub = parser.add_subparsers(dest='command', required=True)

    p_eval = sub.add_parser('eval', help='functionals of an OBJ mesh or a profile CSV')
    p_eval.add_argument('path')

    p_con = sub.add_parser('construct', help='build an explicit surface')
    p_con.add_argument('kind', choices=['gamma', 'bridge', 'sigma', 'bump', 'humps', 'slope', 'sphere', 'torus', 'glue'])
    p_con.add_argument('--t', type=float, default=2.0)
    p_con.add_argument('--genus', type=int, default=0)
    p_con.add_argument('--variant', type=int, default=1, choices=[1, 2])
    p_con.add_argument('--eps', type=float)
    p_con.add_argument('--n', type=int, default=1)
    p_con.add_argument('--t-amp', type=float, default=1.0)
    p_con.add_argument('--target', type=float)
    p_con.add_argument('--R', type=float, default=8.0)
    p_con.add_argument('--delta', type=float, default=0.05)
    p_con.add_argument('--n-phi', type=int)
    p_con.add_argument('--subdivisions', type=int, default=3)
    p_con.add_argument('--major', type=float, default=math.sqrt(2.0))
    p_con.add_argument('--minor', type=float, default=1.0)
    p_con.add_argument('--n-u', type=int, default=64)
    p_con.add_argument('--n-v', type=int, default=64)
    _add_gluing_arguments(p_con)
    p_con.add_argument('--inverted-intH', type=float, default=1.0)
    p_con.add_argument('--area-f2', type=float, default=1.0)
    p_con.add_argument('--case', type=int, default=1, choices=[1, 2])

    p_flow = sub.add_parser('flow', help='constrained Willmore flow')
    p_flow.add_argument('mesh')
    p_flow.add_argument('--flow-config', help='JSON flow configuration')
    p_flow.add_argument('--R', type=float)
    p_flow.add_argument('--max-iters', type=int)
    p_flow.add_argument('--step', type=float)

    p_sweep = sub.add_parser('sweep', help='parameter sweeps written as CSV')
    p_sweep.add_argument('kind', choices=['blowdown', 'blowup', 'beta0', 'strips', 'theta-window'])
    p_sweep.add_argument('--mesh')
    p_sweep.add_argument('--radii', type=parse_grid)
    p_sweep.add_argument('--direction', type=lambda s: [float(v) for v in s.split(',')], default=[1.0, 0.3, 0.2])
    p_sweep.add_argument('--vertex', type=int, default=0)
    p_sweep.add_argument('--t-values', type=parse_grid)
    p_sweep.add_argument('--grid', type=parse_grid)
    p_sweep.add_argument('--seeds', type=int, default=3)
    p_sweep.add_argument('--genus', type=int, default=0)
    p_sweep.add_argument('--alphas', type=parse_grid)
    p_sweep.add_argument('--count', type=int)
    p_sweep.add_argument('--seed', type=int)
    p_sweep.add_argument('--jobs', type=int, default=1)
    _add_gluing_arguments(p_sweep)
    return parser


def _add_gluing_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--P', type=parse_matrix, default=parse_matrix('1.5,0,-0.5'))
    parser.add_argument('--Q', type=parse_matrix, default=parse_matrix('2,0,0'))
    parser.add_argument('--alpha', type=float, default=1e-3)
    parser.add_argument('--t-ratio', type=float)
    parser.add_argument('--gamma', type=float)


def setup_logging(config: configparser.ConfigParser, verbose: bool = False) -> None:
    root_logger = logging.getLogger()
    level_name = 'DEBUG' if verbose else get_str(config, 'logging', 'level').upper()
    root_logger.setLevel(getattr(logging, level_name, logging.INFO))

    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)


COMMANDS = {'eval': cmd_eval, 'construct': cmd_construct, 'flow': cmd_flow, 'sweep': cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except GeometryError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    setup_logging(config, args.verbose)

    try:
        COMMANDS[args.command](args, config)
    except MeshValidationError as e:
        log.error(f"❌ {e}")
        if e.diagnostics is not None:
            print(e.diagnostics.to_json(), file=sys.stderr)
        return e.exit_code
    except GeometryError as e:
        log.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    # noinspection PyBroadException
    except Exception as e:
        log.error(f"An unhandled error occurred: {e}", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
