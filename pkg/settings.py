# settings.py

import configparser
import logging
import os
from pathlib import Path
from typing import Dict, Optional, Union

from geometry_errors import MeshParseError

log = logging.getLogger(__name__)

VERSION = "1.0.0"
OUTPUT_DIR_ENV = "WILLMORE_OUTPUT_DIR"

DEFAULT_SETTINGS: Dict[str, Dict[str, str]] = {
    'logging': {
        'level': 'INFO',
    },
    'mesh': {
        'max_subdivisions': '8',
        'degenerate_tolerance': '1e-12',
    },
    'mobius': {
        'hard_clearance': '1e-9',
        'sweep_clearance': '1e-6',
        'refine_levels_per_halving': '1',
        'refine_radius_factor': '4.0',
        'match_scan_points': '24',
        'match_max_iterations': '60',
        'match_tolerance': '1e-3',
    },
    'axisym': {
        'unit_speed_tolerance': '1e-5',
        'arc_angle_step': '0.02',
        'line_step': '0.01',
        'window_tolerance': '1e-9',
        'random_suite_count': '1000',
        'random_suite_seed': '7',
    },
    'constructions': {
        'eps_handle': 'auto',
        'footprint_factor': '1.15',
        'handle_cone_margin': '0.05',
        'n_phi': '64',
        'bump_cells': '12',
        'bump_radius': '0.3',
        'bump_amplitude': '0.6',
        'host_depth': '0.25',
        'sigma_grading': '0.3',
        'max_background_points': '12000',
        'max_copies': '64',
        't_tolerance': '1e-2',
        'condition_limit': '1e14',
    },
    'gluing': {
        'gamma': '0.3',
        't_ratio': '4.0',
        'far_radius': '2.0',
        'graph_radius': '0.5',
        'inner_samples': '60',
        'strip_samples': '41',
        'middle_samples': '121',
        'outer_samples': '80',
        'theta_samples': '64',
        'taylor_limit': '1e6',
    },
    'flow': {
        'target_R': '7.2',
        'step': '0.5',
        'max_iters': '400',
        'constraint_tolerance': '1e-3',
        'residual_tolerance': '1e-2',
        'tangential_smoothing_weight': '0.2',
        'smoothing_interval': '5',
        'area_renormalize': 'true',
        'sobolev_weight': '1.0',
        'armijo': '1e-4',
        'max_line_search_failures': '30',
        'min_angle_degrees': '1.0',
        'restoration_max_steps': '20',
        'basis_size': '25',
        'fd_step': '1e-5',
    },
    'output': {
        'directory': 'output',
    },
}


def default_config() -> configparser.ConfigParser:
    config = configparser.ConfigParser()
    config.optionxform = str
    config.read_dict(DEFAULT_SETTINGS)
    return config


def load_config(path: Optional[Union[str, Path]] = 'config.ini') -> configparser.ConfigParser:
    """
    Reads the defaults first and then overlays the ini file, if there is one.
    """
    config = default_config()
    if path is None:
        return config
    config_path = Path(path)
    if not config_path.exists():
        log.warning(f"⚠️ Configuration file '{config_path}' not found, using built-in defaults.")
        return config
    try:
        config.read(config_path, encoding='utf-8')
    except configparser.Error as e:
        raise MeshParseError(f"Could not parse configuration '{config_path}': {e}") from e
    log.debug(f"Configuration loaded from '{config_path}'.")
    return config


def get_float(config: Optional[configparser.ConfigParser], section: str, key: str) -> float:
    fallback = float(DEFAULT_SETTINGS[section][key])
    if config is None:
        return fallback
    return config.getfloat(section, key, fallback=fallback)


def get_int(config: Optional[configparser.ConfigParser], section: str, key: str) -> int:
    fallback = int(DEFAULT_SETTINGS[section][key])
    if config is None:
        return fallback
    return config.getint(section, key, fallback=fallback)


def get_bool(config: Optional[configparser.ConfigParser], section: str, key: str) -> bool:
    fallback = DEFAULT_SETTINGS[section][key].lower() in ('1', 'true', 'yes', 'on')
    if config is None:
        return fallback
    return config.getboolean(section, key, fallback=fallback)


def get_str(config: Optional[configparser.ConfigParser], section: str, key: str) -> str:
    fallback = DEFAULT_SETTINGS[section][key]
    if config is None:
        return fallback
    return config.get(section, key, fallback=fallback)


def output_directory(config: Optional[configparser.ConfigParser] = None) -> Path:
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        return Path(env_dir)
    return Path(get_str(config, 'output', 'directory'))
