# table_io.py

import configparser
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from geometry_errors import MeshParseError
from settings import VERSION

log = logging.getLogger(__name__)


def _config_snapshot(config: Optional[Union[configparser.ConfigParser, Dict[str, Any]]]) -> Dict[str, Any]:
    if config is None:
        return {}
    if isinstance(config, configparser.ConfigParser):
        return {section: dict(config.items(section)) for section in config.sections()}
    return dict(config)


def order_columns(columns: Sequence[str], preferred_order: Sequence[str]) -> List[str]:
    return sorted(columns, key=lambda x: list(preferred_order).index(x) if x in preferred_order
                  else len(preferred_order))


def write_table(frame: pd.DataFrame, path: Union[str, Path], preferred_order: Sequence[str] = (),
                config: Optional[Any] = None) -> Path:
    """
    Writes a CSV with a leading comment line carrying the config and version.
    Floats are written with 12 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = frame[order_columns(list(frame.columns), preferred_order)]
    comment = f"# config={json.dumps(_config_snapshot(config), sort_keys=True)} version={VERSION}\n"
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(comment)
        frame.to_csv(f, index=False, float_format='%.12g', lineterminator='\n')
    log.info(f"✅ Wrote {len(frame)} rows to '{path.name}'.")
    return path


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path, comment='#')
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise MeshParseError(f"Could not read table '{path}': {e}") from e


def _round_floats(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    if isinstance(value, np.ndarray):
        return _round_floats(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.12g}")
    return value


def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n", encoding='utf-8')
    log.info(f"  - Wrote report '{path.name}'")
    return path


def to_json_text(payload: Dict[str, Any]) -> str:
    return json.dumps(_round_floats(payload), indent=2, sort_keys=True)
