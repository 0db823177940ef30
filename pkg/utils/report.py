"""
Tabular output helpers.

Every CSV starts with a comment line naming the package version and the config
hash, so a file can always be traced back to the run that produced it. Output is
byte-stable for identical inputs.
"""

import os
import json
import logging
from typing import Any, Optional

import numpy as np
import pandas as pd

from physics import __version__
from utils.config import RunConfig

logger = logging.getLogger(__name__)

PACKAGE_NAME = "qd-spin-optics"
FLOAT_FORMAT = '%.10g'

pd.set_option('display.float_format', lambda x: '%.6f' % x)
pd.set_option('display.width', 160)


def header_line(config: Optional[RunConfig]) -> str:
    digest = config.config_hash() if config is not None else "none"
    return f"# {PACKAGE_NAME} {__version__} config={digest}\n"


def _prepare(path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def write_csv(df: pd.DataFrame, path: str, config: Optional[RunConfig] = None) -> str:
    _prepare(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(header_line(config))
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"wrote {len(df)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return None if not np.isfinite(v) else float(FLOAT_FORMAT % v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(record: dict, path: str, config: Optional[RunConfig] = None) -> str:
    _prepare(path)
    payload = {
        'package': PACKAGE_NAME,
        'version': __version__,
        'config': config.config_hash() if config is not None else None,
        'result': _jsonable(record),
    }
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(json.dumps(payload, sort_keys=True, indent=2))
        f.write('\n')
    logger.info(f"wrote {path}")
    return path


def print_frame(title: str, df: pd.DataFrame) -> None:
    print("-" * 30, title, "-" * 30)
    print(df.to_string(index=False))
