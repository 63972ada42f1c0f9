"""
Reporting Module
CSV tables and JSON run summaries

CSV: `,` separator, `.` decimal, LF line endings, header row always present.
JSON: sorted keys, two-space indent, trailing newline. The wall time is only
written when requested so that default outputs are byte-reproducible.
"""
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from config.settings import version_string
from experiments.estimators import TrialEstimate

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.10g'


def write_csv(frame: pd.DataFrame, path: Optional[Union[str, Path]] = None) -> None:
    """
    Write a table as CSV

    Args:
        frame: Table to write
        path: Destination file; stdout when None
    """
    text = frame.to_csv(index=False, lineterminator='\n', float_format=FLOAT_FORMAT)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info(f"Wrote {len(frame)} rows to {path}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, TrialEstimate):
        return value.to_dict()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, pd.DataFrame):
        return value.to_dict(orient='records')
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, 'value') and isinstance(getattr(value, 'value'), str):
        return value.value
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def build_summary(config: Dict[str, Any], results: Dict[str, Any],
                  wall_time: Optional[float] = None) -> Dict[str, Any]:
    """Config echo, version and results; wall_time only when given"""
    summary = {
        'config': config,
        'version': version_string(),
        'results': results,
    }
    if wall_time is not None:
        summary['wall_time_seconds'] = round(wall_time, 3)
    return summary


def write_summary(path: Union[str, Path], config: Dict[str, Any], results: Dict[str, Any],
                  wall_time: Optional[float] = None) -> None:
    """Write the JSON run summary"""
    summary = build_summary(config, results, wall_time)
    text = json.dumps(summary, default=_jsonable, sort_keys=True, indent=2)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text + '\n')
    logger.info(f"Wrote summary to {path}")
