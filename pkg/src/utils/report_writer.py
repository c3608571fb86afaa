"""
Report Writer
Atomic CSV/JSON persistence for reports and exports
"""

import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.15g'


def _atomic_write_bytes(path: Path, payload: bytes) -> Path:
    """Write to a temp file in the target directory, then rename over"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(payload)
        os.replace(tmp_name, path)
    except Exception:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise

    logger.debug("wrote %s (%d bytes)", path, len(payload))
    return path


def jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: Union[str, Path], data: Dict[str, Any]) -> Path:
    """Write a JSON summary atomically (non-finite floats become null)"""
    text = json.dumps(jsonable(data), indent=2, ensure_ascii=False, sort_keys=False)
    return _atomic_write_bytes(Path(path), (text + "\n").encode('utf-8'))


def frame_to_csv_text(frame: pd.DataFrame, header_lines: Optional[Sequence[str]] = None) -> str:
    """Render a frame as CSV text preceded by '#' comment lines"""
    lines = [f"# {line}" for line in (header_lines or [])]
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return "\n".join(lines + [body]) if lines else body


def write_csv(path: Union[str, Path], frame: pd.DataFrame,
              header_lines: Optional[Sequence[str]] = None) -> Path:
    """Write a CSV report atomically"""
    text = frame_to_csv_text(frame, header_lines)
    return _atomic_write_bytes(Path(path), text.encode('utf-8'))


def write_bytes(path: Union[str, Path], payload: bytes) -> Path:
    return _atomic_write_bytes(Path(path), payload)


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by write_csv (comment lines skipped)"""
    return pd.read_csv(str(path), comment='#')


def records_frame(records: List[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    frame = pd.DataFrame.from_records(records)
    if columns is not None:
        frame = frame.reindex(columns=list(columns))
    return frame
