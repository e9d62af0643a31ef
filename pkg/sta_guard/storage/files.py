"""
Result file persistence for STA Guard.
CSV and JSON outputs are written to a temporary file in the target directory
and renamed into place, so a failed run never leaves a partial file behind.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd
from pydantic import BaseModel

from sta_guard.errors import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")
    return path


def frame_to_csv(frame: pd.DataFrame) -> str:
    """Header row, 17 significant digits, LF line endings"""
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    return atomic_write_text(path, frame_to_csv(frame))


def to_json(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}")


def frame_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    """JSON-safe rows; NaN becomes null"""
    return frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
