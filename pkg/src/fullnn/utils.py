from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def sha256_array(values: np.ndarray) -> str:
    """Checksum of a float array as little-endian float64 bytes."""
    raw = np.ascontiguousarray(values, dtype="<f8").tobytes()
    return hashlib.sha256(raw).hexdigest()


def format_float(value: float, digits: int = 17) -> str:
    return f"{float(value):.{digits}g}"


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=False), encoding="utf-8")


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
