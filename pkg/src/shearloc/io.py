"""CSV / JSON artifact I/O with 17-significant-digit floats and schema checks."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import MissingArtifact, ShearlocError

SCHEMAS = {
    "orbit": ("eta", "p", "q", "r", "s"),
    "profiles": ("xi", "Gamma", "V", "Theta", "Sigma", "U"),
    "snapshot": ("x", "v", "u", "theta", "sigma", "gamma"),
}


class SchemaError(ShearlocError):
    """An artifact does not match its declared layout."""


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header, data) -> Path:
    path = Path(path)
    data = np.asarray(data, dtype=float)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in data]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path, schema: str | None = None):
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"{path} not found")
    with path.open() as fh:
        header = tuple(fh.readline().strip().split(","))
    if schema is not None and header != SCHEMAS[schema]:
        raise SchemaError(f"{path}: header {header} != {SCHEMAS[schema]}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def validate_csv(path, schema: str) -> int:
    """Check header, column count and finiteness; returns the row count."""
    header, data = read_csv(path, schema)
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: {data.shape[1]} columns, expected {len(header)}")
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: non-finite entries")
    return data.shape[0]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj, **kw) -> str:
    return json.dumps(_clean(obj), sort_keys=True, **kw)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj, indent=2) + "\n")
    json.loads(path.read_text())
    return path


def append_jsonl(path, obj) -> None:
    with Path(path).open("a") as fh:
        fh.write(dumps(obj) + "\n")


def validate_jsonl(path, required=("c", "residual", "iterations")) -> int:
    n = 0
    for line in Path(path).read_text().splitlines():
        rec = json.loads(line)
        missing = [k for k in required if k not in rec]
        if missing:
            raise SchemaError(f"{path}: record {n} lacks {missing}")
        n += 1
    return n
