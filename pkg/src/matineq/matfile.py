"""JSON matrix files.

Schema::

    {"dims": [rows, cols], "field": "real" | "complex",
     "re": [row-major real parts], "im": [row-major imaginary parts]}

``im`` is omitted for real matrices. Floats are written with Python's
shortest round-trip repr, so save -> load is exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import MatIneqError


class MatrixFileError(MatIneqError, ValueError):
    pass


def to_dict(M: ArrayLike) -> dict[str, Any]:
    M = np.asarray(M)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise MatrixFileError(f"expected a matrix, got shape {M.shape}")
    out: dict[str, Any] = {"dims": [int(M.shape[0]), int(M.shape[1])]}
    if np.iscomplexobj(M) and np.any(M.imag != 0):
        out["field"] = "complex"
        out["re"] = [float(x) for x in M.real.ravel()]
        out["im"] = [float(x) for x in M.imag.ravel()]
    else:
        out["field"] = "real"
        out["re"] = [float(x) for x in np.real(M).ravel()]
    return out


def _numbers(d: dict, key: str, size: int, where: str) -> list[float]:
    vals = d.get(key)
    if not isinstance(vals, list):
        raise MatrixFileError(f"{where}: field {key!r} must be a list")
    if len(vals) != size:
        raise MatrixFileError(f"{where}: field {key!r} has {len(vals)} entries, expected {size}")
    for k, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise MatrixFileError(f"{where}: {key}[{k}] is not a finite number: {v!r}")
    return vals


def from_dict(d: Any, where: str = "matrix") -> NDArray:
    if not isinstance(d, dict):
        raise MatrixFileError(f"{where}: expected a JSON object")
    dims = d.get("dims")
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in dims)):
        raise MatrixFileError(f"{where}: 'dims' must be [rows, cols] with positive integers")
    field = d.get("field", "real")
    if field not in ("real", "complex"):
        raise MatrixFileError(f"{where}: 'field' must be 'real' or 'complex', got {field!r}")
    rows, cols = dims
    re = np.array(_numbers(d, "re", rows * cols, where), dtype=float).reshape(rows, cols)
    if field == "real":
        if "im" in d:
            raise MatrixFileError(f"{where}: real matrix must not carry 'im'")
        return re
    im = np.array(_numbers(d, "im", rows * cols, where), dtype=float).reshape(rows, cols)
    return re + 1j * im


def dumps(M: ArrayLike) -> str:
    return json.dumps(to_dict(M))


def loads(text: str, where: str = "matrix") -> NDArray:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{where}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_dict(d, where)


def save(path: str | Path, M: ArrayLike) -> None:
    Path(path).write_text(dumps(M) + "\n")


def load(path: str | Path) -> NDArray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFileError(f"{path}: {exc.strerror or exc}") from exc
    return loads(text, str(path))
