"""Dense float64 matrix helpers.

A "matrix" here is a C-contiguous 2-D ``np.float64`` array. The helpers add
the shape checks and JSON form the rest of the package relies on; the
arithmetic itself is numpy.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ShapeError


def as_matrix(values, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``values`` into a finite float64 matrix.

    Flat input requires ``rows`` and ``cols``; nested input may omit them.
    """
    arr = np.array(values, dtype=np.float64)
    if rows is not None or cols is not None:
        if rows is None or cols is None:
            raise ShapeError("rows and cols must be given together")
        if rows < 0 or cols < 0:
            raise ShapeError(f"negative shape ({rows}, {cols})")
        if arr.size != rows * cols:
            raise ShapeError(f"{arr.size} values cannot fill a {rows}x{cols} matrix")
        arr = arr.reshape(rows, cols)
    elif arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix values must be finite")
    return np.ascontiguousarray(arr)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def softmax_rows(a: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return a.copy()
    shifted = a - a.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def mean_over_stack(ms: Sequence[np.ndarray]) -> np.ndarray:
    if len(ms) == 0:
        raise ValueError("mean_over_stack needs at least one matrix")
    first = np.asarray(ms[0], dtype=np.float64)
    for m in ms[1:]:
        if np.shape(m) != first.shape:
            raise ShapeError(f"shape mismatch: {np.shape(m)} vs {first.shape}")
    # running mean: k identical inputs return the input bit-for-bit
    mean = first.copy()
    for k, m in enumerate(ms[1:], start=2):
        mean += (np.asarray(m, dtype=np.float64) - mean) / k
    return mean


def dot(u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch: {u.size} vs {v.size}")
    return float(u @ v)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError("only 2-D matrices serialise")
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "values": m.ravel().tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, values = obj["rows"], obj["cols"], obj["values"]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed matrix object: {exc}") from None
    return as_matrix(values, rows=int(rows), cols=int(cols))
