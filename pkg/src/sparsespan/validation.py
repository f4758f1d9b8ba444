"""Input validation helpers.

Every public entry point funnels its array arguments through these checks
so that downstream numerics can assume finite float64 data of the right
shape.
"""

from __future__ import annotations

import numpy as np


def check_vector(x, name: str = "x", min_len: int = 1) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array of length >= ``min_len``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise ValueError(f"{name} must have length >= {min_len}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_matrix(A, name: str = "A", min_cols: int = 1) -> np.ndarray:
    """Coerce ``A`` to a finite 2-D float64 array with >= ``min_cols`` columns."""
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} must have at least one row")
    if arr.shape[1] < min_cols:
        raise ValueError(f"{name} must have at least {min_cols} column(s)")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_index(i, n: int, name: str = "i") -> int:
    """Validate a 0-based coordinate index against dimension ``n``."""
    idx = int(i)
    if idx != i:
        raise ValueError(f"{name} must be an integer, got {i!r}")
    if not 0 <= idx < n:
        raise ValueError(f"{name} must be in [0, {n}), got {idx}")
    return idx


def check_support(S, n: int, name: str = "S") -> np.ndarray:
    """Validate an index set: distinct 0-based indices, returned sorted."""
    arr = np.asarray(S, dtype=np.intp)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D index set")
    if arr.min() < 0 or arr.max() >= n:
        raise ValueError(f"{name} has indices outside [0, {n})")
    arr = np.sort(arr)
    if np.any(arr[1:] == arr[:-1]):
        raise ValueError(f"{name} contains duplicate indices")
    return arr
