"""Small input-validation helpers used by the estimator, the service and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError


def require_finite(**named_values) -> None:
    """Raise InvalidInputError if any named scalar is missing or not finite."""
    for name, value in named_values.items():
        if value is None:
            raise InvalidInputError(f"{name} is missing")
        try:
            ok = math.isfinite(float(value))
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise InvalidInputError(f"{name} must be a finite number, got {value!r}")


def require_positive(**named_values) -> None:
    require_finite(**named_values)
    for name, value in named_values.items():
        if float(value) <= 0.0:
            raise InvalidInputError(f"{name} must be > 0, got {value!r}")


def as_matrix(values, n_cols: int, name: str = "X") -> np.ndarray:
    """Coerce to a finite float64 matrix with n_cols columns.

    A single row may be passed as a 1-D sequence of length n_cols.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != n_cols:
        raise InvalidInputError(
            f"{name} must have {n_cols} columns, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidInputError(
            f"{name} contains a non-finite value at row {bad[0]}, column {bad[1]}"
        )
    return arr
