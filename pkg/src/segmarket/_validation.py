"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .dist import Distribution, PiecewiseLinear


def check_types(X) -> np.ndarray:
    """1-D float array of consumer types from a vector or a single-column matrix."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one feature (the consumer type), got {arr.shape[1]}")
        arr = arr[:, 0]
    return arr


def as_distribution(X, support: tuple[float, float] | None = None) -> Distribution:
    """Pass a distribution through, or build an interpolated empirical CDF from samples."""
    if isinstance(X, Distribution):
        return X
    return PiecewiseLinear.from_samples(check_types(X), support=support)


def check_positive(name: str, value, *, integer: bool = False) -> None:
    kind = numbers.Integral if integer else numbers.Real
    if not isinstance(value, kind) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")
