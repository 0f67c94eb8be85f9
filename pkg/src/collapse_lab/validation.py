"""Argument checks shared by the solver front ends."""

from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_is_fitted

__all__ = ["InvalidParameter", "check_is_fitted", "check_window", "check_positive", "check_finite_grid",
           "check_gamma", "check_eps"]


class InvalidParameter(ValueError):
    pass


def check_window(window, name: str = "window") -> tuple[float, float]:
    try:
        a, b = (float(v) for v in window)
    except (TypeError, ValueError):
        raise InvalidParameter(f"{name} must be a pair of numbers, got {window!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and 0 < a < b):
        raise InvalidParameter(f"{name} must satisfy 0 < a < b, got ({a}, {b})")
    return a, b


def check_positive(value, name: str) -> float:
    v = float(value)
    if not (math.isfinite(v) and v > 0):
        raise InvalidParameter(f"{name} must be a positive finite number, got {value!r}")
    return v


def check_finite_grid(x, name: str = "x") -> np.ndarray:
    """1-D float array of finite values."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr[None]
    if arr.ndim != 1:
        raise InvalidParameter(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite values")
    return arr


def check_gamma(gamma) -> float:
    g = float(gamma)
    if not (1.0 <= g < 4.0 / 3.0):
        raise InvalidParameter(f"gamma must lie in [1, 4/3), got {gamma!r}")
    return g


def check_eps(eps, cap: float = 0.05) -> float:
    e = float(eps)
    if not (0.0 <= e <= cap):
        raise InvalidParameter(f"eps must lie in [0, {cap}], got {eps!r}")
    return e
