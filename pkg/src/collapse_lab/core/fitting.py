"""Least-squares power-law fits in log-log coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PowerLawFit", "fit_power_law"]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    residual: float  # max absolute deviation in log space

    def __iter__(self):
        return iter((self.exponent, self.prefactor, self.residual))


def fit_power_law(x, v) -> PowerLawFit:
    """Fit ``v = prefactor * x**exponent`` by an unweighted line in log space."""
    x = np.asarray(x, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if x.shape != v.shape:
        raise ValueError("x and v must have the same length")
    if x.size < 3:
        raise ValueError(f"need at least 3 samples, got {x.size}")
    if np.any(x <= 0) or np.any(v <= 0):
        raise ValueError("power-law fit needs strictly positive samples")
    lx, lv = np.log(x), np.log(v)
    slope, intercept = np.polyfit(lx, lv, 1)
    resid = float(np.max(np.abs(lv - (slope * lx + intercept))))
    return PowerLawFit(float(slope), float(np.exp(intercept)), resid)
