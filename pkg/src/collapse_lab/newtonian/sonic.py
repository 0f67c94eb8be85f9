"""Analytic continuation through a sonic point by Taylor series."""

from __future__ import annotations

import math

import numpy as np

from ..core.formal import DegenerateRecursion, series_residual
from ..core.roots import RootBracket, refine_root
from ..core.selfsim import (
    TYPE1,
    TYPE2,
    BranchInconsistency,
    OutsideTrustRadius,
    SonicExpansion,
    branch_roots,
    expand_at_sonic,
)
from .equations import NewtonianSystem, h_numerator
from .params import GammaParams

__all__ = [
    "TYPE1",
    "TYPE2",
    "BranchInconsistency",
    "DegenerateRecursion",
    "OutsideTrustRadius",
    "SonicExpansion",
    "sonic_state",
    "first_order_roots",
    "sonic_taylor",
    "local_eval",
    "isothermal_recursion_matrix",
    "probed_recursion_matrix",
    "numerator_at_sonic",
]


def sonic_state(y_star: float, params: GammaParams) -> tuple[float, float]:
    """``(rho_0, omega_0)`` where numerator and denominator vanish together."""
    if params.isothermal:
        return 1.0 / y_star, 1.0 / y_star
    g = params.gamma

    def rho_of(w):
        # h = 0 solved for rho
        return (4 - 3 * g) * (2 * w * w + (g - 1) * w + (g - 1) * (2 - g)) / (4 * math.pi * w)

    def G(w):
        return g * rho_of(w) ** (g - 1) - y_star * y_star * w * w

    lo, hi = 1e-8, 1.0
    while G(hi) > 0:
        hi *= 2.0
    w = refine_root(G, RootBracket.from_function(G, lo, hi), tol=1e-15 * hi)
    return rho_of(w), w


def first_order_roots(y_star: float, params: GammaParams) -> dict:
    """``{branch: (rho_1, omega_1)}``; Type 1 has the larger ``omega_1``."""
    return branch_roots(NewtonianSystem(params), y_star)


def sonic_taylor(y_star: float, branch: str = TYPE1, params: GammaParams | None = None,
                 N: int = 40, delta_fraction: float = 0.05) -> SonicExpansion:
    """Taylor coefficients (rows ``rho``, ``omega``) of the analytic solution through ``y_star``."""
    params = params or GammaParams()
    return expand_at_sonic(NewtonianSystem(params), y_star, branch, N, delta_fraction)


def local_eval(exp: SonicExpansion, y, *, strict: bool = True):
    """``(rho, omega, tail_estimate)`` from the truncated series."""
    return exp(y, strict=strict)


def isothermal_recursion_matrix(omega0: float, omega1: float, rho1: float, N: int) -> np.ndarray:
    """Closed-form 2x2 recursion matrix of the isothermal Type-1 expansion.

    Used as an independent invertibility check of the generic per-order
    solve; its normalisation differs from the probed matrix.
    """
    r = omega1 / omega0
    return np.array([
        [-2 * N + 2 - 2 * N * r, -2 * rho1 / omega0 - 2],
        [-2.0, -2 * N - 4 + 2 / omega0 - (2 * N + 2) * r],
    ])


def probed_recursion_matrix(exp: SonicExpansion, N: int) -> np.ndarray:
    """The affine map ``(rho_N, omega_N) -> order-N residual`` of the generic solver."""
    res = exp.system.residual
    co = exp.coeffs[:, : N + 1].copy()
    co[:, N] = 0.0
    r0 = series_residual(res, exp.x_star, co, N)
    M = np.empty((2, 2))
    for j in range(2):
        trial = co.copy()
        trial[j, N] = 1.0
        M[:, j] = series_residual(res, exp.x_star, trial, N) - r0
    return M


def numerator_at_sonic(exp: SonicExpansion) -> float:
    """``y rho h`` at the sonic point (zero for a consistent expansion)."""
    r0, w0 = exp.coeffs[:, 0]
    return float(exp.x_star * r0 * h_numerator(r0, w0, exp.system.params))
