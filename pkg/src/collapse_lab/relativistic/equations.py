"""Self-similar Einstein-Euler system in Schwarzschild-type coordinates.

Unknowns ``D`` (density-like) and ``W`` (velocity-like) of ``x``::

    D' = -2 x (1-eps) D (W+eps) (D-W) / B
    W' = (1 - 3W) / x + 2 x (1+eps) W (W+eps) (D-W) / B
    B  = D^(-eta) - [(W+eps)^2 - eps (W-1)^2 + 4 eps D W] x^2,  eta = 2 eps/(1-eps)

At ``eps = 0`` this is the isothermal Newtonian system in the rescaled
density convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.roots import RootBracket, refine_root
from ..core.series import SeriesF, series_pow
from .params import EpsParams

__all__ = [
    "SonicFactorization",
    "quadratic_form",
    "sonic_denominator_rel",
    "rhs_rel_eulerian",
    "ode_residual_rel",
    "sonic_factorization",
    "far_field_rel",
    "sonic_state_rel",
    "RelativisticSystem",
]


def _pow(v, p):
    if isinstance(v, SeriesF):
        return series_pow(v, p)
    return np.power(v, p)


def quadratic_form(D, W, eps):
    """``(W+eps)^2 - eps (W-1)^2 + 4 eps D W``."""
    return (W + eps) * (W + eps) - eps * (W - 1.0) * (W - 1.0) + 4.0 * eps * D * W


def sonic_denominator_rel(x, D, W, params: EpsParams):
    return _pow(D, -params.eta) - quadratic_form(D, W, params.eps) * x * x


def rhs_rel_eulerian(x, state, params: EpsParams, floor: float = 0.0):
    D, W = state
    e = params.eps
    B = sonic_denominator_rel(x, D, W, params)
    if abs(B) < floor:
        from ..newtonian.equations import SonicEvaluation

        raise SonicEvaluation(f"|B|={abs(B):.3e} below floor at x={x!r}")
    q = (D - W) / B
    return np.array([-2.0 * x * (1.0 - e) * D * (W + e) * q,
                     (1.0 - 3.0 * W) / x + 2.0 * x * (1.0 + e) * W * (W + e) * q])


def ode_residual_rel(x, D, W, dD, dW, params: EpsParams):
    e = params.eps
    B = sonic_denominator_rel(x, D, W, params)
    q = (D - W) / B
    return (dD + 2.0 * x * (1.0 - e) * D * (W + e) * q,
            dW - (1.0 - 3.0 * W) / x - 2.0 * x * (1.0 + e) * W * (W + e) * q)


@dataclass(frozen=True)
class SonicFactorization:
    B: float
    J: float
    H: float
    f: float
    x: float
    W: float
    eps: float

    @property
    def identity_error(self):
        """Relative mismatch of ``B = (1 - eps)(J - xW)(H + xW)``."""
        prod = (1.0 - self.eps) * (self.J - self.x * self.W) * (self.H + self.x * self.W)
        scale = np.maximum.reduce([np.abs(self.B), np.abs(self.J * self.H),
                                   (self.x * self.W) ** 2, np.full(np.shape(self.B), 1e-300)])
        return np.abs(self.B - prod) / scale


def sonic_factorization(x, D, W, params: EpsParams) -> SonicFactorization:
    """The roots ``J``, ``-H`` of ``B`` viewed as a quadratic in ``xW``.

    The leading coefficient of that quadratic is ``-(1 - eps)``, so
    ``B = (1 - eps)(J - xW)(H + xW)``.
    """
    e = params.eps
    k = 2.0 * e / (1.0 - e)
    Dm = np.power(D, -params.eta)
    J = -k * (1.0 + D) * x + np.sqrt(k * k * (1.0 + D) ** 2 * x * x + e * x * x + Dm / (1.0 - e))
    H = J + 2.0 * k * (1.0 + D) * x
    B = sonic_denominator_rel(x, D, W, params)
    return SonicFactorization(B, J, H, J - x * D, x, W, e)


def far_field_rel(x, params: EpsParams):
    x = np.asarray(x, dtype=float)
    D = params.far_field_constant * x ** params.tail_exponent
    return D, np.ones_like(D)


def sonic_state_rel(x_star: float, params: EpsParams) -> tuple[float, float]:
    """``D_0 = W_0`` solving ``B(x_star; D_0, D_0) = 0``."""
    if params.eps == 0.0:
        return 1.0 / x_star, 1.0 / x_star

    def f(d):
        return sonic_denominator_rel(x_star, d, d, params)

    lo, hi = 1e-6, 1.0
    while f(hi) > 0:
        hi *= 2.0
    while f(lo) < 0:
        lo *= 0.5
    d = refine_root(f, RootBracket.from_function(f, lo, hi), tol=1e-16 * hi)
    return d, d


class RelativisticSystem:
    """The system in the form consumed by the shared shooting pipeline."""

    names = ("x", "D", "W")
    friedmann = (1.0 / 3.0, 1.0 / 3.0)

    def __init__(self, params: EpsParams):
        self.params = params

        def residual(x, states):
            D, W = states
            e = params.eps
            B = sonic_denominator_rel(x, D, W, params)
            r1 = B * D.deriv() + 2.0 * x * (1.0 - e) * D * (W + e) * (D - W)
            r2 = x * B * W.deriv() - (1.0 - 3.0 * W) * B - 2.0 * x * x * (1.0 + e) * W * (W + e) * (D - W)
            return [r1, r2]

        self.residual = residual

    def rhs(self, x, u):
        return rhs_rel_eulerian(x, u, self.params)

    def denominator(self, x, D, W):
        return sonic_denominator_rel(x, D, W, self.params)

    def ode_residual(self, x, D, W, dD, dW):
        return ode_residual_rel(x, D, W, dD, dW, self.params)

    def sonic_state(self, x_star):
        return sonic_state_rel(x_star, self.params)
