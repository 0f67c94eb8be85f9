"""Self-similar Euler-Poisson system for a polytropic gas.

With ``y`` the similarity coordinate, ``rho`` the density and ``omega`` the
relative velocity, the system reads::

    rho'   = y rho h / G
    omega' = (4 - 3 gamma - 3 omega) / y - y omega h / G

    h = 2 omega^2 + (gamma-1) omega - 4 pi rho omega / (4 - 3 gamma) + (gamma-1)(2-gamma)
    G = gamma rho^(gamma-1) - y^2 omega^2

For ``gamma == 1`` the density is rescaled by ``2 pi`` so that
``h = 2 omega (omega - rho)`` and ``G = 1 - y^2 omega^2``. All functions
accept floats, numpy arrays or :class:`SeriesF` operands.
"""

from __future__ import annotations

import math

import numpy as np

from ..core.series import SeriesF, series_pow
from .params import GammaParams

__all__ = [
    "SonicEvaluation",
    "h_numerator",
    "sonic_denominator",
    "rhs_newtonian",
    "ode_residual",
    "sonic_residual",
    "far_field_state",
    "friedmann_state",
    "NewtonianSystem",
]

DENOMINATOR_FLOOR = 1e-10


class SonicEvaluation(ArithmeticError):
    """The right-hand side was requested too close to a sonic point."""


def _pow(rho, p):
    if isinstance(rho, SeriesF):
        return series_pow(rho, p)
    return np.power(rho, p)


def h_numerator(rho, omega, params: GammaParams):
    g = params.gamma
    if params.isothermal:
        return 2.0 * omega * (omega - rho)
    return (2.0 * omega * omega + (g - 1.0) * omega
            - 4.0 * math.pi * rho * omega / (4.0 - 3.0 * g) + (g - 1.0) * (2.0 - g))


def sonic_denominator(y, rho, omega, params: GammaParams):
    """``G(y; rho, omega)``: positive inside the sonic point, negative outside."""
    if params.isothermal:
        return 1.0 - y * y * omega * omega
    g = params.gamma
    return g * _pow(rho, g - 1.0) - y * y * omega * omega


def rhs_newtonian(y: float, state, params: GammaParams, floor: float = DENOMINATOR_FLOOR):
    """``(rho', omega')`` at ``y``; raises :class:`SonicEvaluation` if ``|G| < floor``."""
    rho, omega = state
    G = sonic_denominator(y, rho, omega, params)
    if abs(G) < floor:
        raise SonicEvaluation(f"|G|={abs(G):.3e} below floor at y={y!r}")
    h = h_numerator(rho, omega, params)
    return np.array([y * rho * h / G,
                     (4.0 - 3.0 * params.gamma - 3.0 * omega) / y - y * omega * h / G])


def ode_residual(y, rho, omega, drho, domega, params: GammaParams):
    """Residuals ``(G rho' - y rho h, y G omega' - (4-3g-3 omega) G + y^2 omega h)``
    scaled back to derivative units (divided by ``G``); vectorised."""
    G = sonic_denominator(y, rho, omega, params)
    h = h_numerator(rho, omega, params)
    r1 = drho - y * rho * h / G
    r2 = domega - (4.0 - 3.0 * params.gamma - 3.0 * omega) / y + y * omega * h / G
    return r1, r2


def sonic_residual(params: GammaParams):
    """Polynomial-form residual ``[G rho' - y rho h, y G omega' - y(...)]`` for
    the formal series engine; regular at the sonic point."""

    def residual(y, states):
        rho, omega = states
        G = sonic_denominator(y, rho, omega, params)
        h = h_numerator(rho, omega, params)
        r1 = G * rho.deriv() - y * rho * h
        r2 = y * G * omega.deriv() - (4.0 - 3.0 * params.gamma - 3.0 * omega) * G + y * y * omega * h
        return [r1, r2]

    return residual


def far_field_state(y, params: GammaParams):
    """Exact power-law solution ``(k y^(-2/(2-gamma)), 2 - gamma)``."""
    y = np.asarray(y, dtype=float)
    rho = params.far_field_constant * y ** params.tail_exponent
    return rho, np.full_like(rho, params.omega_far)


def friedmann_state(params: GammaParams):
    return params.rho_friedmann, params.omega_friedmann


class NewtonianSystem:
    """The system in the form consumed by the shared shooting pipeline."""

    names = ("y", "rho", "omega")

    def __init__(self, params: GammaParams):
        self.params = params
        self.friedmann = friedmann_state(params)
        self.residual = sonic_residual(params)

    def rhs(self, y, u):
        return rhs_newtonian(y, u, self.params, floor=0.0)

    def denominator(self, y, rho, omega):
        return sonic_denominator(y, rho, omega, self.params)

    def ode_residual(self, y, rho, omega, drho, domega):
        return ode_residual(y, rho, omega, drho, domega, self.params)

    def sonic_state(self, y_star):
        from .sonic import sonic_state

        return sonic_state(y_star, self.params)
