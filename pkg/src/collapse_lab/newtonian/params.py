"""Polytropic index and the closed-form reference solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["GammaParams"]


@dataclass(frozen=True)
class GammaParams:
    """Adiabatic index in the mass-supercritical range ``1 <= gamma < 4/3``.

    For ``gamma == 1`` the density is carried in the rescaled convention
    ``rho_internal = 2*pi*rho``; :meth:`to_internal_density` and
    :meth:`to_physical_density` convert.
    """

    gamma: float = 1.0

    def __post_init__(self):
        g = float(self.gamma)
        if not (1.0 <= g < 4.0 / 3.0):
            raise ValueError(f"gamma must lie in [1, 4/3), got {g!r}")
        object.__setattr__(self, "gamma", g)

    @property
    def isothermal(self) -> bool:
        return self.gamma == 1.0

    @property
    def alpha(self) -> float:
        if self.isothermal:
            raise ValueError("alpha = 1/(gamma-1) is undefined for gamma = 1")
        return 1.0 / (self.gamma - 1.0)

    @property
    def convention(self) -> str:
        return "rescaled_2pi" if self.isothermal else "physical"

    @property
    def density_scale(self) -> float:
        return 2.0 * math.pi if self.isothermal else 1.0

    def to_internal_density(self, rho):
        return rho * self.density_scale

    def to_physical_density(self, rho):
        return rho / self.density_scale

    # reference solutions (internal convention)
    @property
    def omega_friedmann(self) -> float:
        return (4.0 - 3.0 * self.gamma) / 3.0

    @property
    def rho_friedmann(self) -> float:
        return self.to_internal_density(1.0 / (6.0 * math.pi))

    @property
    def omega_far(self) -> float:
        return 2.0 - self.gamma

    @property
    def tail_exponent(self) -> float:
        return -2.0 / (2.0 - self.gamma)

    @property
    def far_field_constant(self) -> float:
        """``k`` in ``rho_far = k * y**tail_exponent`` (internal convention)."""
        g = self.gamma
        k = (g * (4.0 - 3.0 * g) / (2.0 * math.pi * (2.0 - g) ** 2)) ** (1.0 / (2.0 - g))
        return self.to_internal_density(k)
