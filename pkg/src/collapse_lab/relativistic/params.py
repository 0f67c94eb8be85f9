"""Sound-speed parameter of the relativistic isothermal gas."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["EpsParams"]


@dataclass(frozen=True)
class EpsParams:
    """``eps`` is the square of the sound speed, ``0 <= eps < 1``.

    ``eps = 0`` is accepted as the Newtonian limit. ``cap`` is the largest
    value the solvers are validated for; larger values are allowed with
    ``enforce_cap=False`` and then only produce diagnostics.
    """

    eps: float = 0.01
    cap: float = 0.05
    enforce_cap: bool = True

    def __post_init__(self):
        e = float(self.eps)
        if not (0.0 <= e < 1.0):
            raise ValueError(f"eps must lie in [0, 1), got {e!r}")
        if self.enforce_cap and e > self.cap:
            raise ValueError(f"eps={e} exceeds the working cap {self.cap}")
        object.__setattr__(self, "eps", e)

    @property
    def eta(self) -> float:
        """Exponent in the density factor ``D**(-eta)`` of the sonic denominator."""
        return 2.0 * self.eps / (1.0 - self.eps)

    @property
    def tail_exponent(self) -> float:
        return -2.0 * (1.0 - self.eps) / (1.0 + self.eps)

    @property
    def chart_exponent(self) -> float:
        """``Y = y**(-chart_exponent)`` for the extension chart."""
        return (1.0 - self.eps) / (1.0 + self.eps)

    @property
    def far_field_constant(self) -> float:
        """``k`` making ``(k x**tail_exponent, 1)`` an exact solution of the Eulerian system.

        Substituting ``W = 1`` forces ``D**((1+eps)/(1-eps)) x**2 ((1+eps)**2 + 4 eps) = 1``.
        """
        e = self.eps
        return ((1.0 + e) ** 2 + 4.0 * e) ** (-self.chart_exponent)

    @property
    def reference_far_field_constant(self) -> float:
        """``(1-eps)**tail_exponent``, the commonly quoted constant; exact only without the ``4 eps D W`` term."""
        return (1.0 - self.eps) ** self.tail_exponent

    @property
    def lapse_tail_exponent(self) -> float:
        """Exponent of ``exp(2 mu)`` against ``y`` at large ``y``."""
        return 4.0 * self.eps / (1.0 + self.eps)

    def default_window(self) -> tuple[float, float]:
        """``[2, 3]`` shrunk inward by ``10 eps``, at most ``0.1`` per side."""
        s = min(10.0 * self.eps, 0.1)
        return (2.0 + s, 3.0 - s)
