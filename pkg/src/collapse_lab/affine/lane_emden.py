"""Enthalpy of the gravitating affine flow: ``w'' + 2 w'/r + pi w^3 = -3 delta / 4`` on ``[0, 1]``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.ode import integrate_ivp
from ..core.roots import RootBracket, refine_root

__all__ = ["EnthalpyProfile", "NoSignChange", "lane_emden_shoot", "lane_emden_endpoint"]

SERIES_SWITCH = 1e-3


class NoSignChange(RuntimeError):
    pass


@dataclass
class EnthalpyProfile:
    r: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    delta: float
    meta: dict = field(default_factory=dict)

    @property
    def w_centre(self) -> float:
        return float(self.w[0])

    @property
    def w_prime_boundary(self) -> float:
        return float(self.w_prime[-1])

    def vacuum_ratio(self, r_from: float = 0.9):
        """``w / (1 - r)`` on ``[r_from, 1)``."""
        m = (self.r >= r_from) & (self.r < 1.0)
        return self.w[m] / (1.0 - self.r[m])


def _series(w0, delta, r):
    """``w0 + a r^2 + b r^4`` with ``6a = -(pi w0^3 + 3 delta/4)`` and ``20 b = -3 pi w0^2 a``."""
    a = -(math.pi * w0 ** 3 + 0.75 * delta) / 6.0
    b = -3.0 * math.pi * w0 * w0 * a / 20.0
    r2 = r * r
    return w0 + a * r2 + b * r2 * r2, 2.0 * a * r + 4.0 * b * r2 * r


def _rhs(delta):
    def f(r, s):
        w, wp = s
        return np.array([wp, -2.0 * wp / r - math.pi * w ** 3 - 0.75 * delta])
    return f


def _solve(w0, delta, tol, dense=False):
    s0 = _series(w0, delta, SERIES_SWITCH)
    return integrate_ivp(_rhs(delta), SERIES_SWITCH, s0, 1.0, tol, atol=1e-3 * tol, dense=dense)


def lane_emden_endpoint(w0: float, delta: float = 0.0, tol: float = 1e-13) -> float:
    """``w(1)`` for the regular solution with central value ``w0``."""
    res = _solve(w0, delta, tol)
    return float(res.y[-1, 0])


def lane_emden_shoot(delta: float = 0.0, *, w0_range=(1e-6, 20.0), scan_points: int = 60,
                     vacuum_tol: float = 1e-10, tol: float = 1e-13, n_grid: int = 401) -> EnthalpyProfile:
    """Bisect the central value so that the enthalpy first vanishes at ``r = 1``.

    Central values are scanned geometrically; the first sign change of
    ``w(1)`` is refined. All sign changes found by the scan are recorded.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    grid = np.geomspace(*w0_range, scan_points)
    vals = np.array([lane_emden_endpoint(w, delta, tol) for w in grid])
    changes = [i for i in range(len(grid) - 1) if (vals[i] < 0) != (vals[i + 1] < 0)]
    if not changes:
        raise NoSignChange(f"no sign change in shooting: w(1)={vals[0]:.6g} at w0={grid[0]:.3g}, "
                           f"{vals[-1]:.6g} at w0={grid[-1]:.3g}")
    i = changes[0]
    f = lambda w: lane_emden_endpoint(w, delta, tol)  # noqa: E731
    br = RootBracket(grid[i], grid[i + 1], vals[i], vals[i + 1])
    w0 = refine_root(f, br, tol=1e-15 * grid[i + 1])
    res = _solve(w0, delta, tol, dense=True)
    if abs(res.y[-1, 0]) > vacuum_tol:
        # bisection midpoint within the last representable interval; keep the closer end
        raise NoSignChange(f"shoot stalled with |w(1)|={abs(res.y[-1, 0]):.3e} > {vacuum_tol}")
    r_out = np.linspace(0.0, 1.0, n_grid)
    inner = r_out < SERIES_SWITCH
    w = np.empty(n_grid)
    wp = np.empty(n_grid)
    w[inner], wp[inner] = _series(w0, delta, r_out[inner])
    sol = res.dense(r_out[~inner])
    w[~inner], wp[~inner] = sol[:, 0], sol[:, 1]
    w[-1], wp[-1] = res.y[-1]
    prof = EnthalpyProfile(r_out, w, wp, delta)
    prof.meta.update(
        w0=w0,
        w_boundary=float(res.y[-1, 0]),
        sign_changes=[(float(grid[j]), float(grid[j + 1])) for j in changes],
        positive_inside=bool(np.all(w[:-1] > 0)),
    )
    return prof
