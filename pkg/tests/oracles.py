"""Independent reference computations (scipy integrators, closed forms).

None of these import the package; the frozen numbers in ``frozen.py`` were
produced by the functions here.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def lp_rhs(y, u):
    """Isothermal self-similar system, density rescaled by 2 pi, written out directly."""
    rho, w = u
    G = 1.0 - y * y * w * w
    return [2.0 * y * rho * w * (w - rho) / G,
            (1.0 - 3.0 * w) / y - 2.0 * y * w * w * (w - rho) / G]


def lp_classify(y_star: float, delta: float = 1e-5, y_min: float = 1e-3) -> bool:
    """True when the Type-1 solution started at ``y_star`` dips below omega = 1/3."""
    r0 = w0 = 1.0 / y_star
    r1 = -1.0 / y_star ** 2
    w1 = (1.0 / y_star) * (1.0 - 2.0 / y_star)
    u0 = [r0 - r1 * delta, w0 - w1 * delta]

    def dip(y, u):
        return u[1] - 1.0 / 3.0
    dip.terminal = True

    def sonic(y, u):
        return 1.0 - y * y * u[1] * u[1] - 1e-6
    sonic.terminal = True
    sol = solve_ivp(lp_rhs, (y_star - delta, y_min), u0, method="DOP853", rtol=1e-11, atol=1e-14,
                    events=[dip, sonic])
    return len(sol.t_events[0]) > 0


def lp_sonic_point(lo: float = 2.0, hi: float = 3.0, tol: float = 1e-9) -> float:
    """Boundary between dipping and non-dipping Type-1 candidates (rightmost transition)."""
    grid = np.linspace(lo, hi, 21)
    dips = [lp_classify(y) for y in grid]
    k = max(i for i in range(len(grid) - 1) if not dips[i] and dips[i + 1])
    a, b = grid[k], grid[k + 1]
    while b - a > tol:
        m = 0.5 * (a + b)
        if lp_classify(m):
            b = m
        else:
            a = m
    return float(0.5 * (a + b))


def cycloid_collapse_time(G: float, chi0: float, chi1: float) -> float:
    """Closed-form fall time of ``chi'' = -G/chi^2`` for bound data (``E < 0``)."""
    E = 0.5 * chi1 * chi1 - G / chi0
    if E >= 0:
        raise ValueError("bound data only")
    chi_max = G / (-E)
    A = math.sqrt(chi_max ** 3 / (8.0 * G))
    eta0 = math.acos(max(-1.0, 1.0 - 2.0 * chi0 / chi_max))  # in [0, pi]: rising branch
    if chi1 < 0:
        eta0 = 2.0 * math.pi - eta0
    return A * ((2.0 * math.pi - eta0) + math.sin(eta0))


def lane_emden_first_zero(n: float = 3.0) -> float:
    """First zero of ``theta'' + 2 theta'/xi + theta^n = 0``, ``theta(0) = 1``."""
    xi0 = 1e-6
    u0 = [1.0 - xi0 ** 2 / 6.0, -xi0 / 3.0]

    def f(xi, u):
        return [u[1], -2.0 * u[1] / xi - np.sign(u[0]) * abs(u[0]) ** n]

    def zero(xi, u):
        return u[0]
    zero.terminal = True
    sol = solve_ivp(f, (xi0, 20.0), u0, method="DOP853", rtol=1e-13, atol=1e-15, events=zero)
    return float(sol.t_events[0][0])


def grav_fall_scale(lam0: float, lamdot0: float, delta: float, t_end: float):
    """``lam'' = delta / lam^2`` by scipy, returning ``lam(t_end)``."""
    sol = solve_ivp(lambda t, u: [u[1], delta / u[0] ** 2], (0.0, t_end), [lam0, lamdot0],
                    method="DOP853", rtol=1e-12, atol=1e-14)
    return float(sol.y[0, -1])
