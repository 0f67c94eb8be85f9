"""Pressureless spherical collapse in Lagrangian coordinates.

Each shell ``r`` evolves independently: ``chi_tt = -G(r) / chi^2`` with
``G(r)`` the mean density inside ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from ..core.fitting import fit_power_law
from ..core.ode import EVENT, Event, integrate_ivp

__all__ = [
    "DustModel",
    "DustTrajectory",
    "NoCollapse",
    "InsufficientSamples",
    "LabelPastCollapse",
    "dust_trajectory",
    "collapse_time_quadrature",
    "blowup_exponent",
    "eulerian_density",
    "collapse_map",
]

COLLAPSE_FLOOR = 1e-8


class NoCollapse(RuntimeError):
    pass


class InsufficientSamples(RuntimeError):
    pass


class LabelPastCollapse(ValueError):
    pass


@dataclass(frozen=True)
class DustModel:
    """Initial density ``rho0`` on ``[0, 1]`` (decreasing) and its derivative."""

    rho0: Callable[[float], float]
    rho0_prime: Callable[[float], float]
    name: str = "custom"

    @classmethod
    def flat_top(cls, rho_bar: float = 1.0, n: int = 4) -> "DustModel":
        """``rho_bar (1 - r^n)``: flat to order ``n`` at the centre, zero at ``r = 1``."""
        if rho_bar <= 0 or n < 1:
            raise ValueError("need rho_bar > 0 and n >= 1")
        return cls(lambda r: rho_bar * (1.0 - r ** n), lambda r: -rho_bar * n * r ** (n - 1),
                   name=f"flat_top(rho_bar={rho_bar}, n={n})")

    @classmethod
    def homogeneous(cls, rho_bar: float = 1.0) -> "DustModel":
        if rho_bar <= 0:
            raise ValueError("need rho_bar > 0")
        return cls(lambda r: rho_bar, lambda r: 0.0, name=f"homogeneous(rho_bar={rho_bar})")

    def G(self, r: float) -> float:
        """Mean density ``(4 pi / r^3) int_0^r rho0 s^2 ds``, written as ``4 pi int_0^1 rho0(r t) t^2 dt``."""
        val, _ = quad(lambda t: self.rho0(r * t) * t * t, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
        return 4.0 * math.pi * val

    def G_prime(self, r: float) -> float:
        val, _ = quad(lambda t: self.rho0_prime(r * t) * t ** 3, 0.0, 1.0, epsabs=0.0, epsrel=1e-13,
                      limit=200)
        return 4.0 * math.pi * val

    def g(self, r: float) -> float:
        return math.sqrt(4.5 * self.G(r))

    def g_prime(self, r: float) -> float:
        return 9.0 * self.G_prime(r) / (4.0 * self.g(r))


@dataclass
class DustTrajectory:
    r: float
    t: np.ndarray
    chi: np.ndarray
    chi_t: np.ndarray
    energy: np.ndarray
    t_star: float
    t_star_quadrature: float
    G: float
    chi0: float
    chi1: float
    status: str

    def energy_drift(self) -> float:
        """Largest ``|E(t) - E(0)|`` relative to the size ``max(|E(0)|, G / chi(t))`` of the terms.

        Both energy terms grow like ``1/chi`` towards collapse, so a fixed
        relative integration error shows up at that scale.
        """
        scale = np.maximum(abs(self.energy[0]), self.G / self.chi)
        return float(np.max(np.abs(self.energy - self.energy[0]) / scale))


def _energy(chi, chi_t, G):
    return 0.5 * chi_t * chi_t - G / chi


def collapse_time_quadrature(G: float, chi0: float, chi1: float) -> float:
    """Time for ``chi`` to reach zero from ``(chi0, chi1)``, by quadrature of the energy relation."""
    E = 0.5 * chi1 * chi1 - G / chi0
    if chi1 >= 0 and E >= 0:
        raise NoCollapse(f"outward data with E={E:.6g} >= 0 escapes")

    def fall(c0, v0):
        # chi = c0 (1 - u^2): endpoint singularities of the integrand are removed
        def f(u):
            chi = c0 * (1.0 - u * u)
            if chi <= 0.0:
                return 0.0
            return 2.0 * c0 * u / math.sqrt(v0 * v0 + 2.0 * G * u * u / chi)

        if v0 == 0.0:
            def f(u):  # noqa: F811
                return 2.0 * c0 * math.sqrt(1.0 - u * u) / math.sqrt(2.0 * G / c0)
        val, _ = quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=400)
        return val

    if chi1 >= 0:
        if G == 0.0:
            raise NoCollapse("no attraction and no inward velocity")
        if chi1 == 0:
            return fall(chi0, 0.0)
        # rise to chi_max, then fall from rest; the rise mirrors the fall from chi_max to chi0
        chi_max = G / (-E)
        return 2.0 * fall(chi_max, 0.0) - fall(chi0, chi1)
    return fall(chi0, chi1)


def dust_trajectory(model: DustModel | None, r: float, chi0: float = 1.0, chi1: float | None = None,
                    t_end: float | None = None, *, tol: float = 1e-12, G: float | None = None) -> DustTrajectory:
    """Integrate one shell to collapse (event at ``chi = 1e-8``).

    The clock is regularised, ``dt/ds = chi^(3/2)``, so that the approach to
    ``chi = 0`` becomes an exponential decay in ``s`` that the step control
    resolves without underflow. ``chi1`` defaults to the self-similar value
    ``-(2/3) g(r)``; ``G`` may be given directly instead of a model.
    """
    if chi0 <= 0:
        raise ValueError("chi0 must be positive")
    if G is None:
        G = model.G(r)
    g = math.sqrt(4.5 * G)
    if chi1 is None:
        chi1 = -2.0 * g / 3.0
    tq = collapse_time_quadrature(G, chi0, chi1)
    horizon = t_end if t_end is not None else 2.0 * tq

    def rhs(_, st):
        t, c, ct = st
        w = c * math.sqrt(c)
        return np.array([w, w * ct, -G / math.sqrt(c)])

    evs = [Event(lambda _, st: st[1] - COLLAPSE_FLOOR, name="collapse"),
           Event(lambda _, st: st[0] - horizon, name="horizon")]
    res = integrate_ivp(rhs, 0.0, [0.0, chi0, chi1], 1e12, tol, evs, atol=1e-3 * tol * chi0,
                        max_steps=1_000_000)
    t, chi, chi_t = res.y.T
    if res.status == EVENT and res.event_index == 0:
        # remaining time from chi = 1e-8 to 0 under the energy relation
        E = 0.5 * chi1 * chi1 - G / chi0
        ce = float(chi[-1])
        rest, _ = quad(lambda c: 1.0 / math.sqrt(2.0 * E + 2.0 * G / c), 0.0, ce, epsabs=0.0, epsrel=1e-12)
        t_star = float(t[-1]) + rest
        status = "collapse"
    else:
        t_star = math.inf
        status = res.status if res.status != EVENT else "horizon"
    return DustTrajectory(r, t, chi, chi_t, _energy(chi, chi_t, G), t_star, tq, G, chi0, chi1, status)


def blowup_exponent(traj: DustTrajectory, decades=(-6.0, -4.0)) -> float:
    """Exponent ``p`` of ``chi ~ c (t* - t)^p`` fitted over two decades of ``(t* - t) / t*``."""
    if not math.isfinite(traj.t_star):
        raise InsufficientSamples("trajectory does not collapse")
    s = (traj.t_star - traj.t) / traj.t_star
    m = (s >= 10.0 ** decades[0]) & (s <= 10.0 ** decades[1])
    if m.sum() < 5:
        raise InsufficientSamples(f"insufficient samples near collapse ({int(m.sum())} in window)")
    return fit_power_law(traj.t_star - traj.t[m], traj.chi[m]).exponent


def eulerian_density(model: DustModel, t: float, labels, *, tol: float = 1e-12,
                     chi1: Callable[[float], float] | None = None,
                     chi1_prime: Callable[[float], float] | None = None) -> dict:
    """Density along the shells at time ``t`` with ``chi0 = 1``.

    ``d chi / dr`` comes from the variational equation
    ``psi_tt = -G'/chi^2 + 2 G psi / chi^3`` integrated with each shell.
    Defaults to the self-similar velocity ``chi1 = -(2/3) g``.
    """
    labels = np.asarray(labels, dtype=float)
    if chi1 is None:
        chi1 = lambda r: -2.0 * model.g(r) / 3.0  # noqa: E731
        chi1_prime = lambda r: -2.0 * model.g_prime(r) / 3.0  # noqa: E731
    elif chi1_prime is None:
        raise ValueError("chi1_prime is required with a custom chi1")
    J = np.empty_like(labels)
    chi_out = np.empty_like(labels)
    for k, r in enumerate(labels):
        G, Gp = model.G(r), model.G_prime(r)
        v0 = chi1(r)
        t_star = collapse_time_quadrature(G, 1.0, v0)
        if t >= t_star:
            raise LabelPastCollapse(f"label past collapse: r={r!r} collapses at t*={t_star!r} <= t={t!r}")

        def rhs(_, s):
            c, ct, p, pt = s
            return np.array([ct, -G / (c * c), pt, -Gp / (c * c) + 2.0 * G * p / c ** 3])

        if t == 0:
            c, p = 1.0, 0.0
        else:
            res = integrate_ivp(rhs, 0.0, [1.0, v0, 0.0, chi1_prime(r)], t, tol, atol=1e-3 * tol,
                                max_steps=1_000_000)
            if not res.success:
                raise LabelPastCollapse(f"shell r={r!r} failed before t={t!r}: {res.status}")
            c, _, p, _ = res.y[-1]
        chi_out[k] = c
        J[k] = c * c * (c + r * p)
    rho = np.array([model.rho0(r) for r in labels]) / J
    return {"r": labels, "chi": chi_out, "jacobian": J, "rho": rho}


def collapse_map(model: DustModel, labels) -> dict:
    """``t*(r)`` and ``g(r)`` for the self-similar data ``chi0 = 1``, ``chi1 = -(2/3) g``."""
    labels = np.asarray(labels, dtype=float)
    g = np.array([model.g(r) for r in labels])
    ts = np.array([collapse_time_quadrature(model.G(r), 1.0, -2.0 * gi / 3.0)
                   for r, gi in zip(labels, g)])
    return {"r": labels, "t_star": ts, "g": g}
