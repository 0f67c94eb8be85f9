"""First correction of the near-dust expansion around ``phi0 = tau^(2/3)``.

``phi1`` solves ``phi1'' - 4/(9 tau^2) phi1 = -P`` with the leading-order
source ``P = tau^(1/3 - 2 gamma) r^(n-2) (1 + r^n / tau)^(-gamma)``.
Homogeneous solutions are ``tau^(4/3)`` and ``tau^(-1/3)`` (Wronskian
``-5/3``). The ``tau^(-1/3)`` coefficient is integrated from ``tau = 0``,
which kills the growing mode at collapse; its integrand is
``O(s^(5/3 - gamma))`` and converges. The ``tau^(4/3)`` coefficient has an
integrand ``O(s^-gamma)`` at 0 and is integrated from ``tau = 1``; the
homogeneous ``tau^(4/3)`` it adds is ``tau^(2/3 - delta)`` smaller than the
gain bound, since ``delta < 2/3``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

__all__ = ["NearDustRun", "NonIntegrableSource", "neardust_phi1", "leading_source",
           "homogeneous_residual", "gain_delta"]


class NonIntegrableSource(ValueError):
    pass


def gain_delta(gamma: float, n: int) -> float:
    """``2 (4/3 - gamma - 1/n)`` evaluated in rationals (``gamma`` read as its shortest decimal)."""
    g = Fraction(repr(float(gamma)))
    return float(2 * (Fraction(4, 3) - g - Fraction(1, int(n))))


def leading_source(tau, r, gamma: float, n: int):
    tau = np.asarray(tau, dtype=float)
    return tau ** (1.0 / 3.0 - 2.0 * gamma) * r ** (n - 2) * (1.0 + r ** n / tau) ** (-gamma)


def homogeneous_residual(s: float, tau) -> np.ndarray:
    """``(d^2/dtau^2 - 4/(9 tau^2)) tau^s``, scaled by ``tau^(2-s)``."""
    tau = np.asarray(tau, dtype=float)
    return (s * (s - 1.0) - 4.0 / 9.0) * np.ones_like(tau)


@dataclass
class NearDustRun:
    gamma: float
    n: int
    tau: np.ndarray = field(default_factory=lambda: np.logspace(-8, 0, 81))
    r: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 41))
    phi1: np.ndarray | None = None  # shape (len(tau), len(r))
    gain_ratio: np.ndarray | None = None

    def __post_init__(self):
        if not (1.0 < self.gamma < 4.0 / 3.0):
            raise ValueError("gamma must lie in (1, 4/3)")
        if not self.n > 1.0 / (4.0 / 3.0 - self.gamma):
            raise ValueError(f"delta = {self.delta:.6g} <= 0: need n > 1/(4/3 - gamma)")
        self.tau = np.asarray(self.tau, dtype=float)
        self.r = np.asarray(self.r, dtype=float)

    @property
    def delta(self) -> float:
        return gain_delta(self.gamma, self.n)

    @property
    def phi0(self):
        return self.tau ** (2.0 / 3.0)

    def exponent_audit(self) -> dict:
        """Small-``tau`` exponents of the two variation-of-parameters integrands at fixed ``r > 0``."""
        return {"tau^(4/3) coefficient integrand": -self.gamma,
                "tau^(-1/3) coefficient integrand": 5.0 / 3.0 - self.gamma}

    def report(self) -> dict:
        return {"gamma": self.gamma, "n": self.n, "delta": self.delta,
                "sup_gain_ratio": float(np.max(self.gain_ratio))}


def _integral(fn, a, b):
    """``int_a^b fn(s) ds`` in the variable ``log s``."""
    if a == b:
        return 0.0
    val, _ = quad(lambda u: fn(math.exp(u)) * math.exp(u), math.log(a), math.log(b),
                  epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def neardust_phi1(run: NearDustRun, source=None, *, scale: float = 1.0) -> NearDustRun:
    """Fill ``run.phi1`` and ``run.gain_ratio = |phi1| / (tau^delta phi0)``.

    ``source(tau, r)`` defaults to the leading-order form; ``scale``
    multiplies it (the map is linear).
    """
    g, n = run.gamma, run.n
    if source is None:
        def source(t, r):
            return float(leading_source(t, r, g, n))
    if 5.0 / 3.0 - g <= -1.0:
        raise NonIntegrableSource(f"non-integrable source at tau=0: {run.exponent_audit()}")
    phi1 = np.zeros((run.tau.size, run.r.size))
    for j, r in enumerate(run.r):
        if r == 0.0 and n > 2:
            continue  # the source vanishes identically on the axis

        def f(s):
            return -scale * source(s, r)

        for i, t in enumerate(run.tau):
            i1 = _integral(lambda s: s ** (-1.0 / 3.0) * f(s), 1.0, t) if t != 1.0 else 0.0
            i2 = _integral(lambda s: s ** (4.0 / 3.0) * f(s), _tiny(t), t)
            # phi = -u1 int u2 f / W + u2 int u1 f / W with W = -5/3
            phi1[i, j] = 0.6 * (t ** (4.0 / 3.0) * i1 - t ** (-1.0 / 3.0) * i2)
    run.phi1 = phi1
    run.gain_ratio = np.abs(phi1) / (run.tau[:, None] ** run.delta * run.phi0[:, None])
    return run


def _tiny(t: float) -> float:
    # lower limit standing in for 0; the integrand is O(s^(2/3)) or smaller there
    return t * 1e-16
