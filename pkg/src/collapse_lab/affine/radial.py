"""Scalar scale dynamics ``lambda'' lambda^k = delta``.

``k = 2`` is the gravitating (Goldreich-Weber) case at ``gamma = 4/3``;
``k = 3 gamma - 2`` is the isotropic reduction of the affine flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.fitting import fit_power_law
from ..core.ode import EVENT, Event, integrate_ivp

__all__ = ["RadialScale", "RadialTrajectory", "BlowDownUnresolved", "GW", "SIMPLE",
           "scale_energy", "radial_scale_evolve"]

GW = "gw"
SIMPLE = "simple"
COLLAPSE_FLOOR = 1e-8


class BlowDownUnresolved(RuntimeError):
    pass


@dataclass(frozen=True)
class RadialScale:
    lam: float
    lamdot: float
    delta: float
    mode: str = SIMPLE

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.mode not in (GW, SIMPLE):
            raise ValueError(f"unknown mode {self.mode!r}")


def _power(mode, gamma):
    return 2.0 if mode == GW else 3.0 * gamma - 2.0


def scale_energy(lam, lamdot, delta, k):
    """Conserved ``lamdot^2 / 2 + delta / ((k-1) lam^(k-1))`` of ``lam'' lam^k = delta``."""
    return 0.5 * lamdot * lamdot + delta / ((k - 1.0) * lam ** (k - 1.0))


@dataclass
class RadialTrajectory:
    t: np.ndarray
    lam: np.ndarray
    lamdot: np.ndarray
    energy: np.ndarray
    outcome: str  # "expanding", "collapse" or "bounded"
    meta: dict = field(default_factory=dict)

    @property
    def energy_drift(self) -> float:
        scale = max(abs(self.energy[0]), float(np.max(np.abs(self.energy - 0.5 * self.lamdot ** 2))))
        return float(np.max(np.abs(self.energy - self.energy[0])) / scale)


def radial_scale_evolve(state0: RadialScale, gamma: float = 4.0 / 3.0, t_end: float = 1e6,
                        *, tol: float = 1e-12) -> RadialTrajectory:
    """Integrate to ``t_end`` or to collapse; fit the late-time rate or the collapse exponent."""
    k = _power(state0.mode, gamma)
    if k <= 1:
        raise ValueError("need 3 gamma - 2 > 1")
    d = state0.delta

    # regularised clock dt/ds = lam^(3/2) keeps the collapse resolvable, as for dust
    def rhs(_, s):
        t, lam, v = s
        w = lam * math.sqrt(lam)
        return np.array([w, w * v, w * d / lam ** k])

    E0 = scale_energy(state0.lam, state0.lamdot, d, k)
    evs = [Event(lambda _, s: s[1] - COLLAPSE_FLOOR, name="collapse"),
           Event(lambda _, s: s[0] - t_end, name="t_end")]
    res = integrate_ivp(rhs, 0.0, [0.0, state0.lam, state0.lamdot], 1e15, tol, evs,
                        atol=1e-3 * tol * state0.lam, max_steps=2_000_000)
    t, lam, v = res.y.T
    E = scale_energy(lam, v, d, k)
    meta = {"mode": state0.mode, "k": k, "E0": E0}
    if res.status == EVENT and res.event_index == 0:
        # finite-time collapse: t* from the energy relation below the floor
        rest = _collapse_rest(lam[-1], E0, d, k)
        t_star = float(t[-1]) + rest
        s = t_star - t
        m = (s > 1e-6 * t_star) & (s < 1e-4 * t_star)
        if m.sum() < 5:
            raise BlowDownUnresolved(f"blow-down unresolved: {int(m.sum())} samples near t*={t_star!r}")
        meta.update(t_star=t_star, collapse_exponent=fit_power_law(s[m], lam[m]).exponent)
        outcome = "collapse"
    elif res.status == EVENT:
        tail = t >= 0.1 * t[-1]
        ratio = lam / np.where(t > 0, t, np.nan)
        i0 = int(np.argmax(tail))
        meta.update(
            rate=float(ratio[-1]),
            rate_change_last_decade=float(abs(ratio[-1] - ratio[i0]) / abs(ratio[-1])),
            slope_fit=float(np.polyfit(t[tail], lam[tail], 1)[0]),
        )
        outcome = "expanding" if v[-1] > 0 else "bounded"
    else:
        raise BlowDownUnresolved(f"integration stopped at t={t[-1]!r}: {res.status}")
    return RadialTrajectory(t, lam, v, E, outcome, meta)


def _collapse_rest(lam_e, E, d, k):
    from scipy.integrate import quad

    # time to fall from lam_e to 0: dt = dlam / sqrt(2 (E - V(lam)))
    val, _ = quad(lambda x: 1.0 / math.sqrt(2.0 * (E - d / ((k - 1.0) * x ** (k - 1.0)))), 0.0, lam_e,
                  epsabs=0.0, epsrel=1e-10)
    return val
