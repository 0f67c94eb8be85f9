"""Shooting pipeline shared by the self-similar collapse systems.

A system is any object providing

``names``
    labels of the coordinate and the two unknowns, e.g. ``("y", "rho", "omega")``
``friedmann``
    the constant interior solution ``(a_F, b_F)``
``rhs(x, u)``
    right-hand side, no floor on the denominator
``denominator(x, a, b)``
    sonic denominator (vectorised); positive inside the sonic point
``residual``
    polynomial-form residual for the formal series engine
``sonic_state(x_star)``
    order-zero coefficients at a sonic point
``ode_residual(x, a, b, da, db)``
    ``(a' - rhs_a, b' - rhs_b)`` evaluated on given derivatives

The second unknown plays the role of the relative velocity: the left
shooting watches it cross the Friedmann value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fitting import fit_power_law
from .formal import growth_constant, quadratic_pair_roots, series_residual, solve_higher_orders
from .ode import EVENT, Event, integrate_ivp
from .roots import RootBracket, refine_root
from .series import SeriesF

__all__ = [
    "TYPE1",
    "TYPE2",
    "DIP",
    "STAY",
    "BranchInconsistency",
    "OutsideTrustRadius",
    "ShootingError",
    "WindowNotStraddling",
    "SonicExpansion",
    "SelfSimProfile",
    "Classification",
    "branch_roots",
    "expand_at_sonic",
    "classify",
    "shoot",
    "extend_right",
    "assemble",
    "extrapolate_origin",
]

TYPE1 = "type1"  # Larson-Penston branch
TYPE2 = "type2"  # Hunter branch
DIP = 1
NO_BRANCH = 0
STAY = -1


class BranchInconsistency(ValueError):
    """The requested branch has no real first-order coefficients."""


class OutsideTrustRadius(ValueError):
    pass


class ShootingError(RuntimeError):
    pass


class WindowNotStraddling(ShootingError):
    def __init__(self, window, classes):
        self.window = tuple(window)
        self.classes = classes
        super().__init__(f"window {self.window} not straddling: endpoint classifications {classes}")


@dataclass
class SonicExpansion:
    x_star: float
    branch: str
    coeffs: np.ndarray  # shape (2, N+1)
    delta_trust: float
    system: Any = None

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def y_star(self) -> float:
        return self.x_star

    def series(self, i: int) -> SeriesF:
        return SeriesF(self.coeffs[i], x0=self.x_star)

    def growth_constant(self) -> float:
        return growth_constant(self.coeffs, start=2)

    def tail_estimate(self, x):
        """Size of the last retained term at ``x``."""
        top = float(np.max(np.abs(self.coeffs[:, -1])))
        return top * np.abs(np.asarray(x, dtype=float) - self.x_star) ** self.order

    def __call__(self, x, *, strict: bool = True):
        """``(a, b, tail_estimate)`` at ``x``."""
        if strict and np.any(np.abs(np.asarray(x) - self.x_star) > self.delta_trust * (1 + 1e-12)):
            raise OutsideTrustRadius(
                f"|x - x*| exceeds trust radius {self.delta_trust:.3e} around {self.x_star}")
        return self.series(0)(x), self.series(1)(x), self.tail_estimate(x)

    def derivative(self, x):
        return self.series(0).deriv()(x), self.series(1).deriv()(x)


def branch_roots(system, x_star: float) -> dict:
    """First-order coefficients of the two analytic branches through ``x_star``.

    Roots of the quadratic order-one system at which the denominator also
    vanishes to first order describe the singular sonic line itself and are
    dropped. The remaining root with the larger velocity slope is labelled
    Type 1, the other Type 2.
    """
    c0 = np.asarray(system.sonic_state(x_star), dtype=float)
    low = c0[:, None]
    res = system.residual

    def F(c1):
        return series_residual(res, x_star, np.column_stack([low, c1]), 1)

    def slope(c1):
        co = np.column_stack([c0, c1, [0.0, 0.0]])
        x = SeriesF.variable(x_star, 2)
        G = system.denominator(x, SeriesF(co[0], x_star), SeriesF(co[1], x_star))
        return float(G[1])

    roots = [r for r in quadratic_pair_roots(F) if abs(slope(r)) > 1e-9]
    roots.sort(key=lambda r: r[1])
    if not roots:
        return {}
    if len(roots) == 1:
        return {TYPE1: roots[0]}
    return {TYPE1: roots[-1], TYPE2: roots[0]}


def expand_at_sonic(system, x_star: float, branch: str = TYPE1, N: int = 40,
                    delta_fraction: float = 0.05) -> SonicExpansion:
    """Taylor coefficients through order ``N`` of the branch through ``x_star``."""
    if N < 2:
        raise ValueError("order N must be at least 2")
    if branch not in (TYPE1, TYPE2):
        raise ValueError(f"unknown branch {branch!r}")
    c0 = np.asarray(system.sonic_state(x_star), dtype=float)
    roots = branch_roots(system, x_star)
    if branch not in roots:
        raise BranchInconsistency(f"no real {branch} root of the first-order system at x*={x_star}")
    low = np.column_stack([c0, roots[branch]])
    coeffs = solve_higher_orders(system.residual, x_star, low, N)
    return SonicExpansion(x_star, branch, coeffs, delta_fraction * x_star, system)


@dataclass
class SelfSimProfile:
    """Solution on a strictly increasing grid with per-point diagnostics."""

    x: np.ndarray
    u: np.ndarray  # shape (n, 2)
    system: Any
    sonic_index: int | None = None
    residual: np.ndarray | None = None  # shape (n, 2), absolute ODE residual
    from_series: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.x.size
        if self.residual is None:
            self.residual = np.zeros((n, 2))
        if self.from_series is None:
            self.from_series = np.zeros(n, dtype=bool)

    @property
    def denominator(self) -> np.ndarray:
        return self.system.denominator(self.x, self.u[:, 0], self.u[:, 1])

    @property
    def x_star(self) -> float | None:
        return None if self.sonic_index is None else float(self.x[self.sonic_index])

    def interpolate(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.x, self.u[:, 0]), np.interp(x, self.x, self.u[:, 1])


@dataclass
class Classification:
    x_star: float
    verdict: int  # DIP or STAY
    reason: str
    x_end: float


def _rhs(system):
    return lambda x, u: system.rhs(x, u)


def _left_events(system, cap=50.0):
    bF = system.friedmann[1]
    return [
        Event(lambda x, u: u[1] - bF, name="below_friedmann"),
        Event(lambda x, u: system.denominator(x, u[0], u[1]), name="second_sonic"),
        Event(lambda x, u: u[1] - cap, name="velocity_blowup"),
    ]


def _series_start(exp: SonicExpansion, side: int):
    x0 = exp.x_star + side * exp.delta_trust
    a, b, _ = exp(x0)
    return x0, np.array([a, b])


def classify(system, x_star: float, *, N: int = 40, delta_fraction: float = 0.05,
             x_min: float = 1e-4, ode_tol: float = 1e-11) -> Classification:
    """Whether the leftward continuation from ``x_star`` dips below the
    Friedmann velocity (DIP) or not (STAY: reaches ``x_min`` above it, meets a
    second sonic point, or blows up)."""
    exp = expand_at_sonic(system, x_star, TYPE1, N, delta_fraction)
    x0, u0 = _series_start(exp, -1)
    if u0[1] < system.friedmann[1]:
        return Classification(x_star, DIP, "starts below", x0)
    evs = _left_events(system)
    res = integrate_ivp(_rhs(system), x0, u0, x_min, ode_tol, evs)
    if res.status == EVENT and res.event_index == 0:
        return Classification(x_star, DIP, evs[0].name, float(res.t[-1]))
    reason = res.status if res.status != EVENT else evs[res.event_index].name
    return Classification(x_star, STAY, reason, float(res.t[-1]))


def _integrate_left(exp, x_min, ode_tol):
    x0, u0 = _series_start(exp, -1)
    evs = _left_events(exp.system)[1:]
    return integrate_ivp(_rhs(exp.system), x0, u0, x_min, ode_tol, evs, dense=True)


def extrapolate_origin(x, v, x_lo: float, x_hi: float) -> float:
    """Value at ``x = 0`` from a least-squares fit ``v = a + b x^2`` on ``[x_lo, x_hi]``.

    Regular solutions are even at the centre, so the fit removes the
    leading quadratic error (Richardson-type extrapolation).
    """
    m = (x >= x_lo) & (x <= x_hi)
    if m.sum() < 2:
        raise ShootingError(f"not enough samples in [{x_lo}, {x_hi}] to extrapolate to the origin")
    A = np.column_stack([np.ones(m.sum()), x[m] ** 2])
    coef, *_ = np.linalg.lstsq(A, v[m], rcond=None)
    return float(coef[0])


def _defect(res, system):
    """ODE residual at the midpoint of each accepted step, stored at its later node."""
    t = res.t
    out = np.zeros((t.size, 2))
    if res.dense is None or t.size < 2:
        return out
    mid = 0.5 * (t[:-1] + t[1:])
    u = res.dense(mid)
    du = res.dense.derivative(mid)
    r1, r2 = system.ode_residual(mid, u[:, 0], u[:, 1], du[:, 0], du[:, 1])
    out[1:, 0], out[1:, 1] = np.abs(r1), np.abs(r2)
    return out


def shoot(system, window=(2.0, 3.0), tol: float = 1e-12, *, N: int = 40,
          delta_fraction: float = 0.05, x_min: float = 1e-4, ode_tol: float = 1e-12,
          scan_points: int = 11, separation_tol: float = 1e-6):
    """Locate the Friedmann-connecting sonic point by bisection.

    The window is sampled first; the bracket is the rightmost pair where a
    non-dipping candidate is followed by a dipping one, i.e. the lower edge
    of the run of dippers that reaches the right end of the window.

    Integrations from either end of the final bracket track the connecting
    solution only until the unstable centre mode separates them; the left
    profile stops where they differ by more than ``separation_tol``
    (``meta["x_trusted"]``). Returns ``(x_star_bar, left_profile)``.
    """
    a, b = map(float, window)
    if not (0 < a < b):
        raise ValueError(f"invalid window {window}")

    def verdict(xs):
        try:
            return classify(system, xs, N=N, delta_fraction=delta_fraction,
                            x_min=x_min, ode_tol=ode_tol).verdict
        except BranchInconsistency:
            # no real analytic branch here (the two branches turned complex)
            return NO_BRANCH

    grid = np.linspace(a, b, max(scan_points, 2))
    verdicts = [verdict(xs) for xs in grid]
    bracket = None
    for i in range(len(grid) - 2, -1, -1):
        if verdicts[i] == STAY and verdicts[i + 1] == DIP:
            bracket = RootBracket(grid[i], grid[i + 1], -1.0, 1.0)
            break
    if bracket is None:
        raise WindowNotStraddling(window, (verdicts[0], verdicts[-1]))
    x_bar = refine_root(lambda xs: float(verdict(xs)), bracket, tol)

    exp_lo = expand_at_sonic(system, x_bar - 0.5 * tol, TYPE1, N, delta_fraction)
    exp_hi = expand_at_sonic(system, x_bar + 0.5 * tol, TYPE1, N, delta_fraction)
    res_lo = _integrate_left(exp_lo, x_min, ode_tol)
    res = _integrate_left(exp_hi, x_min, ode_tol)
    other = res_lo.dense(np.clip(res.t, res_lo.t[-1], res_lo.t[0]))
    gap = np.max(np.abs(res.y - other) / np.maximum(1.0, np.abs(res.y)), axis=1)
    gap[res.t < res_lo.t[-1]] = np.inf
    bad = np.nonzero(gap > separation_tol)[0]
    n_keep = int(bad[0]) if bad.size else res.t.size
    if n_keep < 2:
        raise ShootingError(f"left integration failed at x={res.t[0]!r}")
    defect = _defect(res, system)[:n_keep][::-1]
    x = res.t[:n_keep][::-1]
    u = res.y[:n_keep][::-1]
    prof = SelfSimProfile(x, u, system, residual=defect)
    x_lo = float(x[0])
    prof.meta.update(
        x_star_bar=x_bar,
        expansion=exp_hi,
        x_trusted=x_lo,
        origin_values=(extrapolate_origin(x, u[:, 0], x_lo, 10 * x_lo),
                       extrapolate_origin(x, u[:, 1], x_lo, 10 * x_lo)),
        scan=list(zip(grid.tolist(), verdicts)),
        left_status=res.status,
    )
    return x_bar, prof


def extend_right(exp: SonicExpansion, x_max: float = 1e4, *, ode_tol: float = 1e-12,
                 tail_range=(1e2, 1e4)) -> SelfSimProfile:
    """Integrate right from ``x_star + delta`` to ``x_max``; fit the density tail."""
    system = exp.system
    x0, u0 = _series_start(exp, +1)
    ev = Event(lambda x, u: system.denominator(x, u[0], u[1]), name="second_sonic")
    res = integrate_ivp(_rhs(system), x0, u0, x_max, ode_tol, [ev], dense=True, atol=1e-20)
    if not res.success or res.status == EVENT:
        raise ShootingError(f"right integration failed at x={res.t[-1]!r} ({res.status})")
    prof = SelfSimProfile(res.t, res.y, system, residual=_defect(res, system))
    lo, hi = tail_range
    m = (res.t >= lo) & (res.t <= min(hi, x_max))
    prof.meta["tail_fit"] = fit_power_law(res.t[m], res.y[m, 0]) if m.sum() >= 3 else None
    prof.meta["right_status"] = res.status
    return prof


def assemble(system, window=(2.0, 3.0), tol: float = 1e-12, *, N: int = 40,
             delta_fraction: float = 0.05, x_min: float = 1e-4, x_max: float = 1e4,
             ode_tol: float = 1e-12, bridge_points: int = 21, scan_points: int = 11,
             separation_tol: float = 1e-6) -> SelfSimProfile:
    """Left shot, series bridge across the sonic point, and far-field extension."""
    x_bar, left = shoot(system, window, tol, N=N, delta_fraction=delta_fraction, x_min=x_min,
                        ode_tol=ode_tol, scan_points=scan_points, separation_tol=separation_tol)
    exp = left.meta["expansion"]
    right = extend_right(exp, x_max, ode_tol=ode_tol)

    xb = np.linspace(exp.x_star - exp.delta_trust, exp.x_star + exp.delta_trust, bridge_points)[1:-1]
    ab = exp.series(0)(xb)
    bb = exp.series(1)(xb)
    dab, dbb = exp.derivative(xb)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1, r2 = system.ode_residual(xb, ab, bb, dab, dbb)
    mid = bridge_points // 2 - 1
    r1[mid] = r2[mid] = 0.0  # removable singularity: residual defined by continuity

    x = np.concatenate([left.x, xb, right.x])
    u = np.concatenate([left.u, np.column_stack([ab, bb]), right.u])
    resid = np.concatenate([left.residual, np.abs(np.column_stack([r1, r2])), right.residual])
    series = np.concatenate([np.zeros(left.x.size, bool), np.ones(xb.size, bool),
                             np.zeros(right.x.size, bool)])
    prof = SelfSimProfile(x, u, system, left.x.size + mid, resid, series)
    prof.meta.update(left.meta)
    prof.meta.update(right.meta)
    prof.meta["x_star_bar"] = x_bar
    return prof
