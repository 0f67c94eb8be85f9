"""Continuation of the self-similar solution past ``tau = 0`` and null slopes.

In the chart ``Y = y^(-(1-eps)/(1+eps))`` (odd extension to ``Y < 0``) the
unknowns ``d``, ``w`` and ``chi = x / y`` obey an ODE system that is regular
singular at ``Y = 0``. A Frobenius series is matched to the Eulerian tail
there; the free data are ``dh0 = lim d / Y^2`` and ``w1 = lim (w - 1) / Y``
(``chi(0) = 1`` by the choice of the ``y`` scale). The series starts the
integration just below ``Y = 0``, which then runs until ``w`` blows up at
``Y_ms``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.fitting import fit_power_law
from ..core.formal import solve_higher_orders
from ..core.ode import EVENT, Event, integrate_ivp
from ..core.roots import RootBracket, refine_root, scan_brackets
from ..core.series import SeriesF, series_pow
from .equations import quadratic_form
from .params import EpsParams

__all__ = [
    "NoBlowUp",
    "NoSignChange",
    "ChartSeries",
    "Extension",
    "chart_rhs",
    "chart_denominator",
    "tail_matching",
    "chart_series",
    "extend_upper",
    "null_slope",
    "NullSlopeRoots",
    "rng_roots",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("Y", "y", "d", "w", "chi", "C", "F")


class NoBlowUp(RuntimeError):
    def __init__(self, Y_reached: float, detail: str = ""):
        self.Y_reached = Y_reached
        super().__init__(f"no blow-up detected before Y_floor (reached Y={Y_reached!r}) {detail}".strip())


class NoSignChange(RuntimeError):
    def __init__(self, table):
        self.table = table
        super().__init__(f"no sign change found in {len(table)} samples of the null-slope function")


def chart_denominator(Y, d, w, chi, params: EpsParams):
    """Sonic denominator ``C`` of the chart system (``B / y^2``)."""
    eta = params.eta
    return np.power(d, -eta) * np.power(np.abs(Y), 2.0 + 2.0 * eta) - chi * chi * quadratic_form(d, w, params.eps)


def chart_rhs(Y, state, params: EpsParams):
    d, w, chi = state
    e = params.eps
    C = chart_denominator(Y, d, w, chi, params)
    q = chi * chi * (w + e) ** 2 * (d - w) / (Y * C)
    return np.array([
        2.0 * d * q,
        -(w + e) * (1.0 - 3.0 * w) / ((1.0 - e) * Y) - 2.0 * (1.0 + e) * w * q / (1.0 - e),
        (1.0 - w) * chi / ((1.0 - e) * Y),
    ])


def _series_residual_factory(params: EpsParams):
    e, eta = params.eps, params.eta

    def residual(Y, states):
        dh, w, chi = states
        d = Y * Y * dh
        C = series_pow(dh, -eta) * Y * Y - chi * chi * quadratic_form(d, w, e)
        r1 = Y * C * dh.deriv() + 2.0 * dh * C - 2.0 * chi * chi * dh * (w + e) * (w + e) * (d - w)
        r2 = ((1.0 - e) * Y * C * w.deriv() + (w + e) * (1.0 - 3.0 * w) * C
              + 2.0 * (1.0 + e) * chi * chi * w * (w + e) * (w + e) * (d - w))
        r3 = (1.0 - e) * Y * chi.deriv() - (1.0 - w) * chi
        return [r1, r2, r3]

    return residual


@dataclass
class ChartSeries:
    """Series in ``Y`` for ``(d / Y^2, w, chi)`` at ``Y = 0``."""

    coeffs: np.ndarray  # shape (3, order + 1)
    params: EpsParams

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        dh, w, chi = (SeriesF(c)(Y) for c in self.coeffs)
        return Y * Y * dh, w, chi

    def tail_estimate(self, Y):
        return float(np.max(np.abs(self.coeffs[:, -1]))) * np.abs(Y) ** self.order


def tail_matching(comoving, y_range=(1e2, 1e4)):
    """``(dh0, w1)`` from quadratic fits in ``Y`` of the comoving tail."""
    p = comoving.params.chart_exponent
    m = (comoving.y >= y_range[0]) & (comoving.y <= y_range[1])
    Y = comoving.y[m] ** (-p)
    dh = comoving.d[m] / Y ** 2
    g = (comoving.w[m] - 1.0) / Y
    dh0 = float(np.polyfit(Y, dh, 2)[-1])
    w1 = float(np.polyfit(Y, g, 2)[-1])
    return dh0, w1


def chart_series(dh0: float, w1: float, params: EpsParams, order: int = 3) -> ChartSeries:
    """Frobenius series with the given free data, solved order by order."""
    res = _series_residual_factory(params)
    low = np.array([[dh0], [1.0], [1.0]])
    coeffs = solve_higher_orders(res, 0.0, low, order, fixed={(1, 1): w1})
    return ChartSeries(coeffs, params)


@dataclass
class Extension:
    """Trajectory of ``(d, w, chi)`` on ``Y`` decreasing from ``0`` towards ``Y_ms``."""

    Y: np.ndarray
    d: np.ndarray
    w: np.ndarray
    chi: np.ndarray
    params: EpsParams
    series: ChartSeries
    Y_ms: float
    meta: dict = field(default_factory=dict)
    dense: object = None
    Y_start: float = 0.0

    def state_at(self, Y):
        """``(d, w, chi)`` at ``Y`` in ``(Y_ms, 0)``: series near 0, dense output elsewhere."""
        Y = float(Y)
        if Y >= self.Y_start:
            return self.series(Y)
        return tuple(self.dense(Y))

    def slope_to_chart(self, y):
        return -np.abs(y) ** (-self.params.chart_exponent)

    def F_at_slope(self, y) -> float:
        """Null-slope function at similarity slope ``y < y_ms``."""
        Y = self.slope_to_chart(y)
        d, w, chi = self.state_at(Y)
        return float(null_slope(Y, d, w, chi, self.params))

    @property
    def y_ms(self) -> float:
        return -abs(self.Y_ms) ** (-1.0 / self.params.chart_exponent)

    @property
    def y(self):
        """Similarity slope ``y`` (negative in the upper half plane)."""
        return -np.abs(self.Y) ** (-1.0 / self.params.chart_exponent)

    @property
    def C(self):
        return chart_denominator(self.Y, self.d, self.w, self.chi, self.params)

    @property
    def F(self):
        return null_slope(self.Y, self.d, self.w, self.chi, self.params)

    def columns(self) -> dict:
        return dict(zip(CSV_COLUMNS, (self.Y, self.y, self.d, self.w, self.chi, self.C, self.F)))


def null_slope(Y, d, w, chi, params):
    """``eps y^2 exp(2 lambda - 2 mu) - 1`` in chart variables."""
    e = params.eps
    k = chi * chi * (w + e) ** 2
    C = chart_denominator(Y, d, w, chi, params)
    with np.errstate(divide="ignore", invalid="ignore"):  # infinite at the blow-up end
        return e * k / (C + k) - 1.0


def extend_upper(comoving, *, order: int = 3, Y_start: float = -1e-3, Y_floor: float = -50.0,
                 w_blowup: float = 1e8, ode_tol: float = 1e-12) -> Extension:
    """Match the series at ``Y = 0`` and integrate to negative ``Y`` until ``w`` blows up."""
    params = comoving.params
    dh0, w1 = tail_matching(comoving)
    ser = chart_series(dh0, w1, params, order)
    d0, w0, chi0 = ser(Y_start)

    ev = Event(lambda Y, s: s[1] - w_blowup, terminal=False, name="w_blowup")
    res = integrate_ivp(lambda Y, s: chart_rhs(Y, s, params), Y_start, [d0, w0, chi0], Y_floor,
                        ode_tol, [ev], atol=1e-14, dense=True)
    crossed = len(res.t_events[0]) > 0
    if not crossed:
        raise NoBlowUp(float(res.t[-1]), f"(status {res.status}, w={res.y[-1, 1]:.3e})")

    # prepend the series segment on (Y_start, 0)
    Ys = -np.logspace(-8, np.log10(-Y_start), 40, endpoint=False)
    ds, ws, cs = ser(Ys)
    Y = np.concatenate([Ys, res.t])
    st = np.concatenate([np.column_stack([ds, ws, cs]), res.y])
    order_idx = np.argsort(-Y)
    Y, st = Y[order_idx], st[order_idx]

    # divergence: 1/w linear in Y near the end (Riccati-type), over the last two decades of w
    w = st[:, 1]
    tail = (w >= 1e-2 * w_blowup) & np.isfinite(w)
    slope, icpt = np.polyfit(Y[tail], 1.0 / w[tail], 1)
    Y_ms_fit = -icpt / slope
    ratio = st[:, 0] / st[:, 1]
    # d/w -> 0 as Y -> 0-, so the lower sandwich constant is taken over the integrated part
    neg = (Y <= Y_start) & np.isfinite(ratio)
    rate = fit_power_law(Y[tail] - Y_ms_fit, w[tail]) if np.all(Y[tail] > Y_ms_fit) else None
    ext = Extension(Y, st[:, 0], w, st[:, 2], params, ser, float(res.t[-1]),
                    dense=res.dense, Y_start=Y_start)
    ext.meta.update(
        dh0=dh0, w1=w1,
        series_coeffs=ser.coeffs,
        series_tail_at_start=ser.tail_estimate(Y_start),
        Y_ms_fit=float(Y_ms_fit),
        status=res.status,
        w_blowup_at=float(res.t_events[0][0]),
        divergence_rate=None if rate is None else rate.exponent,
        d_over_w_min=float(np.min(ratio[neg])),
        d_over_w_max=float(np.max(ratio[neg])),
        d_end=float(st[-1, 0]), w_end=float(w[-1]), inv_chi_end=float(1.0 / st[-1, 2]),
    )
    return ext


@dataclass
class NullSlopeRoots:
    roots: list
    table: np.ndarray  # columns y, F
    y_ms: float
    F_near_ms: float
    F_far: float
    negative_sample: tuple | None


def rng_roots(ext: Extension, *, n_samples: int = 400, y_far: float = 1e6, gap_min: float = 1e-9,
              tol: float = 1e-12) -> NullSlopeRoots:
    """Similarity slopes ``y < y_ms`` where the null-slope function vanishes.

    ``|y|`` is sampled log-uniformly between ``|y_ms| (1 + gap_min)`` and
    ``y_far`` (the two ends where the function diverges); each sign change is
    refined by bisection in ``y``.
    """
    y_ms = ext.y_ms
    # cluster samples towards both ends: log spacing in the distance from y_ms and in |y|
    near = -(abs(y_ms) + abs(y_ms) * np.logspace(np.log10(gap_min), 0, n_samples // 2, endpoint=False))
    far = -np.logspace(np.log10(2 * abs(y_ms)), np.log10(y_far), n_samples - n_samples // 2)
    ys = np.concatenate([near, far])
    ys = np.sort(ys)[::-1]  # from y_ms outwards
    F = np.array([ext.F_at_slope(v) for v in ys])
    table = np.column_stack([ys, F])
    neg = np.nonzero(F < 0)[0]
    if neg.size == 0:
        raise NoSignChange(table)
    asc = ys[::-1]
    brackets = scan_brackets(ext.F_at_slope, asc)
    roots = [refine_root(ext.F_at_slope, b, tol=tol * max(1.0, abs(b.a))) for b in brackets]
    return NullSlopeRoots(sorted(roots), table, y_ms, float(F[0]), float(F[-1]),
                          (float(ys[neg[0]]), float(F[neg[0]])))
