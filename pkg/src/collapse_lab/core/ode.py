"""Adaptive explicit Runge-Kutta integration with event localisation.

Dormand-Prince 5(4) with FSAL, a PI step-size controller and the
4th-order continuous extension for dense output. Events are scalar
functions ``g(t, y)``; a sign change across an accepted step is localised
by bisection on the dense output.

Near removable singularities (sonic points, collapse) the controller will
shrink the step until it underflows. That is reported through
``IvpResult.status`` rather than raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["Event", "IvpResult", "DenseSolution", "integrate_ivp"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

ENDPOINT = "endpoint"
EVENT = "event"
STEP_UNDERFLOW = "step_underflow"
NONFINITE = "nonfinite"
MAX_STEPS = "max_steps"


@dataclass
class Event:
    """Scalar event ``fn(t, y) = 0``.

    ``direction`` restricts detection to increasing (+1) or decreasing (-1)
    crossings; 0 accepts both. Non-terminal events are recorded only.
    """

    fn: Callable[[float, np.ndarray], float]
    terminal: bool = True
    direction: int = 0
    name: str = ""


class DenseSolution:
    """Piecewise quartic interpolant over the accepted steps."""

    def __init__(self, t_lo: np.ndarray, t_hi: np.ndarray, rcont: np.ndarray):
        self.t_lo = np.asarray(t_lo, dtype=float)
        self.t_hi = np.asarray(t_hi, dtype=float)
        self.rcont = rcont  # shape (nsteps, 5, n)
        self._sign = 1.0 if self.t_hi[0] >= self.t_lo[0] else -1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        idx = np.searchsorted(self._sign * self.t_lo, self._sign * tt, side="right") - 1
        idx = np.clip(idx, 0, len(self.t_lo) - 1)
        out = np.array([_dense_eval(self.rcont[i], self.t_lo[i], self.t_hi[i], s)
                        for i, s in zip(idx, tt)])
        return out[0] if scalar else out

    def derivative(self, t):
        """Derivative of the interpolant; carries the local truncation error."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        idx = np.searchsorted(self._sign * self.t_lo, self._sign * tt, side="right") - 1
        idx = np.clip(idx, 0, len(self.t_lo) - 1)
        out = np.array([_dense_deriv(self.rcont[i], self.t_lo[i], self.t_hi[i], s)
                        for i, s in zip(idx, tt)])
        return out[0] if scalar else out


def _dense_deriv(rc, t0, t1, t):
    theta = (t - t0) / (t1 - t0)
    th1 = 1.0 - theta
    a = rc[3] + th1 * rc[4]
    da = -rc[4]
    b = rc[2] + theta * a
    db = a + theta * da
    c = rc[1] + th1 * b
    dc = -b + th1 * db
    return (c + theta * dc) / (t1 - t0)


def _dense_eval(rc, t0, t1, t):
    theta = (t - t0) / (t1 - t0)
    th1 = 1.0 - theta
    return rc[0] + theta * (rc[1] + th1 * (rc[2] + theta * (rc[3] + th1 * rc[4])))


@dataclass
class IvpResult:
    """Trajectory on the accepted-step grid plus the reason integration ended."""

    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)
    status: str
    event_index: int | None = None
    t_events: list = field(default_factory=list)
    y_events: list = field(default_factory=list)
    nfev: int = 0
    message: str = ""
    dense: DenseSolution | None = None

    @property
    def success(self) -> bool:
        return self.status in (ENDPOINT, EVENT)

    def sol(self, t):
        if self.dense is None:
            raise ValueError("dense output was not recorded")
        return self.dense(t)


def _rms(x):
    return float(np.sqrt(np.mean(x * x)))


def integrate_ivp(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    state0: Sequence[float],
    t_end: float,
    tol: float = 1e-10,
    events: Sequence[Event | Callable] = (),
    *,
    atol: float | None = None,
    h0: float | None = None,
    max_step: float = np.inf,
    max_steps: int = 200_000,
    event_tol: float = 1e-12,
    dense: bool = False,
) -> IvpResult:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` towards ``t_end``.

    Direction is taken from ``sign(t_end - t0)``. ``tol`` is the relative
    tolerance of the local error estimate; ``atol`` defaults to
    ``1e-3 * tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if t_end == t0:
        raise ValueError("t_end must differ from t0")
    if atol is None:
        atol = 1e-3 * tol
    evs = [e if isinstance(e, Event) else Event(e) for e in events]
    direction = 1.0 if t_end > t0 else -1.0
    t = float(t0)
    y = np.array(state0, dtype=float)
    n = y.size
    nfev = 0

    def f(tt, yy):
        nonlocal nfev
        nfev += 1
        return np.asarray(rhs(tt, yy), dtype=float)

    k1 = f(t, y)
    if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(y))):
        return IvpResult(np.array([t]), y[None, :], NONFINITE, nfev=nfev,
                         message=f"non-finite rhs at t={t!r}")

    span = abs(t_end - t0)
    max_step = min(max_step, span)
    if h0 is None:
        sc = atol + tol * np.abs(y)
        d0, d1 = _rms(y / sc), _rms(k1 / sc)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, max_step)
        y1 = y + direction * h * k1
        k2 = f(t + direction * h, y1)
        d2 = _rms((k2 - k1) / sc) / h if np.all(np.isfinite(k2)) else np.inf
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        h = min(100 * h, h1, max_step)
    else:
        h = min(abs(h0), max_step)

    ts, ys, rconts, seg = [t], [y.copy()], [], []
    g_old = [e.fn(t, y) for e in evs]
    t_events: list = [[] for _ in evs]
    y_events: list = [[] for _ in evs]
    beta, expo1, safe = 0.04, 0.2 - 0.04 * 0.75, 0.9
    facold = 1e-4
    reject = False
    nonfinite_streak = False
    status, message, ev_hit = ENDPOINT, "", None

    for _ in range(max_steps):
        remaining = abs(t_end - t)
        if remaining <= 1e-15 * max(1.0, abs(t)):
            status = ENDPOINT
            break
        h = min(h, remaining)
        if h < 1e-14 * max(1.0, abs(t)):
            status = NONFINITE if nonfinite_streak else STEP_UNDERFLOW
            message = f"step size underflow at t={t!r}"
            break
        hs = direction * h
        ks = [k1]
        ok = True
        for s in range(1, 7):
            ys_ = y + hs * sum(a * k for a, k in zip(_A[s], ks) if a != 0.0)
            ks.append(f(t + _C[s] * hs, ys_))
            if not np.all(np.isfinite(ks[-1])):
                ok = False
                break
        if not ok:
            nonfinite_streak = True
            h *= 0.1
            reject = True
            continue
        K = np.array(ks)
        y_new = y + hs * (_B @ K)
        err_vec = hs * (_E @ K)
        sc = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / sc)
        if not np.isfinite(err):
            nonfinite_streak = True
            h *= 0.1
            reject = True
            continue
        nonfinite_streak = False
        fac11 = err**expo1
        fac = fac11 / facold**beta
        fac = max(0.1, min(5.0, fac / safe))
        h_new = h / fac
        if err > 1.0:
            h = h / min(5.0, fac11 / safe)
            reject = True
            continue

        # accepted step
        facold = max(err, 1e-4)
        t_new = t_end if h == remaining else t + hs
        k7 = K[6]
        rc = np.empty((5, n))
        rc[0] = y
        rc[1] = y_new - y
        rc[2] = hs * K[0] - rc[1]
        rc[3] = rc[1] - hs * k7 - rc[2]
        rc[4] = hs * (_D @ K)

        stop = False
        for i, ev in enumerate(evs):
            g_new = ev.fn(t_new, y_new)
            g0 = g_old[i]
            crossed = (g0 < 0 <= g_new) or (g0 > 0 >= g_new)
            if crossed and ev.direction:
                crossed = np.sign(g_new - g0) == np.sign(ev.direction)
            if crossed:
                te, ye = _locate(ev.fn, rc, t, t_new, g0, event_tol)
                t_events[i].append(te)
                y_events[i].append(ye)
                if ev.terminal and (not stop or direction * (te - t_stop) < 0):
                    stop, t_stop, y_stop, ev_hit = True, te, ye, i
            g_old[i] = g_new
        rconts.append(rc)
        seg.append((t, t_new))
        if stop:
            ts.append(t_stop)
            ys.append(y_stop)
            status, t = EVENT, t_stop
            break
        ts.append(t_new)
        ys.append(y_new)
        t, y, k1 = t_new, y_new, k7
        if not np.all(np.isfinite(y)):
            status, message = NONFINITE, f"non-finite state at t={t!r}"
            break
        if reject:
            h_new = min(h_new, h)
            reject = False
        h = min(h_new, max_step)
    else:
        status, message = MAX_STEPS, f"max_steps={max_steps} reached at t={t!r}"

    t_arr = np.array(ts)
    y_arr = np.array(ys)
    dsol = None
    if dense and rconts:
        lo, hi = np.array(seg).T
        dsol = DenseSolution(lo, hi, np.array(rconts))
    return IvpResult(
        t_arr, y_arr, status,
        event_index=ev_hit,
        t_events=[np.array(v) for v in t_events],
        y_events=[np.array(v) for v in y_events],
        nfev=nfev, message=message, dense=dsol,
    )


def _locate(fn, rc, t0, t1, g0, tol):
    """Bisect the dense output of one step for a zero of ``fn``."""
    a, b = t0, t1
    ga = g0
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        ym = _dense_eval(rc, t0, t1, m)
        gm = fn(m, ym)
        if gm == 0.0:
            a = b = m
            break
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b = m
    te = b
    return te, _dense_eval(rc, t0, t1, te)
