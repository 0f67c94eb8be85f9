"""Comoving self-similar quantities recovered from an Eulerian profile.

Along a profile ``(D, W)(x)`` with ``x`` the area radius ``r~`` the
following hold (``p = eps/(1-eps)``):

* ``d ln y / d ln x = (1+eps)/(W+eps)`` from the definition of ``W``;
* ``exp(2 mu) = D^(-2p) / (1+eps)^2``: the momentum equation gives
  ``mu = -p ln D + const`` and the constant makes ``exp(2mu-2lambda)/y^2 = 1``
  exactly where ``B = 0``;
* ``V = exp(-mu) x (W-1)/(1+eps)``;
* ``x dlambda/dx = (1+eps)/(W+eps) * exp(mu) dV/dx``, the self-similar form
  of the evolution equation for ``lambda``.

``lambda`` is fixed by the Hamiltonian constraint
``r~'^2 exp(-2 lambda) = 1 + eps V^2 - 4 eps Sigma W x^2`` at a single point
just left of the sonic point and integrated from there; the constraint
misfit everywhere else is the reported residual channel. ``y`` is scaled
so that ``x / y -> 1`` as ``x -> infinity``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.fitting import fit_power_law
from ..core.ode import integrate_ivp
from .params import EpsParams

__all__ = ["ComovingStateRel", "ComovingProfile", "ReconstructionDiverged",
           "reconstruct_comoving", "constraint_rhs", "CSV_COLUMNS"]

CSV_COLUMNS = ("y", "x", "d", "w", "chi", "V", "mu", "lambda", "S", "constraint_residual")


class ReconstructionDiverged(RuntimeError):
    def __init__(self, x: float, detail: str = ""):
        self.x = x
        super().__init__(f"reconstruction diverged at x={x!r} {detail}".strip())


@dataclass(frozen=True)
class ComovingStateRel:
    y: float
    x: float
    d: float
    w: float
    chi: float
    V: float
    mu: float
    lam: float


@dataclass
class ComovingProfile:
    """Comoving quantities on an increasing ``y`` grid."""

    y: np.ndarray
    x: np.ndarray
    d: np.ndarray
    w: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    params: EpsParams
    sonic_index: int
    constraint_residual: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def chi(self):
        return self.x / self.y

    @property
    def V(self):
        return np.exp(-self.mu) * self.x * (self.w - 1.0) / (1.0 + self.params.eps)

    @property
    def S(self):
        """``exp(2 mu - 2 lambda) / y^2 - 1``; vanishes at the sonic point."""
        return np.exp(2.0 * (self.mu - self.lam)) / self.y ** 2 - 1.0

    def states(self):
        V = self.V
        for i in range(self.y.size):
            yield ComovingStateRel(self.y[i], self.x[i], self.d[i], self.w[i], self.chi[i],
                                   V[i], self.mu[i], self.lam[i])

    def lapse_tail_fit(self, y_range=(1e2, 1e4)):
        m = (self.y >= y_range[0]) & (self.y <= y_range[1])
        return fit_power_law(self.y[m], np.exp(2.0 * self.mu[m]))

    def columns(self) -> dict:
        return dict(zip(CSV_COLUMNS, (self.y, self.x, self.d, self.w, self.chi, self.V,
                                       self.mu, self.lam, self.S, self.constraint_residual)))


def _lapse(D, eps):
    return -(eps / (1.0 - eps)) * np.log(D) - np.log1p(eps)


def constraint_rhs(x, D, W, eps):
    """Right side of the constraint, ``1 + eps V^2 - 4 eps Sigma W x^2``, in Eulerian variables."""
    eta = 2.0 * eps / (1.0 - eps)
    return 1.0 + eps * D ** eta * x * x * (W - 1.0) ** 2 - 4.0 * eps * D ** ((1.0 + eps) / (1.0 - eps)) * W * x * x


def _constraint_lambda(x, D, W, log_y, eps):
    """``lambda`` solved from the constraint."""
    rp = x * (W + eps) / ((1.0 + eps) * np.exp(log_y))
    return np.log(rp) - 0.5 * np.log(constraint_rhs(x, D, W, eps))


def _quadrature_rates(x, D, W, dD, dW, eps):
    """``d ln y/dx`` and ``d lambda/dx``."""
    ly = (1.0 + eps) / ((W + eps) * x)
    lam = ((W - 1.0) + x * dW + (eps / (1.0 - eps)) * (dD / D) * x * (W - 1.0)) / ((W + eps) * x)
    return ly, lam


def _gauss_integral(fn, a, b, n=24):
    t, wts = np.polynomial.legendre.leggauss(n)
    xs = 0.5 * (b - a) * t + 0.5 * (a + b)
    return 0.5 * (b - a) * np.sum(wts * fn(xs), axis=-1)


def reconstruct_comoving(prof, *, ode_tol: float = 1e-12, bridge_points: int = 21) -> ComovingProfile:
    """Comoving profile (``y``, ``mu``, ``lambda``, constraint residual) from an assembled profile."""
    system = prof.system
    params: EpsParams = system.params
    eps = params.eps
    exp = prof.meta["expansion"]
    xs, dl = exp.x_star, exp.delta_trust

    def series_rates(xx):
        D, W, _ = exp(xx, strict=False)
        dD, dW = exp.derivative(xx)
        return np.array(_quadrature_rates(xx, D, W, dD, dW, eps))

    def aug_rhs(x, s):
        D, W = s[0], s[1]
        dD, dW = system.rhs(x, s[:2])
        ly, lam = _quadrature_rates(x, D, W, dD, dW, eps)
        return np.array([dD, dW, ly, lam])

    # start left of the sonic point: ln y(x*-delta) = -int_{x*-delta}^{x*} (series), lambda from the constraint
    xl = xs - dl
    Dl, Wl, _ = exp(xl)
    ly_l, lam_int = -_gauss_integral(series_rates, xl, xs)
    lam_l = _constraint_lambda(xl, Dl, Wl, ly_l, eps)
    left = integrate_ivp(aug_rhs, xl, [Dl, Wl, ly_l, lam_l], prof.x[0], ode_tol, atol=1e-14)
    if not left.success:
        raise ReconstructionDiverged(float(left.t[-1]), left.status)

    xb = np.linspace(xl, xs + dl, bridge_points)[1:]
    Db, Wb, _ = exp(xb, strict=False)
    inc = np.array([_gauss_integral(series_rates, xl, b) for b in xb]).T
    ly_b = ly_l + inc[0]
    lam_b = lam_l + inc[1]

    right = integrate_ivp(aug_rhs, xb[-1], [Db[-1], Wb[-1], ly_b[-1], lam_b[-1]], prof.x[-1],
                          ode_tol, atol=1e-20)
    if not right.success:
        raise ReconstructionDiverged(float(right.t[-1]), right.status)

    x = np.concatenate([left.t[::-1], xb[:-1], right.t])
    st = np.concatenate([left.y[::-1], np.column_stack([Db, Wb, ly_b, lam_b])[:-1], right.y])
    D, W, ly, lam = st.T

    # gauge: x/y -> 1 at infinity, with the leading tail correction
    shift = np.log(x[-1]) + (W[-1] - 1.0) / (1.0 - eps) - ly[-1]
    ly = ly + shift
    lam = lam - shift
    y = np.exp(ly)
    if np.any(np.diff(y) <= 0):
        raise ReconstructionDiverged(float(x[np.argmin(np.diff(y))]), "(y not monotone)")

    mu = _lapse(D, eps)
    rp = x * (W + eps) / ((1.0 + eps) * y)
    resid = np.abs(np.exp(-2.0 * lam) * rp * rp / constraint_rhs(x, D, W, eps) - 1.0)
    sonic = left.t.size + bridge_points // 2 - 1
    out = ComovingProfile(y, x, D, W, mu, lam, params, sonic, resid)
    out.meta.update(
        y_star=float(y[sonic]),
        x_star=float(x[sonic]),
        sonic_S=float(out.S[sonic]),
        max_constraint_residual=float(np.max(resid)),
        lambda_ode_increment=float(lam_int),
    )
    return out
