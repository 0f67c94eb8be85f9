"""Estimator-style front ends: construct with parameters, ``fit()``, read ``*_`` attributes.

``fit`` takes no data (the problems are parameter-driven) and returns
``self``; ``predict`` interpolates the fitted profile.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import validation as v
from .affine.lane_emden import lane_emden_shoot
from .newtonian.params import GammaParams
from .newtonian.shooting import assemble_lp
from .relativistic.comoving import reconstruct_comoving
from .relativistic.extension import extend_upper, rng_roots
from .relativistic.params import EpsParams
from .relativistic.shooting import assemble_rel

__all__ = ["SelfSimilarCollapse", "RelativisticCollapse", "LaneEmdenProfile"]


class SelfSimilarCollapse(BaseEstimator):
    """Larson-Penston (``gamma = 1``) or Yahil (``gamma > 1``) self-similar profile."""

    def __init__(self, gamma=1.0, window=(2.0, 3.0), tol=1e-12, y_min=1e-4, y_max=1e4,
                 order=40, ode_tol=1e-12):
        self.gamma = gamma
        self.window = window
        self.tol = tol
        self.y_min = y_min
        self.y_max = y_max
        self.order = order
        self.ode_tol = ode_tol

    def fit(self, X=None, y=None):
        params = GammaParams(v.check_gamma(self.gamma))
        window = v.check_window(self.window)
        prof = assemble_lp(params, window, v.check_positive(self.tol, "tol"),
                           y_min=self.y_min, y_max=self.y_max, N=int(self.order),
                           ode_tol=self.ode_tol)
        self.profile_ = prof
        self.y_star_ = float(prof.meta["y_star_bar"])
        self.omega0_ = float(prof.meta["omega0"])
        self.rho0_ = float(prof.meta["rho0"])
        self.diagnostics_ = prof.meta["diagnostics"]
        return self

    def predict(self, y):
        """``(rho, omega)`` at ``y``, shape ``(n, 2)``, by linear interpolation of the profile."""
        v.check_is_fitted(self, "profile_")
        rho, omega = self.profile_.interpolate(v.check_finite_grid(y, "y"))
        return np.column_stack([rho, omega])


class RelativisticCollapse(BaseEstimator):
    """Relativistic Larson-Penston profile, its comoving form, upper extension and null slopes."""

    def __init__(self, eps=0.01, window=None, tol=1e-12, x_min=1e-4, x_max=1e4, order=40,
                 ode_tol=1e-12, extension=True):
        self.eps = eps
        self.window = window
        self.tol = tol
        self.x_min = x_min
        self.x_max = x_max
        self.order = order
        self.ode_tol = ode_tol
        self.extension = extension

    def fit(self, X=None, y=None):
        params = EpsParams(v.check_eps(self.eps))
        window = None if self.window is None else v.check_window(self.window)
        prof = assemble_rel(params, window, v.check_positive(self.tol, "tol"), x_min=self.x_min,
                            x_max=self.x_max, N=int(self.order), ode_tol=self.ode_tol)
        self.profile_ = prof
        self.x_star_ = float(prof.meta["x_star_bar"])
        self.diagnostics_ = prof.meta["diagnostics"]
        self.comoving_ = reconstruct_comoving(prof)
        if self.extension and params.eps > 0:
            self.extension_ = extend_upper(self.comoving_)
            self.Y_ms_ = self.extension_.Y_ms
            self.null_slopes_ = rng_roots(self.extension_)
            self.roots_ = list(self.null_slopes_.roots)
        return self

    def predict(self, x):
        """``(D, W)`` at ``x``, shape ``(n, 2)``."""
        v.check_is_fitted(self, "profile_")
        D, W = self.profile_.interpolate(v.check_finite_grid(x, "x"))
        return np.column_stack([D, W])


class LaneEmdenProfile(BaseEstimator):
    """Enthalpy of the gravitating affine flow vanishing at ``r = 1``."""

    def __init__(self, delta=0.0, vacuum_tol=1e-10):
        self.delta = delta
        self.vacuum_tol = vacuum_tol

    def fit(self, X=None, y=None):
        prof = lane_emden_shoot(float(self.delta), vacuum_tol=self.vacuum_tol)
        self.profile_ = prof
        self.w0_ = prof.w_centre
        self.w_prime_boundary_ = prof.w_prime_boundary
        return self

    def predict(self, r):
        v.check_is_fitted(self, "profile_")
        r = v.check_finite_grid(r, "r")
        return np.interp(r, self.profile_.r, self.profile_.w)
