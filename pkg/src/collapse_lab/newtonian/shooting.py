"""Global Larson-Penston and Yahil profiles."""

from __future__ import annotations

import numpy as np

from ..core import selfsim
from ..core.selfsim import SelfSimProfile, ShootingError, WindowNotStraddling, extrapolate_origin
from .equations import NewtonianSystem
from .params import GammaParams
from .sonic import SonicExpansion

__all__ = [
    "Profile",
    "ShootingError",
    "WindowNotStraddling",
    "classify_candidate",
    "shoot_friedmann",
    "extend_far_field",
    "assemble_lp",
    "extrapolate_origin",
    "profile_diagnostics",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("y", "rho", "omega", "denominator", "residual_rho", "residual_omega")


class Profile(SelfSimProfile):
    """Newtonian view of a self-similar profile."""

    @classmethod
    def wrap(cls, prof: SelfSimProfile) -> "Profile":
        return cls(prof.x, prof.u, prof.system, prof.sonic_index, prof.residual,
                   prof.from_series, prof.meta)

    @property
    def params(self) -> GammaParams:
        return self.system.params

    @property
    def y(self):
        return self.x

    @property
    def rho(self):
        return self.u[:, 0]

    @property
    def omega(self):
        return self.u[:, 1]

    @property
    def y_star(self):
        return self.x_star

    @property
    def residual_rho(self):
        return self.residual[:, 0]

    @property
    def residual_omega(self):
        return self.residual[:, 1]

    def columns(self) -> dict:
        return dict(zip(CSV_COLUMNS, (self.y, self.rho, self.omega, self.denominator,
                                       self.residual_rho, self.residual_omega)))


def classify_candidate(y_star: float, params: GammaParams, **kw):
    return selfsim.classify(NewtonianSystem(params), y_star, **kw)


def shoot_friedmann(params: GammaParams | None = None, window=(2.0, 3.0), tol: float = 1e-12,
                    *, y_min: float = 1e-4, **kw):
    """Friedmann-connecting sonic point ``y_star_bar`` and the left profile.

    ``meta`` carries ``omega0`` and ``rho0`` extrapolated to the centre.
    """
    params = params or GammaParams()
    y_bar, prof = selfsim.shoot(NewtonianSystem(params), window, tol, x_min=y_min, **kw)
    prof = Profile.wrap(prof)
    prof.meta["rho0"], prof.meta["omega0"] = prof.meta["origin_values"]
    prof.meta["y_star_bar"] = y_bar
    return y_bar, prof


def extend_far_field(exp: SonicExpansion, y_max: float = 1e4, *, ode_tol: float = 1e-12) -> Profile:
    """Right continuation to ``y_max`` with trapping diagnostics and a tail fit."""
    prof = Profile.wrap(selfsim.extend_right(exp, y_max, ode_tol=ode_tol))
    params = prof.params
    inner = prof.y > exp.x_star
    w, r = prof.omega[inner], prof.rho[inner]
    prof.meta.update(
        omega_end=float(prof.omega[-1]),
        trapped=bool(np.all((w > params.omega_friedmann) & (w < 1.0))),
        omega_exceeds_rho=bool(np.all(w > r)),
    )
    return prof


def assemble_lp(params: GammaParams | None = None, window=(2.0, 3.0), tol: float = 1e-12,
                *, y_min: float = 1e-4, y_max: float = 1e4, **kw) -> Profile:
    """Full profile: Friedmann shot, series bridge, far-field extension, diagnostics."""
    params = params or GammaParams()
    prof = Profile.wrap(selfsim.assemble(NewtonianSystem(params), window, tol,
                                         x_min=y_min, x_max=y_max, **kw))
    prof.meta["rho0"], prof.meta["omega0"] = prof.meta["origin_values"]
    prof.meta["y_star_bar"] = prof.meta["x_star_bar"]
    prof.meta["diagnostics"] = profile_diagnostics(prof)
    return prof


def profile_diagnostics(prof: Profile) -> dict:
    """Measured values of the profile invariants (no thresholds applied)."""
    params = prof.params
    G = prof.denominator
    i = prof.sonic_index
    left, right = slice(0, i), slice(i + 1, None)
    nz = G[G != 0]
    off_series = ~prof.from_series
    diag = {
        "G_positive_left": bool(np.all(G[left] > 0)),
        "G_negative_right": bool(np.all(G[right] < 0)),
        "G_sign_changes": int(np.sum(np.diff(np.sign(nz)) != 0)),
        "max_residual": float(np.max(prof.residual[off_series])),
        "omega0": prof.meta.get("omega0"),
        "rho0": prof.meta.get("rho0"),
        "omega_end": float(prof.omega[-1]),
        "rho_minus_omega_left_min": float(np.min(prof.rho[left] - prof.omega[left])),
        "omega_minus_rho_right_min": float(np.min(prof.omega[right] - prof.rho[right])),
        "omega_monotone_left": bool(np.all(np.diff(prof.omega[: i + 1]) > 0)),
        "omega_trapped_right": bool(np.all((prof.omega[right] > params.omega_friedmann)
                                           & (prof.omega[right] < 1.0))),
        "y_trusted": prof.meta.get("x_trusted"),
    }
    fit = prof.meta.get("tail_fit")
    if fit is not None:
        diag["tail_exponent"] = fit.exponent
        diag["tail_exponent_target"] = params.tail_exponent
    return diag
