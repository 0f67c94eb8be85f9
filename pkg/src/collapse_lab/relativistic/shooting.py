"""Relativistic Larson-Penston profile in Eulerian self-similar variables."""

from __future__ import annotations

import numpy as np

from ..core import selfsim
from ..core.selfsim import SelfSimProfile
from .equations import RelativisticSystem, sonic_factorization
from .params import EpsParams

__all__ = ["RelProfile", "shoot_rel", "assemble_rel", "rel_diagnostics", "CSV_COLUMNS"]

CSV_COLUMNS = ("x", "D", "W", "B", "J", "H", "f", "residual_D", "residual_W")


class RelProfile(SelfSimProfile):
    """Relativistic view of a self-similar profile."""

    @classmethod
    def wrap(cls, prof: SelfSimProfile) -> "RelProfile":
        return cls(prof.x, prof.u, prof.system, prof.sonic_index, prof.residual,
                   prof.from_series, prof.meta)

    @property
    def params(self) -> EpsParams:
        return self.system.params

    @property
    def D(self):
        return self.u[:, 0]

    @property
    def W(self):
        return self.u[:, 1]

    def factorization(self):
        return sonic_factorization(self.x, self.D, self.W, self.params)

    def columns(self) -> dict:
        fz = self.factorization()
        return dict(zip(CSV_COLUMNS, (self.x, self.D, self.W, fz.B, fz.J, fz.H, fz.f,
                                       self.residual[:, 0], self.residual[:, 1])))


def _window(params, window):
    return params.default_window() if window is None else window


def shoot_rel(params: EpsParams | None = None, window=None, tol: float = 1e-12,
              *, x_min: float = 1e-4, **kw):
    """Friedmann-connecting sonic point ``x_star_bar`` and the left profile."""
    params = params or EpsParams()
    x_bar, prof = selfsim.shoot(RelativisticSystem(params), _window(params, window), tol,
                                x_min=x_min, **kw)
    return x_bar, RelProfile.wrap(prof)


def assemble_rel(params: EpsParams | None = None, window=None, tol: float = 1e-12,
                 *, x_min: float = 1e-4, x_max: float = 1e4, **kw) -> RelProfile:
    """Left shot, series bridge and far-field extension, with diagnostics."""
    params = params or EpsParams()
    prof = RelProfile.wrap(selfsim.assemble(RelativisticSystem(params), _window(params, window),
                                            tol, x_min=x_min, x_max=x_max, **kw))
    prof.meta["diagnostics"] = rel_diagnostics(prof)
    return prof


def _first_violation(x, ok):
    bad = np.nonzero(~ok)[0]
    return None if bad.size == 0 else float(x[bad[0]])


def rel_diagnostics(prof: RelProfile) -> dict:
    """Sandwich ordering, sign of ``f = J - xD``, factorization identity, tail."""
    params = prof.params
    x, D, W = prof.x, prof.D, prof.W
    fz = prof.factorization()
    i = prof.sonic_index
    left, right = slice(0, i), slice(i + 1, None)
    sand_left = (x[left] * W[left] < x[left] * D[left]) & (x[left] * D[left] < fz.J[left])
    sand_right = (x[right] * W[right] > x[right] * D[right]) & (x[right] * D[right] > fz.J[right])
    scale = np.maximum.reduce([np.abs(fz.B), np.abs(fz.J * fz.H), (x * W) ** 2])
    diag = {
        "x_star_bar": prof.meta.get("x_star_bar"),
        "sandwich_left": bool(np.all(sand_left)),
        "sandwich_left_violation": _first_violation(x[left], sand_left),
        "sandwich_right": bool(np.all(sand_right)),
        "sandwich_right_violation": _first_violation(x[right], sand_right),
        "W_above_D_right": bool(np.all(W[right] > D[right])),
        "xW_above_J_right": bool(np.all(x[right] * W[right] > fz.J[right])),
        "f_positive_left": bool(np.all(fz.f[left] > 0)),
        "factorization_error": float(np.max(fz.identity_error)),
        "B_sign_changes": int(np.sum(np.diff(np.sign(fz.B[fz.B != 0])) != 0)),
        "max_residual": float(np.max(prof.residual[~prof.from_series])),
        "D0": prof.meta["origin_values"][0],
        "W0": prof.meta["origin_values"][1],
        "W_end": float(W[-1]),
        "x_trusted": prof.meta.get("x_trusted"),
    }
    fit = prof.meta.get("tail_fit")
    if fit is not None:
        diag["tail_exponent"] = fit.exponent
        diag["tail_exponent_target"] = params.tail_exponent
    return diag
