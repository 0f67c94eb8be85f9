"""Affine expanding flows ``x -> A(t) x`` of the pressured gas.

``A'' = delta det(A)^(1-gamma) A^(-T)`` conserves
``E = tr(A'^T A') / 2 + delta / (gamma - 1) det(A)^(1-gamma)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.ode import integrate_ivp

__all__ = ["AffineState", "AffineTrajectory", "DetCollapse", "det3", "cofactor3",
           "inverse_transpose3", "affine_energy", "sideris_evolve", "sideris_enthalpy"]

DET_FLOOR = 1e-12


class DetCollapse(RuntimeError):
    pass


def det3(A) -> float:
    return float(A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
                 - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
                 + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))


def cofactor3(A) -> np.ndarray:
    """Cofactor matrix, so that ``A^(-T) = cofactor(A) / det(A)``."""
    return np.array([
        [A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1], A[1, 2] * A[2, 0] - A[1, 0] * A[2, 2], A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]],
        [A[0, 2] * A[2, 1] - A[0, 1] * A[2, 2], A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0], A[0, 1] * A[2, 0] - A[0, 0] * A[2, 1]],
        [A[0, 1] * A[1, 2] - A[0, 2] * A[1, 1], A[0, 2] * A[1, 0] - A[0, 0] * A[1, 2], A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]],
    ])


def inverse_transpose3(A) -> np.ndarray:
    return cofactor3(A) / det3(A)


def affine_energy(A, Adot, delta: float, gamma: float) -> float:
    return 0.5 * float(np.sum(Adot * Adot)) + delta / (gamma - 1.0) * det3(A) ** (1.0 - gamma)


@dataclass(frozen=True)
class AffineState:
    A: np.ndarray
    Adot: np.ndarray
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float).reshape(3, 3))
        object.__setattr__(self, "Adot", np.array(self.Adot, dtype=float).reshape(3, 3))
        if det3(self.A) <= 0:
            raise ValueError("det A must be positive")


@dataclass
class AffineTrajectory:
    t: np.ndarray
    A: np.ndarray  # (n, 3, 3)
    Adot: np.ndarray
    det: np.ndarray
    energy: np.ndarray
    singular_values_over_t: np.ndarray  # (n, 3); row 0 is nan
    meta: dict = field(default_factory=dict)

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])) / abs(self.energy[0]))


def sideris_evolve(state0: AffineState, gamma: float, t_end: float, *, tol: float = 1e-12) -> AffineTrajectory:
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    if state0.delta <= 0:
        raise ValueError("delta must be positive")
    delta = state0.delta

    def rhs(_, s):
        A = s[:9].reshape(3, 3)
        d = det3(A)
        if d < DET_FLOOR:
            return np.full(18, np.nan)
        return np.concatenate([s[9:], (delta * d ** (-gamma) * cofactor3(A)).ravel()])

    s0 = np.concatenate([state0.A.ravel(), state0.Adot.ravel()])
    res = integrate_ivp(rhs, 0.0, s0, t_end, tol, atol=1e-3 * tol, max_steps=2_000_000)
    if not res.success:
        raise DetCollapse(f"det collapse or solver failure at t={res.t[-1]!r}: {res.status}")
    A = res.y[:, :9].reshape(-1, 3, 3)
    Ad = res.y[:, 9:].reshape(-1, 3, 3)
    dets = np.array([det3(a) for a in A])
    E = np.array([affine_energy(a, b, delta, gamma) for a, b in zip(A, Ad)])
    sv = np.full((res.t.size, 3), np.nan)
    pos = res.t > 0
    sv[pos] = np.linalg.svd(A[pos] / res.t[pos, None, None], compute_uv=False)
    return AffineTrajectory(res.t, A, Ad, dets, E, sv, {"gamma": gamma, "delta": delta})


def sideris_enthalpy(x, delta: float, gamma: float):
    """Enthalpy ``delta (gamma-1) / (2 gamma) (1 - |x|^2)`` of the affine flow; ``x`` has shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    return delta * (gamma - 1.0) / (2.0 * gamma) * (1.0 - np.sum(x * x, axis=-1))
