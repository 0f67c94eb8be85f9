"""Formal power-series solutions of ODE systems at singular points.

The system is supplied as a residual ``R(x, u) -> list of series`` whose
coefficients must vanish order by order, e.g. ``den * u' - num`` for a
sonic point where ``den`` and ``num`` vanish together. At orders ``k >= 2``
the order-``k`` residual is affine in the unknown coefficients ``u_k``, so
it is probed with the zero vector and unit vectors and the resulting
linear system solved. The order-one system at a sonic point is quadratic;
:func:`quadratic_pair_roots` solves that case for two unknowns.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .series import SeriesF

__all__ = [
    "DegenerateRecursion",
    "series_residual",
    "solve_higher_orders",
    "quadratic_pair_roots",
    "growth_constant",
]

Residual = Callable[[SeriesF, list], Sequence[SeriesF]]


class DegenerateRecursion(ArithmeticError):
    """The per-order linear system is singular or inconsistent."""

    def __init__(self, order: int, x0: float, detail: str = ""):
        self.order = order
        self.x0 = x0
        super().__init__(f"degenerate recursion matrix at order {order} (x0={x0!r}) {detail}".strip())


def series_residual(residual: Residual, x0: float, coeffs: np.ndarray, k: int) -> np.ndarray:
    """Order-``k`` coefficients of the residual for the given coefficient table.

    ``coeffs`` has shape ``(nvar, >= k+1)``; entries above order ``k`` are
    ignored and the series are built at order ``k + 1`` with a zero top
    coefficient so that derivatives are exact through order ``k``.
    """
    nvar = coeffs.shape[0]
    states = []
    for i in range(nvar):
        c = np.zeros(k + 2)
        c[: k + 1] = coeffs[i, : k + 1]
        states.append(SeriesF(c, x0=x0))
    x = SeriesF.variable(x0, k + 1)
    return np.array([r[k] for r in residual(x, states)])


def solve_higher_orders(
    residual: Residual,
    x0: float,
    low: np.ndarray,
    order: int,
    *,
    fixed: dict | None = None,
    cond_max: float = 1e12,
    consistency: float = 1e-8,
) -> np.ndarray:
    """Extend the known low-order coefficients ``low`` (shape ``(nvar, k0)``)
    up to ``order`` by solving the affine per-order systems.

    ``fixed`` maps ``(var, k)`` to a prescribed value (free data of a
    regular singular point); the remaining unknowns at that order are
    solved in the least-squares sense and the fit must be consistent.
    """
    fixed = fixed or {}
    low = np.atleast_2d(np.asarray(low, dtype=float))
    nvar, k0 = low.shape
    coeffs = np.zeros((nvar, order + 1))
    coeffs[:, :k0] = low
    for k in range(k0, order + 1):
        for (i, kk), v in fixed.items():
            if kk == k:
                coeffs[i, k] = v
        unknown = [i for i in range(nvar) if (i, k) not in fixed]
        r0 = series_residual(residual, x0, coeffs, k)
        if not unknown:
            continue
        M = np.empty((r0.size, len(unknown)))
        for j, i in enumerate(unknown):
            trial = coeffs.copy()
            trial[i, k] += 1.0
            M[:, j] = series_residual(residual, x0, trial, k) - r0
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] == 0 or sv[0] / sv[-1] > cond_max:
            raise DegenerateRecursion(k, x0, f"(singular values {sv.tolist()})")
        sol, *_ = np.linalg.lstsq(M, -r0, rcond=None)
        coeffs[unknown, k] = sol
        scale = max(1.0, float(np.max(np.abs(r0))), float(np.max(np.abs(M))))
        check = series_residual(residual, x0, coeffs, k)
        if np.max(np.abs(check)) > consistency * scale:
            raise DegenerateRecursion(k, x0, f"(inconsistent, residual {np.max(np.abs(check)):.3e})")
    return coeffs


def _quadratic_coefficients(F: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Exact monomial coefficients of a quadratic map R^2 -> R^2.

    Returns shape (2, 6) for the monomials 1, a, b, a^2, ab, b^2.
    """
    pts = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, 1], [1, -1]], float)
    V = np.column_stack([np.ones(len(pts)), pts[:, 0], pts[:, 1],
                         pts[:, 0] ** 2, pts[:, 0] * pts[:, 1], pts[:, 1] ** 2])
    vals = np.array([F(p) for p in pts])
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return coef.T


def _eval_quad(q, a, b):
    return q[:, 0] + q[:, 1] * a + q[:, 2] * b + q[:, 3] * a * a + q[:, 4] * a * b + q[:, 5] * b * b


def _eliminate(q, tol):
    """Candidate roots from the resultant that eliminates the first unknown."""
    A = [q[i, 3] for i in range(2)]
    B = [Polynomial([q[i, 1], q[i, 4]]) for i in range(2)]
    C = [Polynomial([q[i, 0], q[i, 2], q[i, 5]]) for i in range(2)]
    p1 = A[0] * C[1] - A[1] * C[0]
    p2 = A[0] * B[1] - A[1] * B[0]
    p3 = B[0] * C[1] - B[1] * C[0]
    if A[0] == 0 and A[1] == 0:
        # both equations linear in a: the resultant is the 2x2 determinant
        res = p3
    else:
        res = p1 * p1 - p2 * p3
    size = float(np.max(np.abs(res.coef)))
    if size == 0:
        return None
    res = res.trim(1e-13 * size)
    if res.degree() < 1:
        return None
    cands = []
    for b in res.roots():
        if abs(b.imag) > 1e-6 * max(1.0, abs(b.real)):
            continue
        b = float(b.real)
        den = p2(b)
        if A[0] != 0 or A[1] != 0:
            if abs(den) > 1e-12:
                cands.append((-p1(b) / den, b))
                continue
        for i in range(2):
            poly = Polynomial([C[i](b), B[i](b), A[i]]).trim(1e-14)
            if poly.degree() >= 1:
                cands.extend((r.real, b) for r in poly.roots() if abs(r.imag) < 1e-9)
    return cands


def quadratic_pair_roots(F: Callable[[np.ndarray], np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    """All real solutions of ``F(a, b) = 0`` for an exactly quadratic ``F``.

    One unknown is eliminated with the Sylvester resultant, leaving a
    polynomial of degree at most four in the other; if that resultant
    degenerates the roles are swapped. Each real root is back-substituted
    and polished by Newton steps. Solutions are returned sorted by ``b``.
    """
    q = _quadratic_coefficients(F)
    scale = max(1.0, float(np.max(np.abs(q))))
    q[np.abs(q) < 1e-12 * scale] = 0.0
    cands = _eliminate(q, tol)
    if cands is None:
        swapped = q[:, [0, 2, 1, 5, 4, 3]]
        sw = _eliminate(swapped, tol)
        if sw is None:
            raise DegenerateRecursion(1, float("nan"), "(order-one system has a continuum of roots)")
        cands = [(a, b) for b, a in sw]
    out: list[np.ndarray] = []
    for a, b in cands:
        z = np.array([a, b], float)
        for _ in range(8):
            r = _eval_quad(q, z[0], z[1])
            J = np.array([[q[i, 1] + 2 * q[i, 3] * z[0] + q[i, 4] * z[1],
                           q[i, 2] + q[i, 4] * z[0] + 2 * q[i, 5] * z[1]] for i in range(2)])
            if abs(np.linalg.det(J)) < 1e-14 * scale * scale:
                break
            z = z - np.linalg.solve(J, r)
        if np.max(np.abs(_eval_quad(q, z[0], z[1]))) < tol * scale:
            if not any(np.allclose(z, c, atol=1e-7) for c in out):
                out.append(z)
    out.sort(key=lambda z: z[1])
    return out


def growth_constant(coeffs: np.ndarray, start: int = 2) -> float:
    """Smallest ``C`` with ``|a_N| * N^2 <= C^N`` for every ``N >= start``."""
    coeffs = np.atleast_2d(coeffs)
    best = 0.0
    for N in range(start, coeffs.shape[1]):
        m = float(np.max(np.abs(coeffs[:, N])))
        if m > 0:
            best = max(best, (m * N * N) ** (1.0 / N))
    return best
