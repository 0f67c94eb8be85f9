"""Truncated formal power series in one variable.

A :class:`SeriesF` holds the coefficients ``a_0..a_N`` of a Taylor expansion
about some point ``x0`` (the expansion point is bookkeeping only; all
arithmetic acts on coefficients). Arithmetic between series truncates to the
smaller order, and plain numbers are promoted to constant series, so the
same right-hand-side code can be evaluated on floats or on series::

    >>> x = SeriesF.variable(0.0, order=3)
    >>> (1 + x) ** -1
    SeriesF([1.0, -1.0, 1.0, -1.0], x0=0.0)

Coefficients beyond ``order`` are unknown, not zero.
"""

from __future__ import annotations

from numbers import Real

import numpy as np

__all__ = ["SeriesF", "series_pow"]


class SeriesF:
    """Truncated power series ``sum_k a_k (x - x0)^k`` for ``k <= order``."""

    __array_ufunc__ = None  # numpy operands defer to the reflected methods

    def __init__(self, coefficients, x0: float = 0.0, order: int | None = None):
        c = np.asarray(coefficients, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient")
        if order is None:
            order = c.size - 1
        if order < 0:
            raise ValueError("order must be non-negative")
        if c.size < order + 1:
            c = np.concatenate([c, np.zeros(order + 1 - c.size)])
        self.coef = c[: order + 1].copy()
        self.x0 = float(x0)

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value: float, order: int, x0: float = 0.0) -> "SeriesF":
        return cls([value], x0=x0, order=order)

    @classmethod
    def variable(cls, x0: float, order: int) -> "SeriesF":
        """The series of the identity map ``x`` expanded about ``x0``."""
        return cls([x0, 1.0], x0=x0, order=order)

    # -- basic protocol -----------------------------------------------------
    @property
    def order(self) -> int:
        return self.coef.size - 1

    def __len__(self) -> int:
        return self.coef.size

    def __getitem__(self, k):
        return self.coef[k]

    def __repr__(self) -> str:
        return f"SeriesF({self.coef.tolist()}, x0={self.x0})"

    def copy(self) -> "SeriesF":
        return SeriesF(self.coef, x0=self.x0)

    def truncate(self, order: int) -> "SeriesF":
        return SeriesF(self.coef[: order + 1], x0=self.x0, order=order)

    def _coerce(self, other) -> "SeriesF":
        if isinstance(other, SeriesF):
            return other
        if isinstance(other, (Real, np.floating, np.integer)):
            return SeriesF.constant(float(other), self.order, self.x0)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self):
        return SeriesF(-self.coef, x0=self.x0)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return SeriesF(self.coef[: n + 1] + other.coef[: n + 1], x0=self.x0)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return SeriesF(self.coef[: n + 1] - other.coef[: n + 1], x0=self.x0)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (Real, np.floating, np.integer)):
            return SeriesF(self.coef * float(other), x0=self.x0)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        prod = np.convolve(self.coef[: n + 1], other.coef[: n + 1])[: n + 1]
        return SeriesF(prod, x0=self.x0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Real, np.floating, np.integer)):
            return SeriesF(self.coef / float(other), x0=self.x0)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = SeriesF.constant(1.0, self.order, self.x0)
            base = self
            k = int(p)
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        return series_pow(self, float(p))

    def reciprocal(self) -> "SeriesF":
        """``1/s`` by the recursive quotient; needs a nonzero constant term."""
        a = self.coef
        if a[0] == 0.0:
            raise ZeroDivisionError("series reciprocal needs a_0 != 0")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for k in range(1, a.size):
            b[k] = -np.dot(a[1 : k + 1], b[k - 1 :: -1][:k]) / a[0]
        return SeriesF(b, x0=self.x0)

    # -- calculus and evaluation -------------------------------------------
    def deriv(self) -> "SeriesF":
        """Derivative; the result keeps the same order with an unknown top
        coefficient set to zero (callers never read it)."""
        k = np.arange(1, self.coef.size)
        d = np.zeros_like(self.coef)
        d[:-1] = k * self.coef[1:]
        return SeriesF(d, x0=self.x0)

    def shift_down(self, m: int) -> "SeriesF":
        """Divide by ``(x - x0)^m``; the first ``m`` coefficients must vanish."""
        if m == 0:
            return self
        return SeriesF(self.coef[m:], x0=self.x0, order=self.order - m)

    def __call__(self, x):
        """Horner evaluation at ``x``."""
        h = np.asarray(x, dtype=float) - self.x0
        acc = np.zeros_like(h) + self.coef[-1]
        for c in self.coef[-2::-1]:
            acc = acc * h + c
        return acc if acc.ndim else float(acc)


def series_pow(s: SeriesF, p: float) -> SeriesF:
    """``s**p`` for real ``p`` via ``(s^p)' s = p s^p s'`` term by term.

    Requires ``s[0] > 0``; the result is the real branch.
    """
    a = s.coef
    if not a[0] > 0.0:
        raise ValueError(f"series_pow needs a positive constant term, got {a[0]!r}")
    n = a.size
    b = np.zeros(n)
    b[0] = a[0] ** p
    for k in range(1, n):
        j = np.arange(1, k + 1)
        b[k] = np.dot((p * j - (k - j)) * a[j], b[k - j]) / (k * a[0])
    return SeriesF(b, x0=s.x0)

