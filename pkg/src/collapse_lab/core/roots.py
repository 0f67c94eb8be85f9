"""Bracketing root refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = ["RootBracket", "refine_root", "scan_brackets"]


@dataclass(frozen=True)
class RootBracket:
    """Interval ``[a, b]`` with ``f(a)`` and ``f(b)`` of opposite sign."""

    a: float
    b: float
    fa: float
    fb: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"bracket needs a < b, got [{self.a}, {self.b}]")
        if not (math.isfinite(self.fa) and math.isfinite(self.fb)):
            raise ValueError("bracket function values must be finite")
        if (self.fa < 0) == (self.fb < 0) or self.fa == 0 or self.fb == 0:
            if self.fa != 0 and self.fb != 0:
                raise ValueError(
                    f"no sign change on [{self.a}, {self.b}]: f={self.fa}, {self.fb}")

    @classmethod
    def from_function(cls, f: Callable[[float], float], a: float, b: float) -> "RootBracket":
        return cls(a, b, float(f(a)), float(f(b)))

    @property
    def width(self) -> float:
        return self.b - self.a


def refine_root(f: Callable[[float], float], bracket: RootBracket, tol: float = 1e-12,
                max_iter: int = 200) -> float:
    """Bisect until the sign change sits in an interval of width ``<= tol``.

    Only the sign of ``f`` is used, so a discontinuous classifier (e.g. a
    shooting verdict mapped to +1/-1) works as well as a continuous function.
    Returns the interval midpoint.
    """
    a, b, fa = bracket.a, bracket.b, bracket.fa
    if bracket.fa == 0:
        return a
    if bracket.fb == 0:
        return b
    for _ in range(max_iter):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def scan_brackets(f: Callable[[float], float], grid) -> list[RootBracket]:
    """All adjacent sign changes of ``f`` sampled on ``grid``."""
    xs = list(grid)
    vals = [float(f(x)) for x in xs]
    out = []
    for (x0, v0), (x1, v1) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if math.isfinite(v0) and math.isfinite(v1) and v0 != 0 and (v0 < 0) != (v1 < 0):
            out.append(RootBracket(x0, x1, v0, v1))
    return out
