"""The cell map T_{a,b,c,d} and the flattening map G_k.

T is conjugate to an affine map by G_k: (x, y) -> (x, y - x^k), so it
carries C_k(a, b) onto C_k(c, d), fixes Gamma_k and preserves uniform
measure up to the constant Jacobian.  Functions accept scalars, numpy
arrays or Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

__all__ = ["CellMap", "apply_T", "apply_G", "apply_G_inv", "apply_affine"]


@dataclass(frozen=True)
class CellMap:
    """T_{a,b,c,d}.  ``a = 0`` (and ``c = 0``) is allowed as the continuous extension."""

    k: int
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        if not all(math.isfinite(float(v)) for v in vals):
            raise InvalidInputError("map parameters must be finite")
        if self.a < 0 or self.c < 0 or not (self.a < self.b and self.c < self.d):
            raise InvalidInputError("need 0 <= a < b and 0 <= c < d")

    @property
    def ratio(self):
        return (self.d - self.c) / (self.b - self.a)


def apply_G(k: int, p):
    x, y = p[0], p[1]
    return x, y - x ** k


def apply_G_inv(k: int, p):
    x, t = p[0], p[1]
    return x, t + x ** k


def apply_affine(m: CellMap, q):
    """The affine factor A in flattened coordinates: diag(r, r^k) plus a shift."""
    r = m.ratio
    return m.c + (q[0] - m.a) * r, q[1] * r ** m.k


def apply_T(m: CellMap, p):
    """Image of ``p = (x, y)`` under T_{a,b,c,d}."""
    x, y = p[0], p[1]
    r = m.ratio
    x2 = m.c + (x - m.a) * r
    return x2, x2 ** m.k + (y - x ** m.k) * r ** m.k
