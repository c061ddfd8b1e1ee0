"""Geometry of the cell C_k(a, b).

The cell is the set of points p for which (gamma_k(a)^k, p, gamma_k(b)^k)
is k-monotone.  Its boundary is made of the polynomials

    phi_k(a)(x)    = x^k - (x - a)^k
    psi_k(a, b)(x) = x^k - (x - a)^(k-1) (x - b)

and their mirror images about the midpoint.  All polynomial helpers are
plain arithmetic, so they accept Fractions as well as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInputError
from .numerics import Point

__all__ = [
    "Cell",
    "phi",
    "psi",
    "phi_ik",
    "cell_bounds",
    "cell_offsets",
    "width",
    "contains",
    "contains_exact",
    "area",
    "vertices",
    "cell_info",
    "CONTAINS_TOL",
]

CONTAINS_TOL = 1e-12


@dataclass(frozen=True)
class Cell:
    k: int
    a: float
    b: float

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidInputError("cell endpoints must be finite")
        if self.a < 0 or not self.a < self.b:
            raise InvalidInputError(f"need 0 <= a < b, got ({self.a}, {self.b})")

    @property
    def mid(self) -> float:
        return (self.a + self.b) / 2


def phi(k: int, a, x):
    return x ** k - (x - a) ** k


def psi(k: int, a, b, x):
    return x ** k - (x - a) ** (k - 1) * (x - b)


def phi_ik(i: int, k: int, a, b, x):
    """The degree k-1 Hermite interpolant of x^k with i-1 conditions at a.

    ``phi_ik(k + 1, ...)`` is ``phi(k, a, .)`` and ``phi_ik(1, ...)`` is
    ``phi(k, b, .)``.
    """
    if not 1 <= i <= k + 1:
        raise InvalidInputError(f"i must lie in [1, {k + 1}], got {i}")
    return x ** k - (x - a) ** (i - 1) * (x - b) ** (k + 1 - i)


def cell_offsets(cell: Cell, x):
    """Bounds of ``y - x^k`` over the vertical slice of the cell at ``x``.

    Same boundary arcs as :func:`cell_bounds`, written relative to Gamma_k,
    which avoids the cancellation in ``x^k - (x - a)^k`` far from the origin.
    """
    k, a, b = cell.k, cell.a, cell.b
    if x <= (a + b) / 2:
        d = x - a
        return -(d ** k), d ** (k - 1) * (b - a) - d ** k
    e = x - b
    off_phi = -(e ** k)
    off_psi = -(e ** (k - 1)) * (x - a)
    return min(off_phi, off_psi), max(off_phi, off_psi)


def cell_bounds(cell: Cell, x):
    """Lower and upper boundary ordinates of the cell at abscissa ``x``.

    Left half: phi_k(a) below, psi_k(a, b) above.  Right half: phi_k(b) and
    psi_k(b, a), ordered by value (which one is on top depends on k's parity).
    """
    if not cell.a <= x <= cell.b:
        raise InvalidInputError(f"x={x} outside [{cell.a}, {cell.b}]")
    k, a, b = cell.k, cell.a, cell.b
    if x <= (a + b) / 2:
        return phi(k, a, x), psi(k, a, b, x)
    lo, hi = phi(k, b, x), psi(k, b, a, x)
    return (lo, hi) if lo <= hi else (hi, lo)


def width(cell: Cell, x):
    """upper - lower at ``x``: (x-a)^(k-1)(b-a) on the left, mirrored on the right."""
    k, a, b = cell.k, cell.a, cell.b
    if x <= (a + b) / 2:
        return (x - a) ** (k - 1) * (b - a)
    return (b - x) ** (k - 1) * (b - a)


def contains(cell: Cell, p, tol: float = CONTAINS_TOL) -> bool:
    x, y = p[0], p[1]
    if not cell.a <= x <= cell.b:
        return False
    lo, hi = cell_bounds(cell, x)
    return lo - tol <= y <= hi + tol


def contains_exact(cell: Cell, p) -> bool:
    """Closed-cell membership decided in rational arithmetic."""
    x, y = Fraction(p[0]), Fraction(p[1])
    a, b = Fraction(cell.a), Fraction(cell.b)
    if not a <= x <= b:
        return False
    exact_cell = _FractionCell(cell.k, a, b)
    lo, hi = cell_offsets(exact_cell, x)
    t = y - x ** cell.k
    return lo <= t <= hi


@dataclass(frozen=True)
class _FractionCell:
    k: int
    a: Fraction
    b: Fraction


def area(cell: Cell) -> float:
    return (cell.b - cell.a) ** (cell.k + 1) / (cell.k * 2 ** (cell.k - 1))


def vertices(cell: Cell) -> list:
    """gamma_k(a), gamma_k(b), then the lower and upper mid-abscissa points.

    For k = 1 the last two are the remaining corners (b, a) and (a, b) of
    the square.  For k = 2 the lower midpoint is where phi_2(a) and phi_2(b)
    meet, so the triangle is returned as a 4-tuple.
    """
    k, a, b = cell.k, cell.a, cell.b
    ends = [Point(a, a ** k), Point(b, b ** k)]
    if k == 1:
        return ends + [Point(b, a), Point(a, b)]
    lo, hi = cell_bounds(cell, cell.mid)
    return ends + [Point(cell.mid, lo), Point(cell.mid, hi)]


def cell_info(cell: Cell) -> dict:
    return {
        "k": cell.k,
        "a": cell.a,
        "b": cell.b,
        "area": area(cell),
        "vertices": [[v.x, v.y] for v in vertices(cell)],
    }
