"""Seeded random generation: uniform square, uniform cell, Poisson process.

Every sampler takes an :class:`RngSpec`.  The generator for a spec is
derived from ``(base_seed, stream_id)`` through numpy's SeedSequence, so a
trial's points do not depend on which worker ran it or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cells import Cell, area, contains_exact
from .errors import GuardrailError, InvalidInputError

__all__ = [
    "RngSpec",
    "PoissonSample",
    "sample_uniform_square",
    "sample_uniform_cell",
    "sample_poisson_cell",
    "sample_poisson_subcells",
    "abscissa_cdf",
    "in_cell_mask",
    "poisson_pmf_and_tail",
    "POISSON_AREA_LIMIT",
]

POISSON_AREA_LIMIT = 1e7


@dataclass(frozen=True)
class RngSpec:
    """Seed of one random stream.

    ``tag`` separates experiments sharing a base seed (for instance one
    tag per (model, k, n)), so their trial streams are independent.
    """

    base_seed: int
    stream_id: int = 0
    tag: tuple = ()

    def generator(self) -> np.random.Generator:
        words = [self.base_seed, *self.tag, self.stream_id]
        seq = np.random.SeedSequence([w & (2**64 - 1) for w in words])
        return np.random.Generator(np.random.PCG64(seq))


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


@dataclass
class PoissonSample:
    """Points of an intensity-1 Poisson process.

    ``region`` is ``"cell"`` when the whole cell was sampled and
    ``"subcells"`` when only the sub-cells C_k(s i, s (i+1)) were; in the
    latter case ``intensity`` is their total area.
    """

    cell: Cell
    points: np.ndarray
    intensity: float
    region: str = "cell"
    spacing: float = 3.0
    subcell_counts: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)


def sample_uniform_square(n: int, rng) -> np.ndarray:
    """``n`` i.i.d. uniform points of [0, 1]^2 as an (n, 2) array."""
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    return _gen(rng).random((n, 2))


def abscissa_cdf(cell: Cell, x):
    """CDF of the abscissa of a uniform point of the cell."""
    x = np.asarray(x, dtype=float)
    half = (cell.b - cell.a) / 2
    left = 0.5 * (np.clip(x - cell.a, 0, half) / half) ** cell.k
    right = 1 - 0.5 * (np.clip(cell.b - x, 0, half) / half) ** cell.k
    return np.where(x <= cell.a + half, left, right)


def _inverse_cdf(cell: Cell, u):
    half = (cell.b - cell.a) / 2
    k = cell.k
    return np.where(
        u < 0.5,
        cell.a + half * (2 * u) ** (1 / k),
        cell.b - half * (2 * (1 - u)) ** (1 / k),
    )


def _offsets(cell: Cell, x):
    # vectorised cells.cell_offsets
    k, a, b = cell.k, cell.a, cell.b
    d = x - a
    e = x - b
    left_lo = -(d ** k)
    left_hi = d ** (k - 1) * (b - a) - d ** k
    off_phi = -(e ** k)
    off_psi = -(e ** (k - 1)) * (x - a)
    right_lo = np.minimum(off_phi, off_psi)
    right_hi = np.maximum(off_phi, off_psi)
    left = x <= (a + b) / 2
    return np.where(left, left_lo, right_lo), np.where(left, left_hi, right_hi)


def in_cell_mask(cell: Cell, pts, tol: float = 0.0) -> np.ndarray:
    """Vectorised closed-cell membership with an absolute ordinate tolerance."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x = pts[:, 0]
    inside = (x >= cell.a) & (x <= cell.b)
    xc = np.clip(x, cell.a, cell.b)
    lo, hi = _offsets(cell, xc)
    base = xc ** cell.k
    y = pts[:, 1]
    return inside & (y >= base + lo - tol) & (y <= base + hi + tol)


def _draw_cell(cell: Cell, n: int, gen: np.random.Generator) -> np.ndarray:
    u = gen.random(n)
    v = gen.random(n)
    x = _inverse_cdf(cell, u)
    lo, hi = _offsets(cell, x)
    y = x ** cell.k + lo + v * (hi - lo)
    return np.column_stack([x, y])


def _suspect(cell: Cell, pts: np.ndarray) -> np.ndarray:
    # rows whose float slack to the boundary is too small to trust
    x, y = pts[:, 0], pts[:, 1]
    lo, hi = _offsets(cell, x)
    base = x ** cell.k
    scale = np.abs(base) + np.abs(lo) + np.abs(hi) + 1.0
    slack = 1e-12 * scale
    t = y - base
    inside_x = (x > cell.a) & (x < cell.b)
    return ~inside_x | (t - lo <= slack) | (hi - t <= slack)


def sample_uniform_cell(cell: Cell, n: int, rng) -> np.ndarray:
    """``n`` i.i.d. uniform points of the cell by inverse-CDF sampling.

    The abscissa is drawn from its piecewise power-law CDF, then the
    ordinate uniformly between the boundary arcs.  Float rounding can push
    a point a hair outside the closed cell near its pinched ends; such
    points (and any landing exactly on x = a or x = b) are redrawn, so
    every returned point lies in the cell in exact arithmetic.
    """
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    gen = _gen(rng)
    pts = _draw_cell(cell, n, gen)
    for i in np.flatnonzero(_suspect(cell, pts)):
        while True:
            p = pts[i]
            if cell.a < p[0] < cell.b and contains_exact(cell, p):
                break
            pts[i] = _draw_cell(cell, 1, gen)[0]
    return pts


def sample_poisson_cell(cell: Cell, rng) -> PoissonSample:
    """Intensity-1 Poisson process restricted to the cell."""
    lam = area(cell)
    if lam > POISSON_AREA_LIMIT:
        raise GuardrailError(f"cell area {lam:.3g} exceeds {POISSON_AREA_LIMIT:.0e}")
    gen = _gen(rng)
    count = int(gen.poisson(lam))
    return PoissonSample(cell, sample_uniform_cell(cell, count, gen), lam)


def sample_poisson_subcells(cell: Cell, rng, spacing: float = 3.0) -> PoissonSample:
    """The Poisson process on the union of sub-cells C_k(a + s i, a + s (i+1)).

    The sub-cells are disjoint (up to their shared vertices), so sampling
    each one independently has the law of the process restricted to the
    union.  Used where only sub-cell contents matter and the full cell is
    too large to sample.
    """
    gen = _gen(rng)
    m = int((cell.b - cell.a) // spacing)
    chunks, counts, total = [], [], 0.0
    for i in range(m):
        sub = Cell(cell.k, cell.a + spacing * i, cell.a + spacing * (i + 1))
        lam = area(sub)
        total += lam
        count = int(gen.poisson(lam))
        counts.append(count)
        chunks.append(sample_uniform_cell(sub, count, gen))
    pts = np.concatenate(chunks) if chunks else np.empty((0, 2))
    return PoissonSample(cell, pts, total, "subcells", spacing, counts)


def poisson_pmf_and_tail(lam: float, m: int, tail: bool = True):
    """P(X = m) for X ~ Poisson(lam) and the bound

        P(X >= m) <= (m + 1) / (m + 1 - lam) * P(X = m),

    which needs m + 1 > lam.  With ``tail=False`` the bound is ``None``.
    """
    if not lam > 0 or m < 0:
        raise InvalidInputError("need lam > 0 and m >= 0")
    pmf = math.exp(m * math.log(lam) - lam - math.lgamma(m + 1))
    if not tail:
        return pmf, None
    if m + 1 <= lam:
        raise InvalidInputError(f"tail bound needs m + 1 > lam (m={m}, lam={lam})")
    return pmf, (m + 1) / (m + 1 - lam) * pmf
