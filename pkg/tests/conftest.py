import random
from fractions import Fraction

import numpy as np
import pytest

from kmonotone.chains import BoundaryChain, Chain
from kmonotone.numerics import _table, gamma_entry, point_entry


def exact_window_signs(k, a, b, points):
    """Exact sign of every consecutive (k+1)-window of the boundary chain.

    Coordinates may be floats or Fractions; nothing is rounded.
    """
    seq = [gamma_entry(k, a, -1)] * k
    seq += [point_entry(x, y, i) for i, (x, y) in enumerate(points)]
    seq += [gamma_entry(k, b, -2)] * k
    out = []
    for s in range(len(seq) - k):
        table, _ = _table(seq[s:s + k + 1], exact=True)
        v = table[k][0]
        out.append((v > 0) - (v < 0))
    return out


def near_curve_chain(rng, k, m, a=0.0, b=1.0, noise=None):
    """Random chain hugging Gamma_k, valid or not depending on the noise draw."""
    xs = sorted(set(rng.uniform(a, b) for _ in range(m)))
    xs = [x for x in xs if a < x < b]
    scale = noise if noise is not None else 10 ** rng.uniform(-4, -1)
    pts = [(x, x ** k + rng.gauss(0, scale) * (b - a) ** k) for x in xs]
    return BoundaryChain(k, a, b, Chain(tuple(pts)))


@pytest.fixture
def pyrng():
    return random.Random(12345)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)


def frac_point(p):
    return Fraction(p[0]), Fraction(p[1])


def valid_chain(seed, k, n=12, a=0.0, b=1.0):
    """A valid chain: the optimal witness among n uniform points of C_k(a, b)."""
    from kmonotone.cells import Cell
    from kmonotone.sampling import sample_uniform_cell
    from kmonotone.solver import solve_dp

    pts = sample_uniform_cell(Cell(k, a, b), n, np.random.default_rng(seed))
    res = solve_dp(pts, k, a, b)
    return BoundaryChain(k, a, b, res.witness)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("#")[1].split(" ")[0])):
            terminalreporter.write_line(line)
