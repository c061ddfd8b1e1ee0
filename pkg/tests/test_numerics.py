import math
import random
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from kmonotone.errors import InvalidInputError
from kmonotone.numerics import (
    FALLBACK_RELATIVE,
    Node,
    Point,
    _table,
    diff_table,
    divided_difference,
    flatten,
    gamma,
    is_general_position,
    newton_eval,
    point_entry,
    sign_of_tuple,
)


# worked examples

def test_first_difference_of_identity():
    assert divided_difference([(0, 0), (1, 1)], 1) == 1


def test_confluent_cubic_fourfold():
    assert divided_difference([gamma(3, 2.0, 4)], 3) == 1
    assert divided_difference([gamma(3, 2.0, 4)], 3, exact=True) == 1


def test_confluent_double_node_then_point():
    nodes = [gamma(2, 0.0, 2), Point(1.0, 1.0)]
    table = diff_table(nodes, exact=True)
    assert table[0] == [0, 0, 1]
    assert table[1] == [0, 1]
    assert table[2] == [1]
    assert divided_difference(nodes, 2) == 1


def test_second_difference_of_tent():
    assert divided_difference([(0, 0), (0.5, 0.5), (1, 0)], 2) == -2


def test_signs():
    assert sign_of_tuple([(0, 0), (1, -1)], 1) == -1
    assert sign_of_tuple([(0, 0), (0.5, 0.1), (1, 1)], 2) == 1


@pytest.mark.parametrize("k", range(1, 7))
def test_points_on_curve_are_positive(k):
    xs = [0.1 * (i + 1) for i in range(k + 1)]
    assert sign_of_tuple([(x, x ** k) for x in xs], k) == 1


def test_newton_identity():
    assert newton_eval([(0, 0), (1, 1)], 0.5) == 0.5


def test_newton_confluent_gives_square():
    assert newton_eval([gamma(2, 0.0, 2), Point(1.0, 1.0)], 2.0) == 4.0


def test_newton_cubic_exact():
    xs = [Fraction(1, 3), Fraction(1, 2), 2, 5]
    nodes = [(float(x), float(x) ** 3) for x in (0.25, 0.5, 1.5, 3.0)]
    for x in xs:
        assert newton_eval(nodes, x, exact=True) == Fraction(x) ** 3


def test_general_position():
    assert is_general_position([(0, 0), (1, 1), (2, 2)], 2) is False
    assert is_general_position([(0, 0), (1, 0)], 1) is False
    assert is_general_position([(0, 0), (1, 1), (2, 4)], 2) is True


# input checking

def test_duplicate_abscissa_rejected():
    with pytest.raises(InvalidInputError):
        flatten([(0.5, 1.0), (0.5, 2.0)])


def test_multiplicity_needs_generator():
    with pytest.raises(InvalidInputError):
        Node(0.5, 1.0, multiplicity=2)


def test_multiplicity_cap():
    gamma(3, 1.0, 4)
    with pytest.raises(InvalidInputError):
        gamma(3, 1.0, 5)


def test_non_finite_rejected():
    with pytest.raises(InvalidInputError):
        Node(float("nan"), 1.0)
    with pytest.raises(InvalidInputError):
        Node(0.0, float("inf"))
    with pytest.raises(InvalidInputError):
        newton_eval([(0, 0), (1, 1)], float("nan"))


def test_window_size_checked():
    with pytest.raises(InvalidInputError):
        divided_difference([(0, 0), (1, 1)], 2)
    with pytest.raises(InvalidInputError):
        sign_of_tuple([(0, 0), (1, 1), (2, 3)], 1)


def test_mixed_degrees_rejected():
    with pytest.raises(InvalidInputError):
        divided_difference([gamma(2, 0.0, 2), gamma(3, 1.0, 1)], 2)


def test_table_column_zero_is_ordinates():
    nodes = [(0.1, 3.0), (0.4, -1.0), (0.9, 2.5)]
    assert diff_table(nodes)[0] == [3.0, -1.0, 2.5]


# properties

def _rand_points(rng, n):
    xs = rng.sample(range(1, 10_000), n)
    return [(x / 997.0, rng.uniform(-2, 2)) for x in xs]


def test_permutation_invariance():
    rng = random.Random(1)
    for _ in range(200):
        k = rng.randint(1, 5)
        pts = _rand_points(rng, k + 1)
        ref = divided_difference(pts, k, exact=True)
        perms = list(permutations(pts))
        for perm in rng.sample(perms, min(6, len(perms))):
            assert divided_difference(list(perm), k, exact=True) == ref


def test_confluent_limit():
    rng = random.Random(2)
    for _ in range(100):
        k = rng.randint(1, 5)
        j = rng.randint(1, k)
        x0 = rng.uniform(0.2, 1.5)
        target = math.comb(k, j) * x0 ** (k - j)
        errs = []
        for h in (1e-2, 1e-3, 1e-4):
            xs = [Fraction(x0) + Fraction(h) * i for i in range(j + 1)]
            nodes = [(x, x ** k) for x in xs]
            entries = [point_entry(x, y, i) for i, (x, y) in enumerate(nodes)]
            table, _ = _table(entries, exact=True)
            errs.append(abs(float(table[j][0]) - target))
        assert errs[0] >= errs[1] >= errs[2]
        assert errs[2] <= 1e-3 * max(1.0, abs(target))


@settings(max_examples=150, deadline=None)
@given(
    k=st.integers(1, 5),
    c=st.fractions(min_value=-5, max_value=5, max_denominator=50).filter(lambda v: v != 0),
    coeffs=st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=20), min_size=6, max_size=6),
    xs=st.lists(st.integers(-500, 500), min_size=6, max_size=6, unique=True),
)
def test_leading_coefficient_law(k, c, coeffs, xs):
    xs = [Fraction(x, 64) for x in xs[:k + 1]]

    def poly(x):
        return c * x ** k + sum(coeffs[i] * x ** i for i in range(k))

    entries = [point_entry(x, poly(x), i) for i, x in enumerate(sorted(xs))]
    table, _ = _table(entries, exact=True)
    assert table[k][0] == c


def test_newton_reproduces_nodes_exactly():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 6)
        pts = _rand_points(rng, n)
        for x, y in pts:
            assert newton_eval(pts, x, exact=True) == Fraction(y)


def test_newton_matches_derivatives_of_confluent_nodes():
    rng = random.Random(4)
    for _ in range(50):
        k = rng.randint(2, 5)
        x0 = rng.uniform(0.3, 1.2)
        nodes = [gamma(k, x0, 2), Point(x0 + 0.7, rng.uniform(0, 3))]
        h = 1e-6
        slope = (newton_eval(nodes, x0 + h) - newton_eval(nodes, x0 - h)) / (2 * h)
        assert slope == pytest.approx(k * x0 ** (k - 1), rel=1e-6)
        assert newton_eval(nodes, x0) == pytest.approx(x0 ** k, rel=1e-12)


def test_sign_agrees_with_float_when_clear():
    rng = random.Random(5)
    checked = 0
    for _ in range(100_000 // 20):
        k = rng.randint(1, 4)
        pts = sorted(_rand_points(rng, k + 1))
        entries = [point_entry(x, y, i) for i, (x, y) in enumerate(pts)]
        table, _ = _table(entries, exact=False)
        v = table[k][0]
        scale = max(abs(t) for col in table for t in col)
        if abs(v) > FALLBACK_RELATIVE * scale:
            checked += 1
            assert sign_of_tuple(pts, k) == (v > 0) - (v < 0)
    assert checked > 4000


def test_near_degenerate_decided_exactly():
    # three almost collinear points: float noise must not decide the sign
    eps = 2.0 ** -50
    pts = [(0.1, 0.1), (0.2, 0.2 + eps), (0.3, 0.3)]
    exact = divided_difference(pts, 2, exact=True)
    assert sign_of_tuple(pts, 2) == (exact > 0) - (exact < 0)
    assert sign_of_tuple([(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)], 2) == 0
