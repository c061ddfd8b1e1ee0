import json
import random
from fractions import Fraction

import pytest

from conftest import near_curve_chain, valid_chain
from kmonotone.chains import (
    EXHAUSTIVE_MAX_LENGTH,
    BoundaryChain,
    Chain,
    chain_to_json,
    load_chain,
    load_points,
    lower_order_check,
    nesting_check,
    points_to_csv,
    validate_exhaustive,
    validate_windows,
)
from kmonotone.errors import GuardrailError, InvalidInputError
from kmonotone.numerics import _table


@pytest.mark.parametrize("k", range(1, 6))
def test_boundary_only_chain_is_valid(k):
    chain = BoundaryChain(k, 0.0, 1.0)
    assert validate_windows(chain).valid
    assert validate_exhaustive(chain).valid


def test_decreasing_pair_fails_on_that_window():
    chain = BoundaryChain(1, 0.0, 1.0, Chain(((0.3, 0.6), (0.6, 0.3))))
    rep = validate_windows(chain)
    assert not rep.valid
    # flattened: gamma(0), p1, p2, gamma(1); the failing window is (p1, p2)
    assert rep.first_failing_window == (1, 3)
    assert not validate_exhaustive(chain).valid


@pytest.mark.parametrize("k", range(1, 5))
def test_points_on_curve_validate(k):
    pts = [(x, x ** k) for x in (0.1, 0.3, 0.5, 0.7, 0.9)]
    chain = BoundaryChain(k, 0.0, 1.0, Chain(tuple(pts)))
    assert validate_windows(chain).valid
    assert validate_exhaustive(chain).valid


def test_listed_k2_case_agrees():
    chain = BoundaryChain(2, 0.0, 1.0, Chain(((0.5, 0.05), (0.75, 0.3))))
    assert validate_windows(chain).valid == validate_exhaustive(chain).valid


def test_report_is_truthy():
    assert bool(validate_windows(BoundaryChain(2, 0.0, 1.0)))


def test_leftmost_failure_reported():
    # two separate bad spots, the left one must be reported
    pts = ((0.2, 0.5), (0.3, 0.1), (0.6, 0.65), (0.7, 0.6))
    rep = validate_windows(BoundaryChain(1, 0.0, 1.0, Chain(pts)))
    assert rep.first_failing_window == (1, 3)


def test_degenerate_flag():
    # collinear middle window under k = 2
    pts = ((0.25, 0.1), (0.5, 0.3), (0.75, 0.5))
    rep = validate_windows(BoundaryChain(2, 0.0, 1.0, Chain(pts)))
    assert rep.degenerate


def test_chain_needs_increasing_abscissae():
    with pytest.raises(InvalidInputError):
        Chain(((0.5, 0.1), (0.5, 0.2)))
    with pytest.raises(InvalidInputError):
        Chain(((0.6, 0.1), (0.5, 0.2)))


def test_interior_strictly_inside():
    with pytest.raises(InvalidInputError):
        BoundaryChain(2, 0.0, 1.0, Chain(((0.0, 0.0),)))
    with pytest.raises(InvalidInputError):
        BoundaryChain(2, 0.0, 1.0, Chain(((1.0, 1.0),)))
    with pytest.raises(InvalidInputError):
        BoundaryChain(2, 1.0, 1.0)


def test_exhaustive_guardrail():
    pts = tuple((i / 40, (i / 40) ** 2) for i in range(1, 40))
    with pytest.raises(GuardrailError):
        validate_exhaustive(BoundaryChain(2, 0.0, 1.0, Chain(pts)))
    assert EXHAUSTIVE_MAX_LENGTH == 40


def test_windows_match_exhaustive_random():
    rng = random.Random(7)
    agree = 0
    for _ in range(300):
        k = rng.randint(1, 4)
        chain = near_curve_chain(rng, k, rng.randint(0, 8))
        w, e = validate_windows(chain), validate_exhaustive(chain)
        if w.degenerate or e.degenerate:
            continue
        assert w.valid == e.valid
        agree += 1
    assert agree > 250


def test_deletion_keeps_validity():
    rng = random.Random(8)
    for case in range(500):
        k = rng.randint(1, 4)
        chain = valid_chain(case, k, n=10)
        pts = chain.interior.points
        if not pts:
            continue
        i = rng.randrange(len(pts))
        shorter = BoundaryChain(k, 0.0, 1.0, Chain(pts[:i] + pts[i + 1:]))
        assert validate_windows(shorter).valid


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lower_order_windows_of_valid_chains(k):
    for seed in range(500 // 3 + 1):
        chain = valid_chain(1000 * k + seed, k, n=10)
        for j in range(1, k):
            assert lower_order_check(chain, j)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_nesting_down_to_monotone(k):
    # j = 1 with gamma_1 endpoints follows from the lower-order windows
    for seed in range(500 // 3 + 1):
        assert nesting_check(valid_chain(1000 * k + seed, k, n=10), 1)


@pytest.mark.xfail(strict=True, reason="gamma_j endpoints are stronger than the k-chain's own; see counterexample test")
def test_nesting_with_order_j_endpoints_all_j():
    for seed in range(200):
        for j in (1, 2):
            assert nesting_check(valid_chain(3000 + seed, 3, n=10), j)


def test_nesting_counterexample_single_point():
    # inside C_4(0, 1) (slice [0.112, 0.173]) but below 2x - 1, so outside C_2(0, 1)
    chain = BoundaryChain(4, 0.0, 1.0, Chain(((0.607, 0.1404),)))
    assert validate_windows(chain).valid
    assert lower_order_check(chain, 2)
    assert not nesting_check(chain, 2)


def test_nesting_boundary_only_and_range():
    chain = BoundaryChain(3, 0.0, 1.0)
    assert all(nesting_check(chain, j) for j in (1, 2, 3))
    with pytest.raises(InvalidInputError):
        nesting_check(chain, 4)


def test_lower_differences_increase_from_zero():
    for seed in range(500):
        k = 2 + seed % 3
        chain = valid_chain(5000 + seed, k, n=10)
        seq = chain.entries()
        vals = []
        for s in range(len(seq) - k + 1):
            table, _ = _table(seq[s:s + k], exact=True)
            vals.append(table[k - 1][0])
        assert vals[0] == 0
        assert all(u <= v for u, v in zip(vals, vals[1:]))


# file formats

def test_json_round_trip(tmp_path):
    chain = BoundaryChain(2, 0.0, 1.0, Chain(((0.25, 0.01), (0.5, 0.2))))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(chain_to_json(chain)))
    assert load_chain(path) == chain


def test_csv_round_trip(tmp_path):
    pts = [(0.1, 0.2), (0.3, 1e-17), (0.7, 0.123456789012345)]
    path = tmp_path / "p.csv"
    path.write_text(points_to_csv(pts))
    back, meta = load_points(path)
    assert back == pts and meta == {}


def test_loader_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_points(bad)
    nok = tmp_path / "nok.json"
    nok.write_text(json.dumps({"points": [[0.5, 0.1]]}))
    with pytest.raises(InvalidInputError):
        load_chain(nok)
    hdr = tmp_path / "h.csv"
    hdr.write_text("a,b\n1,2\n")
    with pytest.raises(InvalidInputError):
        load_points(hdr)


def test_bare_list_and_overrides(tmp_path):
    path = tmp_path / "l.json"
    path.write_text("[[0.6, 0.3], [0.4, 0.1]]")
    chain = load_chain(path, k=1, a=0.0, b=1.0)
    assert [p.x for p in chain.interior] == [0.4, 0.6]


def test_non_finite_points_rejected():
    with pytest.raises(InvalidInputError):
        Chain(((0.5, float("nan")),))
