import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from scipy import stats

from kmonotone.cells import Cell, area
from kmonotone.errors import GuardrailError, InvalidInputError
from kmonotone.experiments import (
    _shape_deviation,
    concentration_experiment,
    coupling_check,
    estimate_alpha,
    fit_power_law,
    greedy_lower_bound,
    limit_shape_probe,
    run_poisson_trials,
    run_uniform_trials,
    superadditivity_check,
)
from kmonotone.numerics import Point
from kmonotone.sampling import RngSpec, sample_poisson_cell
from kmonotone.solver import solve_dp, solve_greedy_cells, solve_lis

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "estimate_report.schema.json").read_text())


def test_zero_points():
    for k in (1, 2, 3):
        assert all(r.L == 0 for r in run_uniform_trials(k, 0, 5, 1))


def test_uniform_records_replay():
    a = run_uniform_trials(2, 200, 6, 3)
    b = run_uniform_trials(2, 200, 6, 3, workers=2)
    assert [(r.stream_id, r.L, r.points) for r in a] == [(r.stream_id, r.L, r.points) for r in b]


def test_k1_mean_on_sqrt_scale():
    recs = run_uniform_trials(1, 10_000, 200, 1)
    assert 1.80 <= np.mean([r.L for r in recs]) / 100 <= 2.00


def test_poisson_mean_count():
    recs = run_poisson_trials(2, 4, 400, 2)
    lam = area(Cell(2, 0, 4))
    assert lam == 16
    assert abs(np.mean([r.points for r in recs]) - lam) < 3 * math.sqrt(lam / 400)


def test_translation_invariance():
    base = [r.L for r in run_poisson_trials(2, 4, 500, 3)]
    moved = [r.L for r in run_poisson_trials(2, 4, 500, 4, a=2.0)]
    assert stats.ks_2samp(base, moved).pvalue > 0.001


def test_tiny_cell_mostly_empty():
    n = 0.1
    lam = area(Cell(2, 0, n))
    recs = run_poisson_trials(2, n, 4000, 5)
    frac = np.mean([r.L == 0 for r in recs])
    p = math.exp(-lam)
    assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / 4000) + 1e-12


def test_envelopes():
    with pytest.raises(GuardrailError):
        run_uniform_trials(3, 500, 1, 0)
    run_uniform_trials(3, 500, 1, 0, max_n=500)
    with pytest.raises(GuardrailError):
        run_poisson_trials(3, 10, 1, 0)
    with pytest.raises(InvalidInputError):
        run_uniform_trials(0, 10, 1, 0)


def test_fit_power_law_recovers_slope():
    ns = np.array([10, 100, 1000, 10_000])
    slope, intercept = fit_power_law(ns, 3.0 * ns ** 0.37)
    assert slope == pytest.approx(0.37) and math.exp(intercept) == pytest.approx(3.0)


def test_estimate_grid_checks():
    with pytest.raises(InvalidInputError):
        estimate_alpha(1, [10, 20, 30], 2, 0)
    with pytest.raises(InvalidInputError):
        estimate_alpha(1, [10, 30, 20, 40], 2, 0)
    with pytest.raises(InvalidInputError):
        estimate_alpha(1, [10, 20, 30, 40], 2, 0, model="gaussian")


def test_estimate_report_schema_and_k1_fit():
    rep = estimate_alpha(1, [1000, 3000, 10_000, 30_000], 40, 6, bootstrap=200)
    doc = rep.to_json()
    jsonschema.validate(doc, SCHEMA)
    assert doc["domain"] == "unit_square"
    assert 0.45 <= doc["exponent_hat"] <= 0.56
    lo, hi = doc["exponent_ci"]
    assert lo <= doc["exponent_hat"] <= hi


def test_superadditive_lower_bounds():
    for k in (1, 2):
        rep = estimate_alpha(k, [3, 6, 9, 12], 60, 7, model="poisson", bootstrap=100)
        jsonschema.validate(rep.to_json(), SCHEMA)
        for row in rep.superadditive_lower_bounds:
            if row["n"] in (6, 9, 12):
                assert row["mean_ratio"] > 1 / 6 - row["ci_half"]


def test_report_json_is_deterministic_across_workers():
    one = estimate_alpha(2, [50, 100, 150, 200], 8, 9, bootstrap=100)
    recs = []
    for n in [50, 100, 150, 200]:
        recs += run_uniform_trials(2, n, 8, 9, workers=3)
    two = estimate_alpha(2, [50, 100, 150, 200], 8, 9, bootstrap=100, records=recs)
    assert json.dumps(one.to_json()) == json.dumps(two.to_json())


def test_concentration_single_trial():
    res = concentration_experiment(1, 100, 1, 0)
    assert res["std"] is None and res["ratio"] is None


def test_concentration_small_run():
    res = concentration_experiment(1, 2000, 200, 10)
    ex = [res["exceedance"][k] for k in ("1.0", "2.0", "3.0")]
    assert ex[0] >= ex[1] >= ex[2]
    assert ex[2] < 0.2
    assert res["ratio"] <= 2.5


def test_coupling_basic():
    res = coupling_check(1, 100, 1000, 11, cs=(3.0, 1e6))
    assert res["means_agree"]
    assert res["deviations"][0]["passes"]
    assert res["deviations"][1]["frequency"] == 0.0
    with pytest.raises(GuardrailError):
        coupling_check(3, 10_000, 10, 0)


def test_limit_shape_k1_trend():
    rows = limit_shape_probe(1, [100, 1000, 10_000], 40, 12)
    for prev, cur in zip(rows, rows[1:]):
        assert cur["mean"] <= prev["mean"] + prev["ci_half"] + cur["ci_half"]


def test_shape_deviation_cases():
    cell = Cell(2, 0, 1)
    p = Point(0.25, 0.1)
    h = 0.25  # width at x = 0.25 for k = 2 on (0, 1)
    assert _shape_deviation(cell, [p]) == pytest.approx(abs(0.1 - 0.0625) / h)
    curve = [Point(x, x * x) for x in (0.2, 0.5, 0.8)]
    assert _shape_deviation(cell, curve) == 0


def test_superadditivity_small():
    for k, n in ((1, 10), (2, 4)):
        rows = superadditivity_check(k, n, 40, 13)
        assert all(r["holds"] for r in rows)


def test_greedy_summary():
    g = greedy_lower_bound(2, 60, 30, 14)
    assert g["all_valid"] and g["subcells"] == 20
    assert g["frac_above_n_over_6"] >= 0.99
    assert g["occupancy"] > 1 - 1 / math.e


def test_greedy_below_dp_on_coupled_instances():
    greedy, exact = [], []
    for i in range(30):
        s = sample_poisson_cell(Cell(1, 0, 60), RngSpec(15, i))
        greedy.append(solve_greedy_cells(s).length)
        exact.append(solve_lis(s.points, 0, 60).length)
    assert np.mean(greedy) <= np.mean(exact)
    assert all(g <= e for g, e in zip(greedy, exact))


def test_objective_nesting_against_monotone():
    rng = np.random.default_rng(6)
    for _ in range(200):
        pts = rng.random((20, 2))
        assert solve_dp(pts, 3).length <= solve_lis(pts).length


@pytest.mark.xfail(strict=True, reason="L at order 3 can exceed L at order 2 under gamma_j endpoints")
def test_objective_nesting_against_convex():
    rng = np.random.default_rng(6)
    for _ in range(200):
        pts = rng.random((20, 2))
        assert solve_dp(pts, 3).length <= solve_dp(pts, 2).length
