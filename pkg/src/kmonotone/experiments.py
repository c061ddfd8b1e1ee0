"""Monte Carlo experiments on longest k-monotone chains.

Each trial is keyed by its stream id; workers may finish in any order, and
results are sorted by stream id before anything is aggregated, so every
report is a deterministic function of its arguments.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .cells import Cell, area, width
from .chains import BoundaryChain, validate_windows
from .errors import GuardrailError, InvalidInputError
from .sampling import (
    RngSpec,
    in_cell_mask,
    sample_poisson_cell,
    sample_poisson_subcells,
    sample_uniform_square,
)
from .solver import solve_dp, solve_greedy_cells, solve_lis

__all__ = [
    "TrialRecord",
    "EstimateReport",
    "UNIFORM_ENVELOPE",
    "POISSON_POINT_ENVELOPE",
    "CONCENTRATION_RATIO_CEILING",
    "run_uniform_trials",
    "run_poisson_trials",
    "estimate_alpha",
    "concentration_experiment",
    "coupling_check",
    "limit_shape_probe",
    "superadditivity_check",
    "greedy_lower_bound",
    "fit_power_law",
]

# largest n per k for the uniform model; beyond these the DP is too slow
UNIFORM_ENVELOPE = {1: 1_000_000, 2: 2000, 3: 120}
UNIFORM_ENVELOPE_DEFAULT = 120
# largest expected Poisson point count per k
POISSON_POINT_ENVELOPE = {1: 1e7, 2: 3000, 3: 300}
POISSON_POINT_ENVELOPE_DEFAULT = 200

# regression bound on std(L) / n^(1/4) for k = 1, n = 1e4; the pilot measured 0.408
CONCENTRATION_RATIO_CEILING = 0.6

_MODEL_CODE = {"uniform": 1, "poisson": 2}
Z95 = 1.959963984540054


@dataclass
class TrialRecord:
    k: int
    model: str
    n: float
    stream_id: int
    L: int
    points: int
    wall_ms: float
    # max over the witness of |y - x^k| / cell height, 0 for an empty witness
    shape_dev: float = 0.0


def _tag(model: str, k: int, n) -> tuple:
    return (_MODEL_CODE[model], k, int(round(n * 1000)))


def _shape_deviation(cell: Cell, witness) -> float:
    dev = 0.0
    for p in witness:
        h = width(cell, p.x)
        if h > 0:
            dev = max(dev, abs(p.y - p.x ** cell.k) / h)
    return dev


def _solve_points(pts, k, a, b):
    if k == 1:
        return solve_lis(pts, a, b)
    return solve_dp(pts, k, a, b)


def _uniform_trial(args):
    k, n, base_seed, stream_id = args
    t0 = time.perf_counter()
    pts = sample_uniform_square(n, RngSpec(base_seed, stream_id, _tag("uniform", k, n)))
    res = _solve_points(pts, k, 0.0, 1.0)
    cell = Cell(k, 0.0, 1.0)
    return TrialRecord(
        k, "uniform", n, stream_id, res.length,
        int(np.count_nonzero(in_cell_mask(cell, pts))),
        (time.perf_counter() - t0) * 1e3,
        _shape_deviation(cell, res.witness),
    )


def _poisson_trial(args):
    k, n, base_seed, stream_id, a = args
    t0 = time.perf_counter()
    cell = Cell(k, a, a + n)
    sample = sample_poisson_cell(cell, RngSpec(base_seed, stream_id, _tag("poisson", k, n)))
    res = _solve_points(sample.points, k, cell.a, cell.b)
    return TrialRecord(
        k, "poisson", n, stream_id, res.length, len(sample),
        (time.perf_counter() - t0) * 1e3,
        _shape_deviation(cell, res.witness),
    )


def _run(fn, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [fn(job) for job in jobs]
    return sorted(records, key=lambda r: r.stream_id)


def _check_uniform(k, n, max_n=None):
    if k < 1 or n < 0:
        raise InvalidInputError("need k >= 1 and n >= 0")
    limit = max_n if max_n is not None else UNIFORM_ENVELOPE.get(k, UNIFORM_ENVELOPE_DEFAULT)
    if n > limit:
        raise GuardrailError(f"uniform model with k={k} is limited to n <= {limit}")


def run_uniform_trials(k: int, n: int, trials: int, base_seed: int,
                       workers: int = 1, max_n: Optional[int] = None) -> List[TrialRecord]:
    """L for ``trials`` independent samples of n uniform points of the unit square."""
    _check_uniform(k, n, max_n)
    jobs = [(k, int(n), base_seed, i) for i in range(trials)]
    return _run(_uniform_trial, jobs, workers)


def run_poisson_trials(k: int, n: float, trials: int, base_seed: int, a: float = 0.0,
                       workers: int = 1, max_points: Optional[float] = None) -> List[TrialRecord]:
    """L(a, a + n) for ``trials`` realisations of the Poisson process on C_k(a, a + n)."""
    if k < 1 or not n > 0:
        raise InvalidInputError("need k >= 1 and n > 0")
    lam = area(Cell(k, a, a + n))
    limit = max_points if max_points is not None else POISSON_POINT_ENVELOPE.get(
        k, POISSON_POINT_ENVELOPE_DEFAULT)
    if lam > limit:
        raise GuardrailError(f"expected {lam:.3g} points exceeds {limit:.3g} for k={k}")
    jobs = [(k, n, base_seed, i, a) for i in range(trials)]
    return _run(_poisson_trial, jobs, workers)


# --- aggregation -------------------------------------------------------------

def fit_power_law(ns, means):
    """Least squares of log(mean) on log(n); returns (slope, intercept)."""
    lx, ly = np.log(np.asarray(ns, float)), np.log(np.asarray(means, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def _fixed_exponent_constant(ns, means, exponent):
    # least squares of log(mean) - exponent * log(n) on a constant
    ns, means = np.asarray(ns, float), np.asarray(means, float)
    return float(np.exp(np.mean(np.log(means) - exponent * np.log(ns))))


def _summary(values):
    v = np.asarray(values, float)
    mean = float(v.mean()) if len(v) else float("nan")
    std = float(v.std(ddof=1)) if len(v) > 1 else None
    half = Z95 * std / math.sqrt(len(v)) if std is not None else None
    return mean, std, half


@dataclass
class EstimateReport:
    k: int
    model: str
    domain: str
    n_grid: list
    trials: int
    base_seed: int
    per_n: list
    theory_exponent: float
    alpha_hat: Optional[float]
    alpha_ci: Optional[list]
    exponent_hat: Optional[float]
    exponent_ci: Optional[list]
    superadditive_lower_bounds: list
    concentration: list
    limit_shape: list

    def to_json(self) -> dict:
        return asdict(self)


def estimate_alpha(k: int, n_grid: Sequence, trials: int, base_seed: int,
                   model: str = "uniform", bootstrap: int = 1000, workers: int = 1,
                   records: Optional[List[TrialRecord]] = None) -> EstimateReport:
    """Fit mean L against n on a grid.

    Uniform model: L ~ alpha n^(1/(k+1)) over the unit square.  Poisson
    model: L(0, n) ~ alpha n, and mean L(0, n) / n is reported per n as a
    lower estimate of alpha (superadditivity makes alpha the supremum).
    ``alpha_hat`` fits the constant with the exponent held at its
    theoretical value; ``exponent_hat`` is the free log-log slope.  CIs are
    95% percentile bootstraps over trials.
    """
    if model not in _MODEL_CODE:
        raise InvalidInputError(f"unknown model {model!r}")
    n_grid = list(n_grid)
    if len(n_grid) < 4 or sorted(n_grid) != n_grid or len(set(n_grid)) != len(n_grid):
        raise InvalidInputError("n_grid must be strictly ascending with at least 4 values")
    if records is None:
        records = []
        for n in n_grid:
            run = run_uniform_trials if model == "uniform" else run_poisson_trials
            records += run(k, n, trials, base_seed, workers=workers)
    by_n = {n: [r for r in records if r.n == n] for n in n_grid}
    theory = 1.0 / (k + 1) if model == "uniform" else 1.0
    conc_exp = 1.0 / (2 * (k + 1)) if model == "uniform" else 0.5

    per_n, lower, conc, shape = [], [], [], []
    for n in n_grid:
        Ls = [r.L for r in by_n[n]]
        mean, std, half = _summary(Ls)
        per_n.append({"n": n, "mean": mean, "std": std, "ci_half": half,
                      "mean_points": float(np.mean([r.points for r in by_n[n]]))})
        if model == "poisson":
            lower.append({"n": n, "mean_ratio": mean / n,
                          "ci_half": half / n if half is not None else None})
        conc.append({"n": n, "std": std,
                     "ratio": std / n ** conc_exp if std is not None else None})
        devs = [r.shape_dev for r in by_n[n]]
        dmean, _, dhalf = _summary(devs)
        shape.append({"n": n, "mean": dmean, "ci_half": dhalf,
                      "max": float(np.max(devs)) if devs else None})

    usable = [(n, row["mean"]) for n, row in zip(n_grid, per_n) if row["mean"] > 0]
    alpha = expo = alpha_ci = expo_ci = None
    if len(usable) >= 2:
        ns = [u[0] for u in usable]
        expo, _ = fit_power_law(ns, [u[1] for u in usable])
        alpha = _fixed_exponent_constant(ns, [u[1] for u in usable], theory)
        if bootstrap:
            rng = RngSpec(base_seed, 0, (99, k, _MODEL_CODE[model])).generator()
            boot_means = []
            for n in ns:
                v = np.array([r.L for r in by_n[n]], float)
                idx = rng.integers(0, len(v), size=(bootstrap, len(v)))
                boot_means.append(v[idx].mean(axis=1))
            bm = np.array(boot_means)  # (len(ns), bootstrap)
            ok = (bm > 0).all(axis=0)
            lx = np.log(np.asarray(ns, float))
            ly = np.log(bm[:, ok])
            slopes = np.polyfit(lx, ly, 1)[0]
            alphas = np.exp(np.mean(ly - theory * lx[:, None], axis=0))
            expo_ci = [float(q) for q in np.percentile(slopes, [2.5, 97.5])]
            alpha_ci = [float(q) for q in np.percentile(alphas, [2.5, 97.5])]
    else:
        raise InvalidInputError("fewer than 2 grid points with positive mean L")

    return EstimateReport(
        k=k, model=model,
        domain="unit_square" if model == "uniform" else "poisson_cell_C_k(0,n)",
        n_grid=n_grid, trials=trials, base_seed=base_seed, per_n=per_n,
        theory_exponent=theory, alpha_hat=alpha, alpha_ci=alpha_ci,
        exponent_hat=expo, exponent_ci=expo_ci,
        superadditive_lower_bounds=lower, concentration=conc, limit_shape=shape,
    )


def concentration_experiment(k: int, n: int, trials: int, base_seed: int,
                             eps=(1.0, 2.0, 3.0), workers: int = 1,
                             records: Optional[List[TrialRecord]] = None) -> dict:
    """Spread of L on the n^(1/(2(k+1))) scale, plus exceedance frequencies

    P(|L - mean L| > eps * n^(1/(2(k+1)))) for each eps, with the empirical
    mean standing in for E L.  ``std`` is None for a single trial.
    """
    if records is None:
        records = run_uniform_trials(k, n, trials, base_seed, workers=workers)
    Ls = np.array([r.L for r in records], float)
    scale = n ** (1.0 / (2 * (k + 1))) if n > 0 else 1.0
    mean, std, half = _summary(Ls)
    exceed = {}
    for e in eps:
        exceed[str(float(e))] = float(np.mean(np.abs(Ls - mean) > e * scale)) if len(Ls) else None
    return {
        "k": k, "n": n, "trials": len(Ls), "base_seed": base_seed,
        "mean": mean, "std": std, "ci_half": half, "scale": scale,
        "ratio": std / scale if std is not None else None,
        "exceedance": exceed,
    }


def coupling_check(k: int, n: int, trials: int, base_seed: int, cs=(1.0, 2.0, 3.0)) -> dict:
    """Compare the Poisson count in C_k(0, n) with the count of n^(k+1)
    uniform points falling in C_k(0, 1).

    Both counts have mean n^(k+1) / (k 2^(k-1)).  For each c, reports how
    often the two independent counts differ by more than c sqrt(mean),
    next to the bound 4 exp(-c^2 / 3) with 3 sigma binomial slack.
    """
    big = n ** (k + 1)
    if big > 1e15:
        raise GuardrailError(f"n^(k+1) = {big:.3g} exceeds 1e15")
    q = 1.0 / (k * 2 ** (k - 1))
    mean = big * q
    gen = RngSpec(base_seed, 0, (7, k, n)).generator()
    pois = gen.poisson(mean, size=trials)
    binom = gen.binomial(int(big), q, size=trials)
    diff = np.abs(pois.astype(float) - binom.astype(float))
    rows = []
    for c in cs:
        bound = 4 * math.exp(-c * c / 3)
        p = min(bound, 1.0)
        slack = 3 * math.sqrt(p * (1 - p) / trials)
        freq = float(np.mean(diff > c * math.sqrt(mean)))
        rows.append({"c": float(c), "frequency": freq, "bound": bound,
                     "slack": slack, "passes": freq < bound + slack})
    sigma = math.sqrt(mean / trials)
    return {
        "k": k, "n": n, "trials": trials, "base_seed": base_seed,
        "expected_count": mean,
        "poisson_mean": float(pois.mean()), "binomial_mean": float(binom.mean()),
        "means_agree": bool(abs(pois.mean() - mean) <= 3 * sigma
                            and abs(binom.mean() - mean) <= 3 * sigma),
        "deviations": rows,
    }


def limit_shape_probe(k: int, n_grid: Sequence, trials: int, base_seed: int,
                      workers: int = 1) -> list:
    """Per n: distribution of the witness' largest normalised distance to Gamma_k."""
    out = []
    for n in n_grid:
        recs = run_uniform_trials(k, n, trials, base_seed, workers=workers)
        devs = np.array([r.shape_dev for r in recs], float)
        mean, std, half = _summary(devs)
        out.append({
            "n": n, "mean": mean, "ci_half": half,
            "median": float(np.median(devs)),
            "q90": float(np.quantile(devs, 0.9)),
            "max": float(devs.max()),
        })
    return out


def superadditivity_check(k: int, n: float, trials: int, base_seed: int) -> list:
    """For each realisation on C_k(0, 2n): (L(0,2n), L(0,n), L(n,2n)) from the same points."""
    out = []
    for i in range(trials):
        sample = sample_poisson_cell(Cell(k, 0.0, 2 * n), RngSpec(base_seed, i, (11, k, int(n * 1000))))
        whole = _solve_points(sample.points, k, 0.0, 2 * n).length
        left = _solve_points(sample.points, k, 0.0, n).length
        right = _solve_points(sample.points, k, n, 2 * n).length
        out.append({"stream_id": i, "whole": whole, "left": left, "right": right,
                    "holds": whole >= left + right})
    return out


def greedy_lower_bound(k: int, n: int, trials: int, base_seed: int,
                       spacing: float = 3.0, validate: bool = True) -> dict:
    """The one-point-per-sub-cell chain on C_k(0, n), ``trials`` times.

    Only the sub-cells are sampled (see sample_poisson_subcells).  Reports
    whether every greedy chain validated, how often its length beat n / 6,
    and the sub-cell occupancy frequency against 1 - exp(-area).
    """
    cell = Cell(k, 0.0, float(n))
    lengths, occupied, valid = [], [], True
    for i in range(trials):
        sample = sample_poisson_subcells(cell, RngSpec(base_seed, i, (13, k, n)), spacing)
        res = solve_greedy_cells(sample, spacing)
        lengths.append(res.length)
        occupied += res.info["occupied"]
        if validate:
            valid &= validate_windows(BoundaryChain(k, cell.a, cell.b, res.witness)).valid
    sub_area = area(Cell(k, 0.0, spacing))
    p_theory = 1 - math.exp(-sub_area)
    occ = float(np.mean(occupied)) if occupied else float("nan")
    sigma = math.sqrt(p_theory * (1 - p_theory) / max(len(occupied), 1))
    return {
        "k": k, "n": n, "trials": trials, "base_seed": base_seed,
        "subcells": int(n // spacing), "subcell_area": sub_area,
        "all_valid": bool(valid) if validate else None,
        "mean_length": float(np.mean(lengths)),
        "frac_above_n_over_6": float(np.mean(np.array(lengths) > n / 6)),
        "occupancy": occ, "occupancy_theory": p_theory, "occupancy_sigma": sigma,
        "lengths": lengths,
    }
