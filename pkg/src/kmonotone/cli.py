"""Command line interface: ``kmonotone <subcommand> ...``.

Reports go to ``--out`` (or stdout).  When ``--out`` is a file, a PNG
figure with the same stem is written next to it.  Exit codes: 0 ok,
2 invalid input, 3 guardrail or budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import plots
from .cells import Cell, cell_info
from .chains import load_chain, load_points, points_to_csv, validate_exhaustive, validate_windows
from .errors import BudgetExceededError, GuardrailError, InvalidInputError
from .experiments import (
    concentration_experiment,
    coupling_check,
    estimate_alpha,
    limit_shape_probe,
    run_poisson_trials,
    run_uniform_trials,
)
from .sampling import RngSpec, sample_poisson_cell, sample_uniform_cell, sample_uniform_square
from .solver import DEFAULT_BUDGET, solve

EXIT_OK, EXIT_INVALID, EXIT_GUARDRAIL = 0, 2, 3

TRIAL_COLUMNS = ["k", "model", "n", "stream_id", "L", "wall_ms"]

# stream tag for `sample`, kept apart from the experiment tags
_SAMPLE_TAG = (21,)


def _int_list(text):
    try:
        values = [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    return values


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n")


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


def _trials_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIAL_COLUMNS)
    for r in records:
        row = asdict(r)
        row["wall_ms"] = f"{row['wall_ms']:.3f}"
        writer.writerow([row[c] for c in TRIAL_COLUMNS])
    return buf.getvalue()


def _figure(args, draw):
    if args.out is not None and not args.no_plot:
        draw(plots.figure_path(args.out))


# --- subcommands -------------------------------------------------------------

def cmd_validate(args):
    chain = load_chain(args.points, args.k, args.a, args.b)
    report = validate_exhaustive(chain) if args.exhaustive else validate_windows(chain)
    doc = {
        "k": chain.k, "a": chain.a, "b": chain.b, "m": len(chain.interior),
        "valid": report.valid, "degenerate": report.degenerate,
        "first_failing_window": list(report.first_failing_window)
        if report.first_failing_window else None,
        "method": "exhaustive" if args.exhaustive else "windows",
    }
    _emit(_dump_json(doc), args.out)
    return EXIT_OK


def cmd_solve(args):
    points, meta = load_points(args.points)
    k = args.k if args.k is not None else meta.get("k")
    if k is None:
        raise InvalidInputError("--k is required (not found in the input file)")
    a = args.a if args.a is not None else float(meta.get("a", 0.0))
    b = args.b if args.b is not None else float(meta.get("b", 1.0))
    res = solve(points, int(k), a, b, args.method, args.budget)
    doc = res.to_json()
    doc.update({"k": int(k), "a": a, "b": b})
    _emit(_dump_json(doc), args.out)
    if a >= 0:
        _figure(args, lambda p: plots.plot_cell(Cell(int(k), a, b), points, p, res.witness))
    return EXIT_OK


def cmd_sample(args):
    rng = RngSpec(args.seed, 0, _SAMPLE_TAG + (args.k,))
    cell = Cell(args.k, args.a, args.b)
    if args.mode == "square":
        pts = sample_uniform_square(args.n, rng)
    elif args.mode == "cell":
        pts = sample_uniform_cell(cell, args.n, rng)
    else:
        pts = sample_poisson_cell(cell, rng).points
    _emit(points_to_csv(pts), args.out)
    meta = {"k": args.k, "a": args.a, "b": args.b, "mode": args.mode,
            "seed": args.seed, "count": int(len(pts))}
    if args.out is not None:
        Path(args.out).with_suffix(".json").write_text(_dump_json(meta) + "\n")
        _figure(args, lambda p: plots.plot_cell(cell, pts, p))
    else:
        sys.stderr.write(json.dumps(meta) + "\n")
    return EXIT_OK


def cmd_cell_info(args):
    _emit(_dump_json(cell_info(Cell(args.k, args.a, args.b))), args.out)
    return EXIT_OK


def cmd_estimate(args):
    run = run_uniform_trials if args.model == "uniform" else run_poisson_trials
    grid = args.n_grid
    if len(grid) < 4 or sorted(set(grid)) != grid:
        raise InvalidInputError("--n-grid must be strictly ascending with at least 4 values")
    records = []
    for n in grid:
        records += run(args.k, n, args.trials, args.seed, workers=args.workers)
    report = estimate_alpha(args.k, grid, args.trials, args.seed, args.model,
                            bootstrap=args.bootstrap, records=records)
    doc = report.to_json()
    _emit(_dump_json(doc) if args.format == "json" else _trials_csv(records), args.out)
    _figure(args, lambda p: plots.plot_estimate(doc, p))
    return EXIT_OK


def cmd_concentration(args):
    records = run_uniform_trials(args.k, args.n, args.trials, args.seed, workers=args.workers)
    result = concentration_experiment(args.k, args.n, args.trials, args.seed,
                                      eps=args.eps, records=records)
    _emit(_dump_json(result) if args.format == "json" else _trials_csv(records), args.out)
    _figure(args, lambda p: plots.plot_concentration(result, [r.L for r in records], p))
    return EXIT_OK


def cmd_coupling(args):
    result = coupling_check(args.k, args.n, args.trials, args.seed, cs=args.cs)
    if args.format == "json":
        text = _dump_json(result)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["c", "frequency", "bound", "slack", "passes"])
        for row in result["deviations"]:
            writer.writerow([row["c"], row["frequency"], row["bound"], row["slack"], row["passes"]])
        text = buf.getvalue()
    _emit(text, args.out)
    _figure(args, lambda p: plots.plot_coupling(result, p))
    return EXIT_OK


def cmd_limit_shape(args):
    rows = limit_shape_probe(args.k, args.n_grid, args.trials, args.seed, workers=args.workers)
    if args.format == "json":
        text = _dump_json({"k": args.k, "trials": args.trials, "base_seed": args.seed,
                           "limit_shape": rows})
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    _emit(text, args.out)
    _figure(args, lambda p: plots.plot_limit_shape(rows, p, args.k))
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=None, help="chain order")
    common.add_argument("--seed", type=_seed, default=0, help="base seed (u64)")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    parser = argparse.ArgumentParser(
        prog="kmonotone", description="Longest k-monotone chains in random point sets."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a chain file")
    p.add_argument("--points", required=True, help="chain JSON or x,y CSV")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--exhaustive", action="store_true",
                   help="test every (k+1)-subset instead of consecutive windows")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common], help="longest chain in a point file")
    p.add_argument("--points", required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--method", choices=["dp", "brute", "lis", "greedy"], default="dp")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample", parents=[common], help="draw points (CSV + JSON sidecar)")
    p.add_argument("--mode", choices=["square", "cell", "poisson"], default="cell")
    p.add_argument("--n", type=int, default=1000, help="count for square/cell modes")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("cell-info", parents=[common], help="area and vertices of C_k(a, b)")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.set_defaults(func=cmd_cell_info)

    p = sub.add_parser("estimate", parents=[common], help="fit E L against n")
    p.add_argument("--model", choices=["uniform", "poisson"], default="uniform")
    p.add_argument("--n-grid", type=_int_list, required=True, help="comma-separated n values")
    p.add_argument("--bootstrap", type=int, default=1000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("concentration", parents=[common], help="spread of L at one n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=_float_list, default=[1.0, 2.0, 3.0])
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("coupling", parents=[common], help="Poisson against binomial counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cs", type=_float_list, default=[1.0, 2.0, 3.0])
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("limit-shape", parents=[common], help="witness distance to the curve")
    p.add_argument("--n-grid", type=_int_list, required=True)
    p.set_defaults(func=cmd_limit_shape)
    return parser


_NEEDS_K = {"sample", "cell-info", "estimate", "concentration", "coupling", "limit-shape"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _NEEDS_K and args.k is None:
            raise InvalidInputError("--k is required")
        if args.trials < 1:
            raise InvalidInputError("--trials must be >= 1")
        return args.func(args)
    except BudgetExceededError as exc:
        sys.stderr.write(f"error: {exc} (certified lower bound {exc.lower_bound})\n")
        return EXIT_GUARDRAIL
    except GuardrailError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_GUARDRAIL
    except (InvalidInputError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
