"""Figures written next to CLI reports.  Uses the Agg backend, files only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cells import Cell, cell_bounds  # noqa: E402

__all__ = [
    "figure_path",
    "plot_estimate",
    "plot_concentration",
    "plot_cell",
    "plot_limit_shape",
    "plot_coupling",
]

_RC = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 110,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def figure_path(out) -> Path:
    """The PNG that goes with a report file: same stem, .png suffix."""
    return Path(out).with_suffix(".png")


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _cell_outline(ax, cell: Cell, samples: int = 400, **kw):
    xs = np.linspace(cell.a, cell.b, samples)
    lo, hi = zip(*(cell_bounds(cell, float(x)) for x in xs))
    ax.plot(xs, lo, color="0.3", lw=0.8, **kw)
    ax.plot(xs, hi, color="0.3", lw=0.8)
    ax.plot(xs, xs ** cell.k, color="C3", lw=0.8, ls="--", label=f"y = x^{cell.k}")


def plot_estimate(report: dict, path) -> Path:
    """Mean L against n on log-log axes with the fitted and theoretical lines."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ns = np.array([row["n"] for row in report["per_n"]], float)
        means = np.array([row["mean"] for row in report["per_n"]], float)
        err = np.array([row["ci_half"] or 0.0 for row in report["per_n"]], float)
        ax.errorbar(ns, means, yerr=err, fmt="o", ms=3, capsize=2, label="mean L")
        grid = np.geomspace(ns.min(), ns.max(), 50)
        if report.get("exponent_hat") is not None:
            slope = report["exponent_hat"]
            c = np.exp(np.mean(np.log(means) - slope * np.log(ns)))
            ax.plot(grid, c * grid ** slope, lw=1, label=f"fit, slope {slope:.3f}")
        if report.get("alpha_hat") is not None:
            th = report["theory_exponent"]
            ax.plot(grid, report["alpha_hat"] * grid ** th, lw=1, ls=":",
                    label=f"{report['alpha_hat']:.3f} n^{th:.3g}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("L")
        ax.set_title(f"k = {report['k']}, {report['model']} model", fontsize=9)
        ax.legend()
        return _save(fig, path)


def plot_concentration(result: dict, lengths, path) -> Path:
    """Histogram of L - mean L in units of the concentration scale."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        z = (np.asarray(lengths, float) - result["mean"]) / result["scale"]
        ax.hist(z, bins=max(10, int(np.sqrt(len(z)))), color="C0", alpha=0.8)
        for e in result["exceedance"]:
            ax.axvline(float(e), color="0.5", lw=0.6, ls=":")
            ax.axvline(-float(e), color="0.5", lw=0.6, ls=":")
        ax.set_xlabel("(L - mean) / n^(1/(2(k+1)))")
        ax.set_ylabel("trials")
        ax.set_title(f"k = {result['k']}, n = {result['n']}", fontsize=9)
        return _save(fig, path)


def plot_cell(cell: Cell, points, path, witness=None) -> Path:
    """Sample points over the cell outline, with an optional chain on top."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        _cell_outline(ax, cell)
        pts = np.asarray(points, float).reshape(-1, 2)
        if len(pts):
            ax.scatter(pts[:, 0], pts[:, 1], s=2, color="C0", alpha=0.6, lw=0)
        if witness is not None and len(witness):
            w = np.asarray([tuple(p) for p in witness], float)
            ax.plot(w[:, 0], w[:, 1], "o-", ms=3, lw=0.8, color="C1", label="chain")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(loc="upper left")
        return _save(fig, path)


def plot_limit_shape(rows, path, k: int) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ns = [r["n"] for r in rows]
        ax.plot(ns, [r["mean"] for r in rows], "o-", ms=3, label="mean")
        ax.plot(ns, [r["q90"] for r in rows], "s--", ms=3, label="90% quantile")
        ax.plot(ns, [r["max"] for r in rows], "^:", ms=3, label="max")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("witness distance to curve / cell height")
        ax.set_title(f"k = {k}", fontsize=9)
        ax.legend()
        return _save(fig, path)


def plot_coupling(result: dict, path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        rows = result["deviations"]
        cs = [r["c"] for r in rows]
        ax.plot(cs, [r["frequency"] for r in rows], "o-", ms=3, label="observed")
        ax.plot(cs, [min(r["bound"], 1.0) for r in rows], "--", label="4 exp(-c^2/3)")
        ax.set_yscale("symlog", linthresh=1e-3)
        ax.set_xlabel("c")
        ax.set_ylabel("P(|N - M| > c sqrt(mean))")
        ax.legend()
        return _save(fig, path)
